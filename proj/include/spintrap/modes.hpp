#pragma once

// Normal modes of the linearized trap dynamics.
//
// Sign bookkeeping, fixed once: the spin-down stationary state (n = -z, the
// trapped one) takes the upper sign throughout, giving the secular cubics
//   Gamma+ :  K w^3 + w^2 - 1 = 0
//   Gamma- :  K w^3 - w^2 + 1 = 0        (w = omega / omega_vib)
// and the spin-up state (n = +z) the lower sign,
//   Gamma+ :  K w^3 + w^2 + 1 = 0
//   Gamma- :  K w^3 - w^2 - 1 = 0.
// This convention reproduces both anchors: spin-up is unstable for every K
// (complex pair), and spin-down destabilizes exactly at K_c = sqrt(4/27).
// Roots of Gamma+ are the negated roots of Gamma-; reported mode frequencies
// follow the positive-real-part convention, so all three physical spin-down
// modes can be read off the Gamma- cubic alone.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spintrap/errors.hpp"

namespace spintrap {

enum class Symmetry { gamma_plus, gamma_minus };
enum class Orientation { spin_down, spin_up };
enum class Branch { vibrational_plus, vibrational_minus, precessional };

inline const char* to_string(Symmetry s) {
    return s == Symmetry::gamma_plus ? "gamma_plus" : "gamma_minus";
}
inline const char* to_string(Branch b) {
    switch (b) {
    case Branch::vibrational_plus: return "vibrational_plus";
    case Branch::vibrational_minus: return "vibrational_minus";
    default: return "precessional";
    }
}

/// Coefficients c[0] + c[1] w + c[2] w^2 + c[3] w^3 of the secular cubic.
inline std::array<double, 4> secular_cubic(double K, Symmetry sym, Orientation orient) {
    if (!(K > 0.0)) throw domain_error("secular_cubic: K must be > 0");
    const double s2 = (sym == Symmetry::gamma_plus) ? 1.0 : -1.0;
    const double s0 = (orient == Orientation::spin_down) ? -s2 : s2;
    return {s0, 0.0, s2, K};
}

namespace detail {

/// Roots of a cubic via the balanced companion matrix, then Newton-polished.
/// Real-coefficient cubics have either three real roots or one real root and
/// a conjugate pair; when the discriminant says all-real, polishing runs in
/// real arithmetic so stable spectra carry exactly zero imaginary part.
inline std::array<std::complex<double>, 3> cubic_roots(const std::array<double, 4>& c) {
    Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
    companion(0, 2) = -c[0] / c[3];
    companion(1, 2) = -c[1] / c[3];
    companion(2, 2) = -c[2] / c[3];
    companion(1, 0) = 1.0;
    companion(2, 1) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion, /*computeEigenvectors=*/false);
    std::array<std::complex<double>, 3> roots{es.eigenvalues()(0), es.eigenvalues()(1),
                                              es.eigenvalues()(2)};

    const double a = c[3], b = c[2], cc = c[1], d = c[0];
    const double disc = 18 * a * b * cc * d - 4 * b * b * b * d + b * b * cc * cc -
                        4 * a * cc * cc * cc - 27 * a * a * d * d;
    auto polish_real = [&](double x) {
        for (int it = 0; it < 4; ++it) {
            const double p = ((a * x + b) * x + cc) * x + d;
            const double dp = (3 * a * x + 2 * b) * x + cc;
            if (dp == 0.0) break;
            x -= p / dp;
        }
        return x;
    };
    auto polish_complex = [&](std::complex<double> z) {
        for (int it = 0; it < 4; ++it) {
            const std::complex<double> p = ((a * z + b) * z + cc) * z + d;
            const std::complex<double> dp = (3.0 * a * z + 2.0 * b) * z + cc;
            if (dp == 0.0) break;
            z -= p / dp;
        }
        return z;
    };
    for (auto& r : roots) {
        if (disc >= 0.0)
            r = polish_real(r.real());
        else
            r = polish_complex(r);
    }
    return roots;
}

/// Backward-relative residual |p(w)| / sum_i |c_i w^i|.
inline double cubic_residual(const std::array<double, 4>& c, std::complex<double> w) {
    std::complex<double> p = c[0];
    double scale = std::abs(c[0]);
    std::complex<double> wi = 1.0;
    for (int i = 1; i < 4; ++i) {
        wi *= w;
        p += c[i] * wi;
        scale += std::abs(c[i] * wi);
    }
    return std::abs(p) / scale;
}

} // namespace detail

/// The three roots of the secular cubic for (K, symmetry, orientation).
inline std::array<std::complex<double>, 3> secular_roots(double K, Symmetry sym,
                                                         Orientation orient) {
    return detail::cubic_roots(secular_cubic(K, sym, orient));
}

/// K_c = sqrt(4/27): upper adiabaticity bound for spin-down stability.
inline double critical_adiabaticity() { return std::sqrt(4.0 / 27.0); }

struct DoubleRootLocation {
    double K;               ///< where the two Gamma- branches collide
    double merge_frequency; ///< shared frequency at the collision (sqrt 3)
};

/// Locates the Gamma- double root by bisecting on the onset of a complex
/// pair; independent of the closed forms it is checked against.
inline DoubleRootLocation locate_gamma_minus_double_root() {
    auto max_imag = [](double K) {
        auto roots = secular_roots(K, Symmetry::gamma_minus, Orientation::spin_down);
        double m = 0.0;
        for (const auto& r : roots) m = std::max(m, std::abs(r.imag()));
        return m;
    };
    double lo = 0.30, hi = 0.45; // brackets the transition
    for (int it = 0; it < 120; ++it) {
        const double mid = 0.5 * (lo + hi);
        (max_imag(mid) > 1e-7 ? hi : lo) = mid;
        if (hi - lo < 1e-15 * hi) break;
    }
    const double K_star = 0.5 * (lo + hi);
    // Mean of the two colliding roots: their sqrt(eps) splittings cancel.
    auto roots = secular_roots(lo, Symmetry::gamma_minus, Orientation::spin_down);
    std::array<double, 3> re{roots[0].real(), roots[1].real(), roots[2].real()};
    std::sort(re.begin(), re.end());
    double best = 0.0, gap = std::numeric_limits<double>::max();
    for (int i = 0; i + 1 < 3; ++i) {
        if (re[i + 1] - re[i] < gap) {
            gap = re[i + 1] - re[i];
            best = 0.5 * (re[i] + re[i + 1]);
        }
    }
    return {K_star, best};
}

/// Eigenvector of the 2x2 secular system in scaled units (lengths in
/// B0/B'perp, frequencies in omega_vib): rho_0 = A / w, eps_0 = -w A.
struct ModeEigenvector {
    std::complex<double> rho_0;
    std::complex<double> eps_0;
};

inline ModeEigenvector eigenvector_for(double /*K*/, std::complex<double> omega_n, double A) {
    if (std::abs(omega_n) == 0.0)
        throw singular_mode_error("eigenvector_for: omega = 0 has no eigenvector");
    return {A / omega_n, -omega_n * A};
}

/// Residual of the scaled 2x2 system rows applied to (rho_0, eps_0):
///   row 1:  w^2 rho + eps
///   row 2 (Gamma+): +/- rho/K + (w + 1/K) eps   [upper sign = spin-down]
///   row 2 (Gamma-): -/+ rho/K + (w - 1/K) eps
/// normalized by the largest row-term magnitude.
inline double eigenvector_residual(double K, std::complex<double> omega_n,
                                   const ModeEigenvector& v, Symmetry sym,
                                   Orientation orient) {
    const std::complex<double> row1 = omega_n * omega_n * v.rho_0 + v.eps_0;
    const double row1_scale =
        std::max(std::abs(omega_n * omega_n * v.rho_0), std::abs(v.eps_0));
    double sgn = (orient == Orientation::spin_down) ? 1.0 : -1.0;
    if (sym == Symmetry::gamma_minus) sgn = -sgn;
    const std::complex<double> shift =
        (sym == Symmetry::gamma_plus) ? omega_n + 1.0 / K : omega_n - 1.0 / K;
    const std::complex<double> row2 = sgn * v.rho_0 / K + shift * v.eps_0;
    const double row2_scale = std::max(std::abs(v.rho_0 / K), std::abs(shift * v.eps_0));
    return std::max(std::abs(row1) / std::max(row1_scale, 1e-300),
                    std::abs(row2) / std::max(row2_scale, 1e-300));
}

/// Excitation energy of an oscillatory mode in units of mu*B0:
/// xi = (3 - w^2) |A|^2.  Positive for vibrational modes (w^2 < 3), negative
/// for the precessional mode, zero at the K_c collision.
inline double excitation_energy_scaled(double /*K*/, double omega_n, double A) {
    return (3.0 - omega_n * omega_n) * A * A;
}

inline double excitation_energy_scaled_checked(double K, std::complex<double> omega_n,
                                               double A) {
    if (omega_n.imag() != 0.0)
        throw domain_error("excitation_energy: defined for oscillatory (real) modes only");
    return excitation_energy_scaled(K, omega_n.real(), A);
}

/// First-order frequency shift from viscous friction, in units of omega_vib:
///   d w = i K (rp w^4 + rt g^2) / (w^2 - 3)
/// with rp = r_p/S, rt = r_t (B0/B'perp)^2 / S as dimensionless groups and
/// g^2 the geometry ratio in scaled lengths (1 when lengths are in B0/B'perp).
inline std::complex<double> friction_shift(double K, double omega_n0, double rt_group,
                                           double rp_group, double geometry_ratio = 1.0) {
    if (rt_group < 0.0 || rp_group < 0.0)
        throw domain_error("friction_shift: friction groups must be >= 0");
    const double denom = omega_n0 * omega_n0 - 3.0;
    if (denom == 0.0)
        throw degenerate_mode_error("friction_shift: omega^2 = 3 (degenerate at K_c)");
    const double w4 = omega_n0 * omega_n0 * omega_n0 * omega_n0;
    return {0.0, K * (rp_group * w4 + rt_group * geometry_ratio) / denom};
}

/// Damped secular polynomial, Eq. of first order in the friction groups:
/// degree six in w, coefficients complex.  Used as the oracle against which
/// friction_shift is checked.
inline std::array<std::complex<double>, 7> damped_secular_coefficients(double K,
                                                                       double rt_group,
                                                                       double rp_group) {
    // 0 = -K^2 w^6 + w^4 - 2 w^2 + 1
    //     + 2iK w^5 rp - 2iK^3 w^5 rt' + 2iK w^3 rt' - 2iK w^3 rp - 2iK w rt'
    // where rt' = (r_t/S)(B0/B'perp)^2 = rt_group and rp = rp_group.
    using C = std::complex<double>;
    const C i(0.0, 1.0);
    std::array<C, 7> c{};
    c[6] = -K * K;
    c[5] = 2.0 * i * K * rp_group - 2.0 * i * K * K * K * rt_group;
    c[4] = 1.0;
    c[3] = 2.0 * i * K * rt_group - 2.0 * i * K * rp_group;
    c[2] = -2.0;
    c[1] = -2.0 * i * K * rt_group;
    c[0] = 1.0;
    return c;
}

/// One mode of the spin-down spectrum.
struct ModeSolution {
    std::complex<double> omega_n; ///< frequency in units of omega_vib, Re >= 0
    Symmetry symmetry;
    Branch branch;
    ModeEigenvector eigenvector;
    double amplitude = 1.0;
};

/// The three physical spin-down modes at adiabaticity K, read off the Gamma-
/// cubic: roots with negative real part are Gamma+ modes reported as -w.
inline std::array<ModeSolution, 3> spin_down_modes(double K, double amplitude = 1.0) {
    auto roots = detail::cubic_roots(secular_cubic(K, Symmetry::gamma_minus,
                                                   Orientation::spin_down));
    std::array<ModeSolution, 3> modes;
    int n = 0;
    for (auto r : roots) {
        ModeSolution m;
        if (r.real() < 0.0) {
            m.omega_n = -r;
            m.symmetry = Symmetry::gamma_plus;
        } else {
            m.omega_n = r;
            m.symmetry = Symmetry::gamma_minus;
        }
        m.amplitude = amplitude;
        m.eigenvector = eigenvector_for(K, m.omega_n, amplitude);
        modes[n++] = m;
    }
    // Branch labels at this K in isolation: the Gamma+ root is
    // vibrational_plus; of the two Gamma- roots the faster is precessional.
    auto* gp = &modes[0];
    std::array<ModeSolution*, 2> gm{nullptr, nullptr};
    int gi = 0;
    for (auto& m : modes)
        if (m.symmetry == Symmetry::gamma_plus) gp = &m;
        else gm[gi++] = &m;
    gp->branch = Branch::vibrational_plus;
    if (std::abs(gm[0]->omega_n) > std::abs(gm[1]->omega_n)) std::swap(gm[0], gm[1]);
    gm[0]->branch = Branch::vibrational_minus;
    gm[1]->branch = Branch::precessional;
    if (gm[0]->omega_n.imag() != 0.0) {
        // complex pair past K_c: put the decaying partner on the vibrational
        // tag and the growing one on the precessional tag (fixed convention)
        if (gm[0]->omega_n.imag() > gm[1]->omega_n.imag()) std::swap(gm[0]->branch, gm[1]->branch);
    }
    return modes;
}

struct SweepRow {
    double K;
    std::array<ModeSolution, 3> modes; ///< ordered vib+, vib-, precessional
    bool stable;
};

/// Spin-down spectrum over a K grid with branches tracked by nearest-neighbor
/// continuity in the complex plane.  Rows are stable iff every |Im w| is at
/// or below 1e-12 (at K = K_c itself the marginal double root counts as
/// stable).
inline std::vector<SweepRow> sweep(double K_min, double K_max, int steps) {
    if (!(K_min > 0.0) || !(K_max > K_min)) throw domain_error("sweep: need 0 < K_min < K_max");
    if (steps < 2) throw domain_error("sweep: need steps >= 2");
    std::vector<SweepRow> rows;
    rows.reserve(steps);
    std::array<std::complex<double>, 3> prev;
    for (int i = 0; i < steps; ++i) {
        const double K = K_min + (K_max - K_min) * i / (steps - 1);
        auto modes = spin_down_modes(K);
        std::array<ModeSolution, 3> ordered;
        if (i == 0) {
            for (const auto& m : modes) ordered[static_cast<int>(m.branch)] = m;
        } else {
            // greedy nearest-neighbor matching to the previous row
            std::array<bool, 3> used{false, false, false};
            for (int slot = 0; slot < 3; ++slot) {
                int best = -1;
                double bestd = std::numeric_limits<double>::max();
                for (int j = 0; j < 3; ++j) {
                    if (used[j]) continue;
                    const double d = std::abs(modes[j].omega_n - prev[slot]);
                    if (d < bestd) { bestd = d; best = j; }
                }
                used[best] = true;
                ordered[slot] = modes[best];
                ordered[slot].branch = static_cast<Branch>(slot);
            }
        }
        for (int slot = 0; slot < 3; ++slot) prev[slot] = ordered[slot].omega_n;
        bool stable = true;
        for (const auto& m : ordered)
            if (std::abs(m.omega_n.imag()) > 1e-12) stable = false;
        rows.push_back({K, ordered, stable});
    }
    return rows;
}

} // namespace spintrap
