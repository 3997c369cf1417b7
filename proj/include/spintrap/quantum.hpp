#pragma once

// Quantum escape pipeline for S = hbar/2: bound Gaussian spin-down state,
// continuum Bessel spin-up state, the nonadiabatic coupling matrix element,
// density of states, and the golden-rule lifetime, plus a radial
// finite-difference eigensolver used as an independent oracle.
//
// Internally everything runs in scaled units (lengths in G = B0/B'perp,
// energies in mu*B0), where hbar^2/(2m G^2) = 2 K^2 mu B0 and the bound and
// continuum states depend on K alone:
//   psi_down radial ~ exp(-s^2/(4K)),   psi_up radial ~ J1(s/K).
// The matrix-element integrals cancel down to exp(-1/K) of the integrand
// magnitude and are evaluated in __float128 (see quadrature.hpp).

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "spintrap/bessel.hpp"
#include "spintrap/errors.hpp"
#include "spintrap/quadrature.hpp"
#include "spintrap/trap.hpp"

namespace spintrap {

inline constexpr double log10_e = 0.4342944819032518;

/// Bound (trapped) spin-down state under the harmonic approximation.
struct BoundState {
    double gaussian_width_parameter_cm2; ///< a = (1/4K) (B'perp/B0)^2
    double normalization_cm;             ///< D = B'perp / (B0 sqrt(2 pi K))
    double energy_erg;                   ///< E_down = mu B0 (1 + 2K)
    double angular_index = 0.5;          ///< nu
    double extent_cm;                    ///< sqrt(K) B0/B'perp
};

/// Harmonic/adiabatic validity is K < 0.2; above that the state is still
/// constructed but downstream reports flag it.
inline BoundState bound_state(const TrapConfig& cfg) {
    cfg.validate();
    const double K = cfg.adiabaticity();
    const double G = cfg.b0_gauss / cfg.bperp_gauss_per_cm;
    BoundState b;
    b.gaussian_width_parameter_cm2 = 1.0 / (4.0 * K * G * G);
    b.normalization_cm = 1.0 / (G * std::sqrt(2.0 * M_PI * K));
    b.energy_erg = cfg.mu_erg_per_gauss * cfg.b0_gauss * (1.0 + 2.0 * K);
    b.extent_cm = std::sqrt(K) * G;
    return b;
}

/// Box-normalized continuum spin-up state at the bound-state energy.
struct ContinuumState {
    double wavenumber_cm_inv; ///< k = B'perp/(B0 K)
    int order;                ///< gamma + 1/2
    double angular_index;     ///< gamma
    double normalization_cm;  ///< C = sqrt(k/(2R))
    double box_radius_cm;     ///< R
};

inline ContinuumState continuum_state(const TrapConfig& cfg, double box_radius_cm,
                                      double angular_index = 0.5) {
    cfg.validate();
    const double K = cfg.adiabaticity();
    const double G = cfg.b0_gauss / cfg.bperp_gauss_per_cm;
    const double r_lo = 20.0 * std::sqrt(K) * G; // R >> bound-state extent
    const double r_hi = 0.1 * G;                 // uniform-potential validity
    if (!(box_radius_cm >= r_lo && box_radius_cm <= r_hi))
        throw domain_error("continuum_state: box radius " + std::to_string(box_radius_cm) +
                           " cm outside validity window [" + std::to_string(r_lo) + ", " +
                           std::to_string(r_hi) + "] cm");
    ContinuumState c;
    c.wavenumber_cm_inv = 1.0 / (K * G);
    c.angular_index = angular_index;
    c.order = static_cast<int>(std::lround(angular_index + 0.5));
    c.box_radius_cm = box_radius_cm;
    c.normalization_cm = std::sqrt(c.wavenumber_cm_inv / (2.0 * box_radius_cm));
    return c;
}

/// Box eigen-wavenumbers k_n = (n + 1/4) pi / R from the asymptotic J1 zeros.
inline double box_wavenumber(double box_radius_cm, int n) {
    return (n + 0.25) * M_PI / box_radius_cm;
}

/// The R-independent combination C^2 rho(E = mu B0) = m / (2 pi hbar^2).
inline double dos_product(const TrapConfig& cfg) {
    cfg.validate();
    return cfg.mass_gram / (2.0 * M_PI * cfg.hbar_erg_s * cfg.hbar_erg_s);
}

/// Density of final states alone at E = mu B0 for a box of radius R.
inline double density_of_states(const TrapConfig& cfg, double box_radius_cm) {
    cfg.validate();
    return box_radius_cm / (2.0 * M_PI) *
           std::sqrt(cfg.mass_gram /
                     (cfg.hbar_erg_s * cfg.hbar_erg_s * cfg.mu_erg_per_gauss * cfg.b0_gauss));
}

enum class MatrixElementMethod { closed_form, quadrature_approx, quadrature_exact };

struct MatrixElementOptions {
    double box_radius_scaled = 0.1;      ///< R in units of B0/B'perp
    double continuum_angular_index = 0.5; ///< gamma; 1.5 probes the selection rule
    double rel_tol = 1e-9;
};

namespace detail {

/// exp(-1/K) cancellation is resolvable in __float128 up to about 1/K = 55;
/// beyond that the quadrature would silently return noise.
inline constexpr double max_feasible_inv_K = 55.0;

/// Dimensionless radial integral
///   I(K) = int_0^inf bracket_nu(s) J_order(s/K) exp(-s^2/4K) s ds
/// with bracket built from theta(s) = atan(s) either exactly or with the
/// r -> 0 substitutions (theta' = 1, theta'' = 0, sin theta = s).
inline quad_real reduced_matrix_integral(double K_in, MatrixElementMethod method, int order,
                                         double nu, double rel_tol) {
    if (1.0 / K_in > max_feasible_inv_K)
        throw numerical_error(
            "matrix element quadrature: exp(-1/K) cancellation at K = " +
            std::to_string(K_in) + " exceeds quad-precision headroom (needs 1/K <= 55); "
            "use the closed form / log-space pipeline");
    const quad_real K = static_cast<quad_real>(K_in);
    const quad_real a = 1 / (4 * K);
    const quad_real k = 1 / K;
    const quad_real nuq = static_cast<quad_real>(nu);
    const bool exact = (method == MatrixElementMethod::quadrature_exact);
    auto f = [&](quad_real s) -> quad_real {
        quad_real bracket;
        if (exact) {
            const quad_real one_s2 = 1 + s * s;
            const quad_real tp = 1 / one_s2;
            const quad_real tpp = -2 * s / (one_s2 * one_s2);
            const quad_real st = s / ::sqrtq(one_s2);
            bracket = 2 * a * s * tp - tpp / 2 - tp / (2 * s) + nuq * st / (s * s);
        } else {
            bracket = 2 * a * s + (nuq - quad_real(0.5)) / s;
        }
        return bracket * bessel_j(order, k * s) * ::expq(-a * s * s) * s;
    };
    auto res = integrate_gauss_bessel<quad_real>(f, a, k, static_cast<quad_real>(rel_tol));
    if (res.error_estimate > quad_real(1e-6) * fl::abs(res.value))
        throw numerical_error(
            "matrix element quadrature did not converge: estimated relative error " +
            std::to_string(static_cast<double>(res.error_estimate /
                                               fl::abs(res.value))) +
            " after " + std::to_string(res.evaluations) + " evaluations in " +
            std::to_string(res.panels) + " panels");
    return res.value;
}

/// Angular overlap int_0^{2pi} e^{i(nu-gamma)phi} dphi by the periodic
/// rectangle rule: 2 pi for matched indices, zero (to rounding) otherwise.
inline double angular_overlap(double nu, double gamma) {
    constexpr int n = 256;
    double re = 0.0;
    for (int j = 0; j < n; ++j) {
        const double phi = 2.0 * M_PI * j / n;
        re += std::cos((nu - gamma) * phi);
    }
    return re * 2.0 * M_PI / n;
}

/// log10 |H_closed| for the matched matrix element with box radius R_scaled;
/// usable at any K (no underflow).
inline double log10_abs_matrix_element_closed(const TrapConfig& cfg, double box_radius_scaled) {
    const double K = cfg.adiabaticity();
    const double mu_b0 = cfg.mu_erg_per_gauss * cfg.b0_gauss;
    const double d_tilde = 1.0 / std::sqrt(2.0 * M_PI * K);
    const double c_tilde = std::sqrt(1.0 / (2.0 * K * box_radius_scaled));
    // |H| = 4 pi K^2 mu B0 C D * 2 exp(-1/K)
    return std::log10(8.0 * M_PI * K * K * mu_b0 * c_tilde * d_tilde) - log10_e / K;
}

} // namespace detail

/// Coupling matrix element <up|H_int|down> [erg].  The closed form is Eq.-t8
/// style: -sqrt(pi) hbar^2 (B'perp/(m B0)) C sqrt(2/K) exp(-1/K); the
/// quadrature methods integrate the underlying radial integral directly (with
/// the r->0 substitutions or with exact theta) and exist as independent
/// routes.  Mismatched angular indices annihilate the element through the
/// angular overlap.
inline double matrix_element(const TrapConfig& cfg, MatrixElementMethod method,
                             const MatrixElementOptions& opt = {}) {
    cfg.validate();
    const double K = cfg.adiabaticity();
    const double mu_b0 = cfg.mu_erg_per_gauss * cfg.b0_gauss;
    const double nu = 0.5;
    const double gamma = opt.continuum_angular_index;
    const int order = static_cast<int>(std::lround(gamma + 0.5));
    if (order < 1 || order > 2)
        throw domain_error("matrix_element: continuum angular index must be 0.5 or 1.5");
    const double d_tilde = 1.0 / std::sqrt(2.0 * M_PI * K);
    const double c_tilde = std::sqrt(1.0 / (2.0 * K * opt.box_radius_scaled));
    const double overlap = detail::angular_overlap(nu, gamma);

    double integral;
    if (method == MatrixElementMethod::closed_form) {
        if (order != 1)
            throw domain_error("matrix_element: closed form exists for the matched index only");
        integral = 2.0 * std::exp(-1.0 / K);
    } else {
        integral = static_cast<double>(
            detail::reduced_matrix_integral(K, method, order, nu, opt.rel_tol));
    }
    return -2.0 * K * K * mu_b0 * overlap * c_tilde * d_tilde * integral;
}

/// Golden-rule lifetime report.  The closed form
///   T_esc = T_vib/(128 pi^2) exp(2/K)
/// is the canonical output; the composed chain assembles the transition rate
/// from the matrix element and C^2 rho and lands on 16x the closed form (the
/// constant-factor gap between the published intermediate formulas and the
/// published final constant), surfaced in ratio_log10 together with the
/// quadrature/closed-form correction.
struct LifetimeReport {
    double adiabaticity;               ///< K
    double t_vib_s;
    double log10_t_esc_closed_s;
    double log10_t_esc_composed_s;
    double t_esc_closed_s;             ///< inf when the exponent overflows
    double t_esc_composed_s;
    double ratio_log10;                ///< log10(T_composed / T_closed)
    double matrix_element_closed_erg;  ///< 0 when exp(-1/K) underflows
    double matrix_element_quadrature_erg; ///< NaN when quadrature infeasible
    double log10_abs_matrix_element_closed;
    double dos_product_per_erg;
    double box_radius_scaled;
    bool quadrature_evaluated;
    bool outside_validity;             ///< K >= 0.2
    TrapConfig config;
};

inline LifetimeReport lifetime(const TrapConfig& cfg, const MatrixElementOptions& opt = {}) {
    cfg.validate();
    const double K = cfg.adiabaticity();
    LifetimeReport rep;
    rep.config = cfg;
    rep.adiabaticity = K;
    rep.box_radius_scaled = opt.box_radius_scaled;
    rep.outside_validity = K >= 0.2;
    rep.t_vib_s = 2.0 * M_PI / cfg.omega_vib();
    rep.log10_t_esc_closed_s =
        std::log10(rep.t_vib_s / (128.0 * M_PI * M_PI)) + 2.0 * log10_e / K;
    rep.dos_product_per_erg = dos_product(cfg);
    rep.log10_abs_matrix_element_closed =
        detail::log10_abs_matrix_element_closed(cfg, opt.box_radius_scaled);
    rep.matrix_element_closed_erg = matrix_element(cfg, MatrixElementMethod::closed_form, opt);

    double quad_correction = 1.0; // quadrature / closed-form ratio
    rep.quadrature_evaluated = 1.0 / K <= detail::max_feasible_inv_K;
    if (rep.quadrature_evaluated) {
        rep.matrix_element_quadrature_erg =
            matrix_element(cfg, MatrixElementMethod::quadrature_approx, opt);
        quad_correction = rep.matrix_element_quadrature_erg / rep.matrix_element_closed_erg;
    } else {
        rep.matrix_element_quadrature_erg = std::numeric_limits<double>::quiet_NaN();
    }
    rep.ratio_log10 = std::log10(16.0) - 2.0 * std::log10(std::abs(quad_correction));
    rep.log10_t_esc_composed_s = rep.log10_t_esc_closed_s + rep.ratio_log10;
    rep.t_esc_closed_s = std::pow(10.0, rep.log10_t_esc_closed_s);
    rep.t_esc_composed_s = std::pow(10.0, rep.log10_t_esc_composed_s);
    return rep;
}

// ---------------------------------------------------------------------------
// Radial eigensolver oracle.
//
// The radial equation -kappa [ (1/r)(r f')' - c2 f / r^2 ] + V(r) f = E f is
// discretized on cell centers r_j = (j - 1/2) h with conservative fluxes and
// a hard wall at r_max, then symmetrized by conjugation with sqrt(r_j) into a
// symmetric tridiagonal problem solved by Sturm bisection plus inverse
// iteration.  (A bare u = f sqrt(r) substitution puts the critical -1/(4r^2)
// coupling on the grid and stalls near 2% error; the conservative form of
// the same operator converges at O(h^2).)
// ---------------------------------------------------------------------------

struct RadialGrid {
    double r_max;
    int n_points;
};

struct RadialSolution {
    double energy;
    std::vector<double> r; ///< cell centers
    std::vector<double> f; ///< radial wavefunction, int f^2 r dr = 1
};

namespace detail {

/// Number of eigenvalues of the symmetric tridiagonal (d, e) below x.
inline int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    int count = 0;
    double q = d[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        const double denom = (q == 0.0) ? 1e-300 : q;
        q = d[i] - x - e[i - 1] * e[i - 1] / denom;
        if (q < 0) ++count;
    }
    return count;
}

/// k-th smallest eigenvalue (k = 0 is the ground state) by bisection.
inline double tridiag_eigenvalue(const std::vector<double>& d, const std::vector<double>& e,
                                 int k) {
    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double rad = (i > 0 ? std::abs(e[i - 1]) : 0.0) +
                           (i + 1 < d.size() ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - rad);
        hi = std::max(hi, d[i] + rad);
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (sturm_count(d, e, mid) > k ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Eigenvector by inverse iteration with the shifted Thomas solve.
inline std::vector<double> tridiag_eigenvector(const std::vector<double>& d,
                                               const std::vector<double>& e, double lambda) {
    const std::size_t n = d.size();
    std::vector<double> v(n, 1.0), c(n), dn(n);
    // small relative shift keeps the factorization nonsingular
    const double shift = lambda * (1.0 + 1e-12) + 1e-300;
    for (int pass = 0; pass < 3; ++pass) {
        // Thomas forward sweep for (T - shift) w = v
        dn[0] = d[0] - shift;
        if (dn[0] == 0.0) dn[0] = 1e-300;
        c[0] = e.empty() ? 0.0 : e[0] / dn[0];
        for (std::size_t i = 1; i < n; ++i) {
            dn[i] = d[i] - shift - e[i - 1] * c[i - 1];
            if (dn[i] == 0.0) dn[i] = 1e-300;
            if (i < n - 1) c[i] = e[i] / dn[i];
            v[i] = v[i] - e[i - 1] * (v[i - 1] / dn[i - 1]);
        }
        v[n - 1] /= dn[n - 1];
        for (std::size_t i = n - 1; i-- > 0;) v[i] = v[i] / dn[i] - c[i] * v[i + 1];
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

struct Tridiag {
    std::vector<double> d, e, r;
    double h;
};

inline Tridiag radial_tridiag(double kappa, const std::function<double(double)>& potential,
                              double angular_c2, const RadialGrid& grid) {
    const int n = grid.n_points;
    const double h = grid.r_max / n;
    Tridiag t;
    t.h = h;
    t.d.resize(n);
    t.e.resize(n - 1);
    t.r.resize(n);
    for (int j = 0; j < n; ++j) {
        const double r = (j + 0.5) * h;
        const double rp = r + 0.5 * h, rm = r - 0.5 * h;
        t.r[j] = r;
        t.d[j] = kappa * (rp + rm) / (r * h * h) + kappa * angular_c2 / (r * r) + potential(r);
    }
    t.d[n - 1] += kappa * (grid.r_max) / (t.r[n - 1] * h * h); // wall: ghost f = -f_n
    for (int j = 0; j + 1 < n; ++j) {
        const double rp = t.r[j] + 0.5 * h;
        t.e[j] = -kappa * rp / (h * h * std::sqrt(t.r[j] * t.r[j + 1]));
    }
    return t;
}

} // namespace detail

/// Lowest eigenpair of the radial problem.  kappa is hbar^2/(2m) in the
/// caller's units (2 K^2 for scaled units with energies in mu B0 and lengths
/// in B0/B'perp); angular_c2 is the 1/r^2 coefficient ((nu - 1/2)^2 for the
/// spin-down equation, (gamma + 1/2)^2 for the spin-up one).
inline RadialSolution radial_eigensolver(double kappa,
                                         const std::function<double(double)>& potential,
                                         double angular_c2, const RadialGrid& grid,
                                         bool convergence_check = true) {
    if (!(grid.r_max > 0.0) || grid.n_points < 16)
        throw domain_error("radial_eigensolver: need r_max > 0 and n_points >= 16");
    auto t = detail::radial_tridiag(kappa, potential, angular_c2, grid);
    const double e0 = detail::tridiag_eigenvalue(t.d, t.e, 0);
    if (convergence_check) {
        RadialGrid half{grid.r_max, grid.n_points / 2};
        auto th = detail::radial_tridiag(kappa, potential, angular_c2, half);
        const double eh = detail::tridiag_eigenvalue(th.d, th.e, 0);
        const double scale = std::max({std::abs(e0), std::abs(eh), 1e-300});
        if (std::abs(e0 - eh) > 0.05 * scale)
            throw numerical_error("radial_eigensolver: eigenvalue moved " +
                                  std::to_string(std::abs(e0 - eh) / scale) +
                                  " (relative) under grid halving; refine the grid");
    }
    auto w = detail::tridiag_eigenvector(t.d, t.e, e0);
    RadialSolution sol;
    sol.energy = e0;
    sol.r = t.r;
    sol.f.resize(w.size());
    double norm2 = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        sol.f[j] = w[j] / std::sqrt(t.r[j]);
        norm2 += sol.f[j] * sol.f[j] * t.r[j] * t.h;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    const double sign = (sol.f[0] < 0.0) ? -1.0 : 1.0;
    for (double& x : sol.f) x *= sign * inv;
    return sol;
}

/// Excited-state energies (k = 0, 1, ...) of the same problem; used by the
/// box-mode cross-checks.
inline std::vector<double> radial_eigenvalues(double kappa,
                                              const std::function<double(double)>& potential,
                                              double angular_c2, const RadialGrid& grid,
                                              int count) {
    auto t = detail::radial_tridiag(kappa, potential, angular_c2, grid);
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k) out[k] = detail::tridiag_eigenvalue(t.d, t.e, k);
    return out;
}

} // namespace spintrap
