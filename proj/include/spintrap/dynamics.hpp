#pragma once

// Full nonlinear translation-spin dynamics in scaled units (lengths in
// B0/B'perp, time in 1/omega_vib, energies in mu*B0).  In these units the
// field is Bs = (x, -y, 1) and the equations of motion read
//   x'' =  nx - rt x'
//   y'' = -ny - rt y'
//   n'  = (c - rp n x c) / (1 + rp^2),   c = (1/K) n x Bs
// where rt = r_t/(m omega_vib) and rp = r_p/S.  The spin-damping equation is
// implicit in n'; the closed form above is the exact inverse of the linear
// map u -> u + rp n x u restricted to the tangent plane of the unit sphere,
// so n . n' = 0 holds identically.
//
// Integrator: classical fixed-step RK4 with the spin renormalized to unit
// length after each step.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "spintrap/errors.hpp"
#include "spintrap/modes.hpp"
#include "spintrap/trap.hpp"

namespace spintrap {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

namespace detail {
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
} // namespace detail

/// State in scaled units; spin is the unit direction vector of S (and mu).
struct ClassicalState {
    Vec2 pos{0.0, 0.0};
    Vec2 vel{0.0, 0.0};
    Vec3 spin{0.0, 0.0, -1.0};
};

/// Physical friction coefficients.
struct FrictionCoefficients {
    double translational_gram_per_s = 0.0; ///< r_t
    double precessional_erg_s = 0.0;       ///< r_p

    void validate() const {
        if (translational_gram_per_s < 0.0 || precessional_erg_s < 0.0)
            throw invalid_config_error("FrictionCoefficients must be >= 0");
    }
};

/// Dimensionless groups the scaled dynamics actually depends on.
struct ScaledFriction {
    double rt = 0.0; ///< r_t / (m omega_vib)
    double rp = 0.0; ///< r_p / S
};

inline ScaledFriction scale_friction(const TrapConfig& cfg, const FrictionCoefficients& f) {
    f.validate();
    return {f.translational_gram_per_s / (cfg.mass_gram * cfg.omega_vib()),
            f.precessional_erg_s / cfg.spin_erg_s};
}

struct StateDerivative {
    Vec2 dpos;
    Vec2 dvel;
    Vec3 dspin;
};

inline StateDerivative rhs_scaled(const ClassicalState& s, double K,
                                  const ScaledFriction& fric = {}) {
    const Vec3 field{s.pos[0], -s.pos[1], 1.0};
    const Vec3 c = {(s.spin[1] * field[2] - s.spin[2] * field[1]) / K,
                    (s.spin[2] * field[0] - s.spin[0] * field[2]) / K,
                    (s.spin[0] * field[1] - s.spin[1] * field[0]) / K};
    StateDerivative d;
    d.dpos = s.vel;
    d.dvel = {s.spin[0] - fric.rt * s.vel[0], -s.spin[1] - fric.rt * s.vel[1]};
    if (fric.rp == 0.0) {
        d.dspin = c;
    } else {
        const Vec3 nxc = detail::cross(s.spin, c);
        const double inv = 1.0 / (1.0 + fric.rp * fric.rp);
        d.dspin = {(c[0] - fric.rp * nxc[0]) * inv, (c[1] - fric.rp * nxc[1]) * inv,
                   (c[2] - fric.rp * nxc[2]) * inv};
    }
    return d;
}

/// Physical-units wrapper: derivative of (pos cm, vel cm/s, n) at a state
/// given in scaled units is rarely wanted; this overload keeps the spec'd
/// signature by scaling in and out of the K-only core.
inline StateDerivative rhs(const ClassicalState& s, const TrapConfig& cfg,
                           const FrictionCoefficients& fric = {}) {
    cfg.validate();
    return rhs_scaled(s, cfg.adiabaticity(), scale_friction(cfg, fric));
}

/// Conserved diagnostics: Lambda = (L_z - S_z)/S and the exact excitation
/// energy xi/(mu B0) = v^2/2 - n.Bs - 1 (zero at the spin-down rest state).
struct Invariants {
    double lambda_over_S;
    double excitation_energy_scaled;
};

inline Invariants invariants_scaled(const ClassicalState& s, double K) {
    const double lz = s.pos[0] * s.vel[1] - s.pos[1] * s.vel[0];
    const double lambda = lz / K - s.spin[2];
    const Vec3 field{s.pos[0], -s.pos[1], 1.0};
    const double v2 = s.vel[0] * s.vel[0] + s.vel[1] * s.vel[1];
    const double xi = 0.5 * v2 - detail::dot(s.spin, field) - 1.0;
    return {lambda, xi};
}

inline Invariants invariants_of(const ClassicalState& s, const TrapConfig& cfg) {
    cfg.validate();
    return invariants_scaled(s, cfg.adiabaticity());
}

struct Trajectory {
    std::vector<double> times;
    std::vector<ClassicalState> states;
    std::vector<double> lambda_series;
    std::vector<double> energy_series;
    double max_unit_drift = 0.0;  ///< worst |n|-1 seen before renormalization
    bool accuracy_warning = false; ///< drift exceeded 1e-6 at some step
};

inline Trajectory integrate_scaled(ClassicalState state, double K, const ScaledFriction& fric,
                                   double dt, double t_final, std::size_t stride = 1) {
    if (!(dt > 0.0) || !(t_final > 0.0))
        throw domain_error("integrate: dt and t_final must be > 0");
    if (stride == 0) stride = 1;
    const auto n_steps = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-12));

    Trajectory traj;
    traj.times.reserve(n_steps / stride + 2);
    auto record = [&](double t, const ClassicalState& s) {
        traj.times.push_back(t);
        traj.states.push_back(s);
        const auto inv = invariants_scaled(s, K);
        traj.lambda_series.push_back(inv.lambda_over_S);
        traj.energy_series.push_back(inv.excitation_energy_scaled);
    };
    record(0.0, state);

    auto axpy = [](const ClassicalState& s, double h, const StateDerivative& d) {
        ClassicalState r;
        for (int i = 0; i < 2; ++i) {
            r.pos[i] = s.pos[i] + h * d.dpos[i];
            r.vel[i] = s.vel[i] + h * d.dvel[i];
        }
        for (int i = 0; i < 3; ++i) r.spin[i] = s.spin[i] + h * d.dspin[i];
        return r;
    };

    for (std::size_t step = 1; step <= n_steps; ++step) {
        const auto k1 = rhs_scaled(state, K, fric);
        const auto k2 = rhs_scaled(axpy(state, 0.5 * dt, k1), K, fric);
        const auto k3 = rhs_scaled(axpy(state, 0.5 * dt, k2), K, fric);
        const auto k4 = rhs_scaled(axpy(state, dt, k3), K, fric);
        for (int i = 0; i < 2; ++i) {
            state.pos[i] += dt / 6.0 * (k1.dpos[i] + 2 * k2.dpos[i] + 2 * k3.dpos[i] + k4.dpos[i]);
            state.vel[i] += dt / 6.0 * (k1.dvel[i] + 2 * k2.dvel[i] + 2 * k3.dvel[i] + k4.dvel[i]);
        }
        for (int i = 0; i < 3; ++i)
            state.spin[i] +=
                dt / 6.0 * (k1.dspin[i] + 2 * k2.dspin[i] + 2 * k3.dspin[i] + k4.dspin[i]);

        const double n = detail::norm(state.spin);
        const double drift = std::abs(n - 1.0);
        if (drift > traj.max_unit_drift) traj.max_unit_drift = drift;
        for (int i = 0; i < 3; ++i) state.spin[i] /= n;

        if (step % stride == 0 || step == n_steps) record(step * dt, state);
    }
    traj.accuracy_warning = traj.max_unit_drift > 1e-6;
    return traj;
}

inline Trajectory integrate(const ClassicalState& state0, const TrapConfig& cfg,
                            const FrictionCoefficients& fric, double dt_scaled,
                            double t_final_scaled, std::size_t stride = 1) {
    cfg.validate();
    return integrate_scaled(state0, cfg.adiabaticity(), scale_friction(cfg, fric), dt_scaled,
                            t_final_scaled, stride);
}

/// Default step: a thousandth of the vibration period.  Resolves the fast
/// precession down to K ~ 0.005; below that callers must choose dt.
inline double default_dt_scaled() { return 2.0 * M_PI / 1000.0; }

// ---------------------------------------------------------------------------
// Linearization about the stationary states.
// ---------------------------------------------------------------------------

/// Coefficient matrix of the linearized system over (dx, dy, ex, ey) in
/// scaled units: rows 1-2 give (x'', y''), rows 3-4 give (ex', ey').
/// Upper sign = spin_down (n = -z).
inline Eigen::Matrix4d stationary_jacobian_scaled(double K, Orientation orient) {
    const double s = (orient == Orientation::spin_down) ? -1.0 : 1.0;
    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    J(0, 2) = 1.0;
    J(1, 3) = -1.0;
    J(2, 1) = s / K;
    J(2, 3) = 1.0 / K;
    J(3, 0) = s / K;
    J(3, 2) = -1.0 / K;
    return J;
}

/// Same matrix in physical units: positions in cm, spin deviations
/// dimensionless, time in seconds.
inline Eigen::Matrix4d jacobian_at_stationary(const TrapConfig& cfg, Orientation orient) {
    cfg.validate();
    const double wv = cfg.omega_vib();
    const double K = cfg.adiabaticity();
    const double G = cfg.b0_gauss / cfg.bperp_gauss_per_cm;
    Eigen::Matrix4d J = stationary_jacobian_scaled(K, orient);
    // row scale: x'' rows carry omega_vib^2, epsilon' rows omega_vib; column
    // scale: position columns carry 1/G.
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 4; ++c) J(r, c) *= wv * wv * ((c < 2) ? 1.0 : G);
    for (int r = 2; r < 4; ++r)
        for (int c = 0; c < 4; ++c) J(r, c) *= wv * ((c < 2) ? 1.0 / G : 1.0);
    return J;
}

// ---------------------------------------------------------------------------
// Mode-shaped initial conditions (real form of a normal mode at t = 0).
// ---------------------------------------------------------------------------

/// Real deviation fields of a normal mode: dx = Re(rho e^{-iwt}),
/// dy = +/- Im(rho e^{-iwt}), ex = Re(eps e^{-iwt}), ey = -/+ Im(...), upper
/// signs for Gamma+.  Returns the state at t = 0 about the spin-down rest
/// state, velocities included.
inline ClassicalState mode_initial_state(double K, const ModeSolution& mode) {
    const auto [rho, eps] = mode.eigenvector;
    const std::complex<double> minus_iw = std::complex<double>(0.0, -1.0) * mode.omega_n;
    const double sgn = (mode.symmetry == Symmetry::gamma_plus) ? 1.0 : -1.0;
    ClassicalState s;
    s.pos = {rho.real(), sgn * rho.imag()};
    const std::complex<double> drho = minus_iw * rho;
    s.vel = {drho.real(), sgn * drho.imag()};
    const double ex = eps.real();
    const double ey = -sgn * eps.imag();
    const double e2 = ex * ex + ey * ey;
    if (e2 >= 1.0) throw domain_error("mode_initial_state: amplitude too large for a tilt");
    s.spin = {ex, ey, -std::sqrt(1.0 - e2)};
    return s;
}

// ---------------------------------------------------------------------------
// Exponential envelope fit: least-squares slope of ln |signal| used for
// growth/decay-rate summaries.
// ---------------------------------------------------------------------------

struct RateFit {
    double rate = 0.0;     ///< d(ln A)/dt
    double residual = 0.0; ///< rms of the linear fit in ln-space
    bool valid = false;
};

inline RateFit fit_log_envelope(const std::vector<double>& t, const std::vector<double>& amp,
                                double t_min, double t_max) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size() && i < amp.size(); ++i) {
        if (t[i] < t_min || t[i] > t_max || !(amp[i] > 0.0)) continue;
        const double x = t[i], y = std::log(amp[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++n;
    }
    RateFit fit;
    if (n < 8) return fit;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.rate = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.rate * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < t.size() && i < amp.size(); ++i) {
        if (t[i] < t_min || t[i] > t_max || !(amp[i] > 0.0)) continue;
        const double r = std::log(amp[i]) - (intercept + fit.rate * t[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.valid = true;
    return fit;
}

} // namespace spintrap
