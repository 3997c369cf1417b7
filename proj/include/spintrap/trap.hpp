#pragma once

// Two-dimensional magnetic trap for a neutral spin-1/2 particle:
//   B(x, y) = Bperp * (x, -y, 0) + (0, 0, B0)
// The field magnitude has a nonzero minimum B0 at the origin; a particle with
// magnetic moment antiparallel to the local field sees the attractive
// adiabatic potential V = mu*|B|.  Everything downstream (classical dynamics,
// normal modes, quantum lifetime) depends on the single dimensionless
// adiabaticity parameter K = omega_vib / omega_prec once expressed in the
// scaled units defined here.
//
// Units are CGS-Gaussian throughout: gauss, erg, gram, second.

#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <sstream>
#include <string>

#include "spintrap/errors.hpp"

namespace spintrap {

/// Reduced Planck constant [erg s].  Configurable on TrapConfig so tests can
/// run in toy units.
inline constexpr double default_hbar_erg_s = 1.054571817e-27;

struct TrapConfig {
    double b0_gauss = 0.0;           ///< bias field B0 [gauss]
    double bperp_gauss_per_cm = 0.0; ///< transverse gradient B'perp [gauss/cm]
    double mu_erg_per_gauss = 0.0;   ///< magnetic moment mu [erg/gauss]
    double mass_gram = 0.0;          ///< particle mass m [gram]
    double spin_erg_s = 0.0;         ///< spin angular momentum S [erg s]
    double hbar_erg_s = default_hbar_erg_s;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw invalid_config_error(std::string("TrapConfig: ") + name +
                                           " must be positive and finite");
        };
        positive(b0_gauss, "b0_gauss");
        positive(bperp_gauss_per_cm, "bperp_gauss_per_cm");
        positive(mu_erg_per_gauss, "mu_erg_per_gauss");
        positive(mass_gram, "mass_gram");
        positive(spin_erg_s, "spin_erg_s");
        positive(hbar_erg_s, "hbar_erg_s");
    }

    /// Precession frequency at the trap center, mu*B0/S [rad/s].
    double omega_prec() const { return mu_erg_per_gauss * b0_gauss / spin_erg_s; }

    /// Small-amplitude vibration frequency in the adiabatic potential [rad/s].
    double omega_vib() const {
        return std::sqrt(bperp_gauss_per_cm * bperp_gauss_per_cm * mu_erg_per_gauss /
                         (mass_gram * b0_gauss));
    }

    /// Adiabaticity parameter K = sqrt(S^2 B'perp^2 / (mu m B0^3)).
    double adiabaticity() const {
        return std::sqrt(spin_erg_s * spin_erg_s * bperp_gauss_per_cm * bperp_gauss_per_cm /
                         (mu_erg_per_gauss * mass_gram * b0_gauss * b0_gauss * b0_gauss));
    }
};

struct Frequencies {
    double omega_prec_rad_s;
    double omega_vib_rad_s;
    double adiabaticity; ///< K, dimensionless
};

inline Frequencies derived_frequencies(const TrapConfig& cfg) {
    cfg.validate();
    return {cfg.omega_prec(), cfg.omega_vib(), cfg.adiabaticity()};
}

/// Natural units in which the dynamics depends on K alone.
struct ScaledUnits {
    double length_cm;  ///< B0 / B'perp
    double time_s;     ///< 1 / omega_vib
    double energy_erg; ///< mu * B0
};

inline ScaledUnits scaled_units(const TrapConfig& cfg) {
    cfg.validate();
    return {cfg.b0_gauss / cfg.bperp_gauss_per_cm, 1.0 / cfg.omega_vib(),
            cfg.mu_erg_per_gauss * cfg.b0_gauss};
}

/// Trap field at a point in the plane [gauss].
inline std::array<double, 3> field_at(const TrapConfig& cfg, double x_cm, double y_cm) {
    return {cfg.bperp_gauss_per_cm * x_cm, -cfg.bperp_gauss_per_cm * y_cm, cfg.b0_gauss};
}

/// Field magnitude and orientation on a ring of radius r.  theta is the tilt
/// from +z; the azimuthal field angle is phi_field = -phi (the trap field
/// counter-rotates against the position azimuth).
struct FieldPoint {
    double b_gauss;
    double theta_rad;
    double dtheta_dr_rad_per_cm;
    double d2theta_dr2_rad_per_cm2;
    double phi_field_rad;
};

inline FieldPoint field_polar(const TrapConfig& cfg, double r_cm, double phi_rad = 0.0) {
    cfg.validate();
    if (r_cm < 0.0) throw domain_error("field_polar: r must be >= 0");
    const double slope = cfg.bperp_gauss_per_cm / cfg.b0_gauss; // 1/cm
    const double u = slope * r_cm;
    const double one_u2 = 1.0 + u * u;
    FieldPoint fp;
    fp.b_gauss = cfg.b0_gauss * std::sqrt(one_u2);
    fp.theta_rad = std::atan(u);
    fp.dtheta_dr_rad_per_cm = slope / one_u2;
    fp.d2theta_dr2_rad_per_cm2 = -2.0 * slope * slope * u / (one_u2 * one_u2);
    fp.phi_field_rad = -phi_rad;
    return fp;
}

/// Adiabatic potential mu*|B(r)| and its harmonic expansion about the origin.
struct PotentialPair {
    double exact_erg;
    double harmonic_erg;
};

inline PotentialPair adiabatic_potential(const TrapConfig& cfg, double r_cm) {
    cfg.validate();
    if (r_cm < 0.0) throw domain_error("adiabatic_potential: r must be >= 0");
    const double u = cfg.bperp_gauss_per_cm * r_cm / cfg.b0_gauss;
    const double mu_b0 = cfg.mu_erg_per_gauss * cfg.b0_gauss;
    return {mu_b0 * std::sqrt(1.0 + u * u), mu_b0 * (1.0 + 0.5 * u * u)};
}

// ---------------------------------------------------------------------------
// Presets: order-of-magnitude neutron and alkali-atom parameters in the
// reference trap field B0 = 100 G, B0/B'perp = 10 cm.
// ---------------------------------------------------------------------------

inline TrapConfig neutron_preset() {
    TrapConfig cfg;
    cfg.b0_gauss = 100.0;
    cfg.bperp_gauss_per_cm = 10.0;
    cfg.mu_erg_per_gauss = 1e-23;
    cfg.mass_gram = 1e-25;
    cfg.spin_erg_s = 0.5 * default_hbar_erg_s;
    return cfg;
}

inline TrapConfig atom_preset() {
    TrapConfig cfg;
    cfg.b0_gauss = 100.0;
    cfg.bperp_gauss_per_cm = 10.0;
    cfg.mu_erg_per_gauss = 1e-20;
    cfg.mass_gram = 1e-22;
    cfg.spin_erg_s = 0.5 * default_hbar_erg_s;
    return cfg;
}

// ---------------------------------------------------------------------------
// Config-file ingestion: flat key/value text, `key = value` or `key value`,
// '#' comments.  Keys: b0_gauss, bperp_gauss_per_cm, mu_erg_per_gauss,
// mass_gram, and either spin_erg_s or spin_half=true.
// ---------------------------------------------------------------------------

inline TrapConfig parse_config(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        for (char& c : line)
            if (c == '=') c = ' ';
        std::istringstream ls(line);
        std::string key, value, extra;
        if (!(ls >> key)) continue; // blank line
        if (!(ls >> value) || (ls >> extra))
            throw config_parse_error("config line " + std::to_string(lineno) +
                                     ": expected `key value`, got: " + line);
        kv[key] = value;
    }

    TrapConfig cfg;
    bool spin_half = false;
    auto take = [&](const std::string& key, double& dst) {
        auto it = kv.find(key);
        if (it == kv.end()) throw config_parse_error("config: missing key `" + key + "`");
        try {
            std::size_t used = 0;
            dst = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw config_parse_error("config: invalid value for key `" + key +
                                     "`: " + it->second);
        }
        kv.erase(it);
    };
    take("b0_gauss", cfg.b0_gauss);
    take("bperp_gauss_per_cm", cfg.bperp_gauss_per_cm);
    take("mu_erg_per_gauss", cfg.mu_erg_per_gauss);
    take("mass_gram", cfg.mass_gram);
    if (auto it = kv.find("spin_half"); it != kv.end()) {
        spin_half = (it->second == "true" || it->second == "1");
        if (!spin_half && it->second != "false" && it->second != "0")
            throw config_parse_error("config: invalid value for key `spin_half`: " + it->second);
        kv.erase(it);
    }
    if (auto it = kv.find("hbar_erg_s"); it != kv.end()) {
        take("hbar_erg_s", cfg.hbar_erg_s);
    }
    if (spin_half) {
        if (kv.count("spin_erg_s"))
            throw config_parse_error("config: give either spin_erg_s or spin_half, not both");
        cfg.spin_erg_s = 0.5 * cfg.hbar_erg_s;
    } else {
        take("spin_erg_s", cfg.spin_erg_s);
    }
    if (!kv.empty()) throw config_parse_error("config: unknown key `" + kv.begin()->first + "`");
    cfg.validate();
    return cfg;
}

inline TrapConfig parse_config_string(const std::string& text) {
    std::istringstream ss(text);
    return parse_config(ss);
}

} // namespace spintrap
