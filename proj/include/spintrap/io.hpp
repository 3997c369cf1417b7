#pragma once

// File formats: trajectory and sweep series as CSV, scalar reports as JSON.
// Every writer here has a matching reader so emitted artifacts round-trip
// through the library's own parsers.

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spintrap/dynamics.hpp"
#include "spintrap/errors.hpp"
#include "spintrap/modes.hpp"
#include "spintrap/quantum.hpp"

namespace spintrap {

inline constexpr const char* trajectory_csv_header = "t,x,y,vx,vy,nx,ny,nz,lambda,xi";
inline constexpr const char* sweep_csv_header = "K,re_w1,im_w1,re_w2,im_w2,re_w3,im_w3,stable";

namespace detail {
inline std::vector<double> split_csv_row(const std::string& line, std::size_t expected,
                                         const char* what) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw config_parse_error(std::string(what) + ": bad numeric cell `" + cell + "`");
        }
    }
    if (out.size() != expected)
        throw config_parse_error(std::string(what) + ": expected " + std::to_string(expected) +
                                 " columns, got " + std::to_string(out.size()));
    return out;
}
} // namespace detail

// --------------------------- trajectory CSV --------------------------------

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << trajectory_csv_header << '\n';
    os << std::setprecision(17);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& s = traj.states[i];
        os << traj.times[i] << ',' << s.pos[0] << ',' << s.pos[1] << ',' << s.vel[0] << ','
           << s.vel[1] << ',' << s.spin[0] << ',' << s.spin[1] << ',' << s.spin[2] << ','
           << traj.lambda_series[i] << ',' << traj.energy_series[i] << '\n';
    }
}

inline Trajectory read_trajectory_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != trajectory_csv_header)
        throw config_parse_error("trajectory CSV: bad header `" + line + "`");
    Trajectory traj;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto v = detail::split_csv_row(line, 10, "trajectory CSV");
        traj.times.push_back(v[0]);
        traj.states.push_back({{v[1], v[2]}, {v[3], v[4]}, {v[5], v[6], v[7]}});
        traj.lambda_series.push_back(v[8]);
        traj.energy_series.push_back(v[9]);
    }
    return traj;
}

// ----------------------------- sweep CSV ------------------------------------

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << sweep_csv_header << '\n';
    os << std::setprecision(17);
    for (const auto& row : rows) {
        os << row.K;
        for (const auto& m : row.modes)
            os << ',' << m.omega_n.real() << ',' << m.omega_n.imag();
        os << ',' << (row.stable ? 1 : 0) << '\n';
    }
}

/// Reads back the numeric content of a sweep CSV (frequencies and stability
/// flag; branch metadata is positional: vib+, vib-, precessional).
struct SweepCsvRow {
    double K;
    std::array<std::complex<double>, 3> omega_n;
    bool stable;
};

inline std::vector<SweepCsvRow> read_sweep_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != sweep_csv_header)
        throw config_parse_error("sweep CSV: bad header `" + line + "`");
    std::vector<SweepCsvRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto v = detail::split_csv_row(line, 8, "sweep CSV");
        SweepCsvRow row;
        row.K = v[0];
        for (int m = 0; m < 3; ++m) row.omega_n[m] = {v[1 + 2 * m], v[2 + 2 * m]};
        row.stable = v[7] != 0.0;
        rows.push_back(row);
    }
    return rows;
}

// ------------------------------- JSON ---------------------------------------

inline nlohmann::json to_json(const TrapConfig& cfg) {
    return {{"b0_gauss", cfg.b0_gauss},
            {"bperp_gauss_per_cm", cfg.bperp_gauss_per_cm},
            {"mu_erg_per_gauss", cfg.mu_erg_per_gauss},
            {"mass_gram", cfg.mass_gram},
            {"spin_erg_s", cfg.spin_erg_s},
            {"hbar_erg_s", cfg.hbar_erg_s}};
}

inline TrapConfig trap_config_from_json(const nlohmann::json& j) {
    TrapConfig cfg;
    cfg.b0_gauss = j.at("b0_gauss").get<double>();
    cfg.bperp_gauss_per_cm = j.at("bperp_gauss_per_cm").get<double>();
    cfg.mu_erg_per_gauss = j.at("mu_erg_per_gauss").get<double>();
    cfg.mass_gram = j.at("mass_gram").get<double>();
    cfg.spin_erg_s = j.at("spin_erg_s").get<double>();
    cfg.hbar_erg_s = j.value("hbar_erg_s", default_hbar_erg_s);
    return cfg;
}

inline nlohmann::json to_json(const LifetimeReport& rep) {
    nlohmann::json j{{"k", rep.adiabaticity},
                     {"t_vib_s", rep.t_vib_s},
                     {"log10_t_esc_closed", rep.log10_t_esc_closed_s},
                     {"log10_t_esc_composed", rep.log10_t_esc_composed_s},
                     {"t_esc_closed_s", rep.t_esc_closed_s},
                     {"t_esc_composed_s", rep.t_esc_composed_s},
                     {"ratio_log10", rep.ratio_log10},
                     {"matrix_element_closed", rep.matrix_element_closed_erg},
                     {"matrix_element_quadrature", rep.matrix_element_quadrature_erg},
                     {"log10_abs_matrix_element_closed", rep.log10_abs_matrix_element_closed},
                     {"dos_product", rep.dos_product_per_erg},
                     {"box_radius_scaled", rep.box_radius_scaled},
                     {"quadrature_evaluated", rep.quadrature_evaluated},
                     {"outside_validity", rep.outside_validity},
                     {"config", to_json(rep.config)}};
    return j;
}

inline LifetimeReport lifetime_report_from_json(const nlohmann::json& j) {
    LifetimeReport rep;
    rep.adiabaticity = j.at("k").get<double>();
    rep.t_vib_s = j.at("t_vib_s").get<double>();
    rep.log10_t_esc_closed_s = j.at("log10_t_esc_closed").get<double>();
    rep.log10_t_esc_composed_s = j.at("log10_t_esc_composed").get<double>();
    rep.t_esc_closed_s = j.at("t_esc_closed_s").is_null()
                             ? std::numeric_limits<double>::infinity()
                             : j.at("t_esc_closed_s").get<double>();
    rep.t_esc_composed_s = j.at("t_esc_composed_s").is_null()
                               ? std::numeric_limits<double>::infinity()
                               : j.at("t_esc_composed_s").get<double>();
    rep.ratio_log10 = j.at("ratio_log10").get<double>();
    rep.matrix_element_closed_erg = j.at("matrix_element_closed").get<double>();
    rep.matrix_element_quadrature_erg =
        j.at("matrix_element_quadrature").is_null()
            ? std::numeric_limits<double>::quiet_NaN()
            : j.at("matrix_element_quadrature").get<double>();
    rep.log10_abs_matrix_element_closed = j.at("log10_abs_matrix_element_closed").get<double>();
    rep.dos_product_per_erg = j.at("dos_product").get<double>();
    rep.box_radius_scaled = j.at("box_radius_scaled").get<double>();
    rep.quadrature_evaluated = j.at("quadrature_evaluated").get<bool>();
    rep.outside_validity = j.at("outside_validity").get<bool>();
    rep.config = trap_config_from_json(j.at("config"));
    return rep;
}

/// Summary emitted by the simulate command.
struct SimulationSummary {
    double lambda_drift_rel;  ///< max |Lambda(t)-Lambda(0)| / (|Lambda(0)|+1), scaled
    double energy_drift_rel;  ///< max |xi(t)-xi(0)| relative to mu B0
    double fitted_rate_scaled; ///< growth (+) / decay (-) rate of |rho|; NaN if not fit
    bool rate_fit_valid;
    bool accuracy_warning;
    double max_unit_drift;
};

inline SimulationSummary summarize(const Trajectory& traj, double fit_t_min = -1.0,
                                   double fit_t_max = -1.0) {
    SimulationSummary s{};
    if (traj.times.empty()) return s;
    const double lam0 = traj.lambda_series.front();
    const double xi0 = traj.energy_series.front();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        s.lambda_drift_rel = std::max(
            s.lambda_drift_rel, std::abs(traj.lambda_series[i] - lam0) / (std::abs(lam0) + 1.0));
        s.energy_drift_rel = std::max(s.energy_drift_rel, std::abs(traj.energy_series[i] - xi0));
    }
    if (fit_t_max < 0.0) fit_t_max = traj.times.back();
    if (fit_t_min < 0.0) fit_t_min = 0.2 * fit_t_max;
    std::vector<double> amp(traj.times.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const auto& st = traj.states[i];
        amp[i] = std::hypot(st.pos[0], st.pos[1]);
    }
    const auto fit = fit_log_envelope(traj.times, amp, fit_t_min, fit_t_max);
    s.rate_fit_valid = fit.valid;
    s.fitted_rate_scaled = fit.valid ? fit.rate : std::numeric_limits<double>::quiet_NaN();
    s.accuracy_warning = traj.accuracy_warning;
    s.max_unit_drift = traj.max_unit_drift;
    return s;
}

inline nlohmann::json to_json(const SimulationSummary& s) {
    return {{"lambda_drift_rel", s.lambda_drift_rel},
            {"energy_drift_rel", s.energy_drift_rel},
            {"fitted_rate_scaled", s.fitted_rate_scaled},
            {"rate_fit_valid", s.rate_fit_valid},
            {"accuracy_warning", s.accuracy_warning},
            {"max_unit_drift", s.max_unit_drift}};
}

} // namespace spintrap
