// Command-line front end: thin dispatch over the spintrap library.
// Exit codes: 0 success, 1 check/physics failure, 2 I/O or usage error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spintrap/spintrap.hpp"

namespace {

using namespace spintrap;

TrapConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_parse_error("cannot open config file: " + path);
    return parse_config(in);
}

/// Reference trap (B0 = 100 G, B0/B'perp = 10 cm, mu = 1e-23 erg/G,
/// S = hbar/2) with the mass solved so the adiabaticity comes out at K.
TrapConfig config_for_k_with_units(double K) {
    if (!(K > 0.0)) throw domain_error("--k-with-units must be > 0");
    TrapConfig cfg = neutron_preset();
    cfg.mass_gram = cfg.spin_erg_s * cfg.spin_erg_s * cfg.bperp_gauss_per_cm *
                    cfg.bperp_gauss_per_cm /
                    (cfg.mu_erg_per_gauss * K * K * std::pow(cfg.b0_gauss, 3));
    return cfg;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot open output file: " + path);
    return out;
}

int cmd_modes(double k_min, double k_max, int steps, const std::string& out_path) {
    auto rows = sweep(k_min, k_max, steps);
    auto out = open_output(out_path);
    write_sweep_csv(out, rows);
    if (!out) throw std::ios_base::failure("write failed: " + out_path);
    const auto loc = locate_gamma_minus_double_root();
    std::printf("K_c (closed form sqrt(4/27))  = %.12f\n", critical_adiabaticity());
    std::printf("double root located at K      = %.12f\n", loc.K);
    std::printf("merge frequency (omega_vib)   = %.12f  [sqrt(3) = %.12f]\n",
                loc.merge_frequency, std::sqrt(3.0));
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return 0;
}

int cmd_simulate(const std::optional<std::string>& config_path, std::optional<double> k_opt,
                 double kick, const std::string& kick_mode, double t_final,
                 std::optional<double> dt_opt, double rt, double rp,
                 const std::string& out_path, const std::optional<std::string>& summary_path,
                 std::size_t stride) {
    double K;
    if (config_path) {
        K = load_config_file(*config_path).adiabaticity();
    } else {
        if (!(*k_opt > 0.0)) throw domain_error("--k must be > 0");
        K = *k_opt;
    }
    double dt = dt_opt.value_or(default_dt_scaled());
    if (!dt_opt && K < 0.005)
        throw domain_error("K < 0.005: the default dt does not resolve the precession; "
                           "pass --dt explicitly");

    ClassicalState state0; // spin-down rest state
    if (kick_mode == "position") {
        state0.pos[0] = kick;
    } else {
        Branch want = Branch::vibrational_plus;
        if (kick_mode == "vibrational_minus") want = Branch::vibrational_minus;
        else if (kick_mode == "precessional") want = Branch::precessional;
        else if (kick_mode != "vibrational_plus")
            throw domain_error("unknown --kick-mode: " + kick_mode);
        for (const auto& m : spin_down_modes(K, kick))
            if (m.branch == want) state0 = mode_initial_state(K, m);
    }

    auto traj = integrate_scaled(state0, K, {rt, rp}, dt, t_final, stride);
    {
        auto out = open_output(out_path);
        write_trajectory_csv(out, traj);
        if (!out) throw std::ios_base::failure("write failed: " + out_path);
    }
    auto summary = summarize(traj);
    auto j = to_json(summary);
    j["k"] = K;
    j["dt_scaled"] = dt;
    j["t_final_scaled"] = t_final;
    if (summary_path) {
        auto out = open_output(*summary_path);
        out << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_lifetime(const std::optional<std::string>& config_path, std::optional<double> k_units,
                 const std::optional<std::string>& json_path) {
    TrapConfig cfg = config_path ? load_config_file(*config_path)
                                 : config_for_k_with_units(*k_units);
    auto rep = lifetime(cfg);
    auto j = to_json(rep);
    if (json_path) {
        auto out = open_output(*json_path);
        out << j.dump(2) << '\n';
    } else {
        std::cout << j.dump(2) << '\n';
    }
    return 0;
}

std::string mag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "~10^%+d", (int)std::lround(std::log10(v)));
    return buf;
}

int cmd_table() {
    struct Row { const char* name; TrapConfig cfg; };
    const Row rows[] = {{"neutron", neutron_preset()}, {"atom", atom_preset()}};
    std::printf("%-22s %14s %14s\n", "", "neutron", "atom");
    std::printf("%-22s %14s %14s\n", "m [g]", mag(rows[0].cfg.mass_gram).c_str(),
                mag(rows[1].cfg.mass_gram).c_str());
    std::printf("%-22s %14s %14s\n", "mu [erg/G]", mag(rows[0].cfg.mu_erg_per_gauss).c_str(),
                mag(rows[1].cfg.mu_erg_per_gauss).c_str());
    std::string k[2], tp[2], tv[2], te[2];
    for (int i = 0; i < 2; ++i) {
        const auto freq = derived_frequencies(rows[i].cfg);
        const auto rep = lifetime(rows[i].cfg);
        k[i] = mag(freq.adiabaticity);
        tp[i] = mag(2.0 * M_PI / freq.omega_prec_rad_s);
        tv[i] = mag(2.0 * M_PI / freq.omega_vib_rad_s);
        char buf[48];
        std::snprintf(buf, sizeof buf, "~10^(%.2g)", rep.log10_t_esc_closed_s);
        te[i] = buf;
    }
    std::printf("%-22s %14s %14s\n", "K", k[0].c_str(), k[1].c_str());
    std::printf("%-22s %14s %14s\n", "T_prec [s]", tp[0].c_str(), tp[1].c_str());
    std::printf("%-22s %14s %14s\n", "T_vib [s]", tv[0].c_str(), tv[1].c_str());
    std::printf("%-22s %14s %14s\n", "T_esc [s]", te[0].c_str(), te[1].c_str());
    std::printf("(field: B0 = 100 G, B0/B'perp = 10 cm; values order-of-magnitude)\n");
    return 0;
}

int cmd_check(const std::string& inject_fault) {
    int failures = 0;
    auto report = [&](const char* name, bool ok, const std::string& detail) {
        std::printf("[%s] %-18s %s\n", ok ? " ok " : "FAIL", name, detail.c_str());
        if (!ok) ++failures;
    };

    {   // Vieta: sum = -c2/c3, product = -c0/c3 for the secular cubics
        double worst = 0.0;
        for (double K : {1e-3, 0.05, 0.2, critical_adiabaticity(), 0.7, 3.0}) {
            for (auto sym : {Symmetry::gamma_plus, Symmetry::gamma_minus}) {
                for (auto orient : {Orientation::spin_down, Orientation::spin_up}) {
                    const auto c = secular_cubic(K, sym, orient);
                    const auto r = secular_roots(K, sym, orient);
                    std::complex<double> sum = r[0] + r[1] + r[2];
                    std::complex<double> prod = r[0] * r[1] * r[2];
                    const double fault = (inject_fault == "vieta") ? 1e-6 : 0.0;
                    worst = std::max(worst, std::abs(sum - (-c[2] / c[3] + fault)) /
                                                std::max(1.0, std::abs(sum)));
                    worst = std::max(worst,
                                     std::abs(prod - (-c[0] / c[3])) / std::max(1.0, std::abs(prod)));
                }
            }
        }
        report("vieta", worst < 1e-12, "worst relative defect " + std::to_string(worst));
    }
    {   // critical K: locator vs sqrt(4/27), merge frequency vs sqrt(3)
        auto loc = locate_gamma_minus_double_root();
        double fault = (inject_fault == "critical_k") ? 1e-6 : 0.0;
        const double dk = std::abs(loc.K - critical_adiabaticity() + fault);
        const double dw = std::abs(loc.merge_frequency - std::sqrt(3.0));
        report("critical_k", dk < 1e-10 && dw < 1e-10,
               "dK " + std::to_string(dk) + ", dOmega " + std::to_string(dw));
    }
    {   // Gaussian-Bessel identity (three pairs)
        double worst = 0.0;
        const double pairs[3][2] = {{1.0, 1.0}, {2.0, 5.0}, {0.5, 10.0}};
        for (const auto& ab : pairs) {
            const quad_real a = ab[0], b = ab[1];
            auto f = [&](quad_real r) {
                return r * r * bessel_j(1, b * r) * ::expq(-a * r * r);
            };
            auto res = integrate_gauss_bessel<quad_real>(f, a, b, quad_real(1e-12));
            const quad_real closed = b / (4 * a * a) * ::expq(-b * b / (4 * a));
            double rel = static_cast<double>(fl::abs(res.value - closed) / closed);
            if (inject_fault == "bessel_identity") rel += 1e-6;
            worst = std::max(worst, rel);
        }
        report("bessel_identity", worst < 1e-8, "worst relative error " + std::to_string(worst));
    }
    {   // DOS R-cancellation: C^2 rho equals m/(2 pi hbar^2) at two radii
        const auto cfg = neutron_preset();
        const double expect = dos_product(cfg);
        double worst = 0.0;
        for (double r_scaled : {0.07, 0.095}) {
            const double R = r_scaled * cfg.b0_gauss / cfg.bperp_gauss_per_cm;
            const auto cs = continuum_state(cfg, R);
            double got = cs.normalization_cm * cs.normalization_cm * density_of_states(cfg, R);
            if (inject_fault == "dos_r_cancellation") got *= 1.0 + 1e-6;
            worst = std::max(worst, std::abs(got - expect) / expect);
        }
        report("dos_r_cancellation", worst < 1e-12,
               "worst relative defect " + std::to_string(worst));
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D magnetic trap for a neutral spin-1/2 particle: normal modes, "
                 "nonlinear spin-translation dynamics, and the quantum escape lifetime"};
    app.require_subcommand(1);

    auto* modes = app.add_subcommand("modes", "spin-down mode spectrum over a K range (CSV)");
    double k_min = 0.01, k_max = 0.6;
    int steps = 600;
    std::string modes_out;
    modes->add_option("--k-min", k_min, "lower adiabaticity bound")->capture_default_str();
    modes->add_option("--k-max", k_max, "upper adiabaticity bound")->capture_default_str();
    modes->add_option("--steps", steps, "grid points")->capture_default_str();
    modes->add_option("--out", modes_out, "output CSV path")->required();

    auto* sim = app.add_subcommand("simulate", "integrate the nonlinear dynamics (CSV + JSON)");
    std::optional<std::string> sim_config;
    std::optional<double> sim_k, sim_dt;
    double kick = 1e-3, t_final = 200.0 * M_PI, rt = 0.0, rp = 0.0;
    std::string kick_mode = "position", sim_out;
    std::optional<std::string> summary_path;
    std::size_t stride = 10;
    auto* oc = sim->add_option("--config", sim_config, "physical config file");
    auto* ok = sim->add_option("--k", sim_k, "scaled run at this adiabaticity");
    oc->excludes(ok);
    ok->excludes(oc);
    sim->add_option("--kick", kick, "kick amplitude (scaled)")->capture_default_str();
    sim->add_option("--kick-mode", kick_mode,
                    "position|vibrational_plus|vibrational_minus|precessional")
        ->capture_default_str();
    sim->add_option("--t-final", t_final, "integration time (scaled)")->capture_default_str();
    sim->add_option("--dt", sim_dt, "step (scaled); default 2pi/1000");
    sim->add_option("--rt", rt, "translational friction group r_t/(m omega_vib)")
        ->capture_default_str();
    sim->add_option("--rp", rp, "precessional friction group r_p/S")->capture_default_str();
    sim->add_option("--out", sim_out, "trajectory CSV path")->required();
    sim->add_option("--summary", summary_path, "summary JSON path (default: stdout)");
    sim->add_option("--stride", stride, "record every n-th step")->capture_default_str();

    auto* life = app.add_subcommand("lifetime", "golden-rule escape-lifetime report (JSON)");
    std::optional<std::string> life_config, life_json;
    std::optional<double> k_units;
    auto* lc = life->add_option("--config", life_config, "physical config file");
    auto* lk = life->add_option("--k-with-units", k_units,
                                "adiabaticity in the reference trap (mass solved from K)");
    lc->excludes(lk);
    lk->excludes(lc);
    life->add_option("--json", life_json, "output JSON path (default: stdout)");

    app.add_subcommand("table", "order-of-magnitude summary for the neutron/atom presets");

    auto* check = app.add_subcommand("check", "fast built-in self tests");
    std::string inject_fault;
    check->add_option("--inject-fault", inject_fault,
                      "perturb a named check (vieta|critical_k|bessel_identity|"
                      "dos_r_cancellation) to exercise the failure path")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand("modes")) return cmd_modes(k_min, k_max, steps, modes_out);
        if (app.got_subcommand("simulate")) {
            if (!sim_config && !sim_k)
                throw domain_error("simulate: exactly one of --config or --k is required");
            return cmd_simulate(sim_config, sim_k, kick, kick_mode, t_final, sim_dt, rt, rp,
                                sim_out, summary_path, stride);
        }
        if (app.got_subcommand("lifetime")) {
            if (!life_config && !k_units)
                throw domain_error("lifetime: exactly one of --config or --k-with-units is "
                                   "required");
            return cmd_lifetime(life_config, k_units, life_json);
        }
        if (app.got_subcommand("table")) return cmd_table();
        if (app.got_subcommand("check")) return cmd_check(inject_fault);
    } catch (const numerical_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
