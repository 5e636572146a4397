#pragma once

// Runs a validated configuration end to end: derives constants, executes
// the requested experiment, writes CSV/JSON artifacts, and reduces the
// summary to an exit status. The exit status is a pure function of the
// emitted summary JSON.

#include <filesystem>
#include <iostream>

#include "kmv/checks.hpp"
#include "kmv/config.hpp"
#include "kmv/experiments.hpp"
#include "kmv/io.hpp"

namespace kmv {

inline int exit_from_summary(const nlohmann::json& summary) {
    return summary.value("pass", false) ? 0 : 1;
}

inline void print_ledger(std::ostream& os, const ConstraintLedger& led) {
    os << "constraint ledger (" << led.entries.size() << " entries)\n";
    os << "  " << std::left;
    char line[256];
    std::snprintf(line, sizeof line, "%-22s %14s %14s %10s %6s", "name", "log10(lhs)",
                  "log10(rhs)", "slack", "ok");
    os << line << "\n";
    for (const auto& e : led.entries) {
        std::snprintf(line, sizeof line, "%-22s %14.4g %14.4g %10.4g %6s", e.name.c_str(),
                      e.log10_lhs, e.log10_rhs, e.slack, e.satisfied ? "yes" : "NO");
        os << "  " << line << "\n";
    }
    os << "  all_pass = " << (led.all_pass ? "true" : "false") << ", min slack = " << led.min_slack
       << "\n";
}

inline void print_constants(std::ostream& os, const DerivedConstants& dc,
                            const ParticleConstants& pc) {
    auto lg = [](const LogReal& v) {
        if (v.is_zero()) return std::string("0");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g (log10 %.6g)", v.to_double(),
                      v.log_abs() / std::log(10.0) * (v.sign() < 0 ? 1 : 1));
        return std::string(v.sign() < 0 ? "-" : "") + buf;
    };
    char line[256];
    auto row = [&](const char* name, const std::string& val) {
        std::snprintf(line, sizeof line, "  %-12s %s", name, val.c_str());
        os << line << "\n";
    };
    os << "derived constants\n";
    row("gamma", std::to_string(dc.gamma));
    row("B", std::to_string(dc.B));
    row("alpha", std::to_string(dc.alpha));
    row("R0", std::to_string(dc.R0));
    row("R1", std::to_string(dc.R1));
    row("c", lg(dc.c));
    row("epsilon", lg(dc.epsilon));
    row("C_bold", lg(dc.C_bold));
    row("C1", lg(dc.C1));
    row("C2", lg(dc.C2));
    row("C_r", lg(dc.C_r));
    row("C_z", lg(dc.C_z));
    row("C_dH1", std::to_string(dc.C_dH1));
    row("C_dH2", std::to_string(dc.C_dH2));
    row("C_K", lg(dc.C_K));
    row("C_K0", lg(dc.C_K0));
    row("tau", lg(dc.tau));
    row("L_W_max", lg(dc.L_W_max));
    row("c_psi", lg(dc.c_psi));
    os << "particle-system constants\n";
    row("B_tilde", lg(pc.B_tilde));
    row("C_f1", std::to_string(pc.C_f1));
    row("C_f2", std::to_string(pc.C_f2));
    row("c_part", lg(pc.c_part));
    row("eps_part", lg(pc.epsilon_part));
    row("R0_part", lg(pc.R0_part));
    row("R1_part", lg(pc.R1_part));
    row("L_W_max_p", lg(pc.L_W_max_part));
}

inline nlohmann::json base_summary(const RunConfig& cfg, const char* experiment) {
    nlohmann::json j;
    j["schema_version"] = "v1";
    j["experiment"] = experiment;
    j["seed"] = cfg.sim.seed;
    j["config_echo"] = emit_config(cfg);
    return j;
}

inline int dispatch(RunConfig cfg, std::ostream& os = std::cout) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    ConfiningPotential pot_U = cfg.make_confining();
    InteractionPotential pot_W = cfg.make_interaction();

    // tilde_A from the verification grid when the config does not pin it
    if (!cfg.tilde_A_given) {
        auto rep = verify_confinement(pot_U);
        cfg.model.tilde_A = rep.tilde_A;
        if (!rep.pass) {
            os << "confinement check FAILED (margin " << rep.hyp_u_margin << " at |x|="
               << norm(rep.worst_point) << ")\n";
            nlohmann::json j = base_summary(cfg, "invalid");
            j["pass"] = false;
            j["error"] = "confining potential fails the drift inequality";
            write_json(cfg.output_dir + "/summary.json", j);
            return exit_from_summary(j);
        }
    }

    DerivedConstants dc = derive_base_constants(cfg.model);
    if (cfg.sim.xi <= 0) cfg.sim.xi = 1e-2 * dc.R1;

    switch (cfg.experiment) {
    case ExperimentKind::constants: {
        ParticleConstants pc = derive_particle_constants(cfg.model, dc);
        ConstraintLedger led = verify_constraint_ledger(cfg.model, dc);
        print_constants(os, dc, pc);
        print_ledger(os, led);
        nlohmann::json j = base_summary(cfg, "constants");
        j["derived"] = derived_constants_json(dc);
        j["particle"] = particle_constants_json(pc);
        j["ledger"] = ledger_json(led);
        j["pass"] = led.all_pass;
        write_json(cfg.output_dir + "/constants.json", j);
        write_json(cfg.output_dir + "/summary.json", j);
        os << (led.all_pass ? "PASS" : "FAIL") << "\n";
        return exit_from_summary(j);
    }
    case ExperimentKind::check: {
        auto results = run_invariant_battery(cfg.model, dc, pot_U, pot_W, cfg.sim.seed);
        bool all = true;
        nlohmann::json arr = nlohmann::json::array();
        char line[256];
        for (const auto& r : results) {
            all = all && r.pass;
            std::snprintf(line, sizeof line, "  %-24s %-4s worst=%.3g %s", r.name.c_str(),
                          r.pass ? "ok" : "FAIL", r.worst, r.detail.c_str());
            os << line << "\n";
            arr.push_back({{"name", r.name}, {"pass", r.pass}, {"worst", r.worst}});
        }
        nlohmann::json j = base_summary(cfg, "check");
        j["checks"] = arr;
        j["pass"] = all;
        write_json(cfg.output_dir + "/summary.json", j);
        os << (all ? "PASS" : "FAIL") << "\n";
        return exit_from_summary(j);
    }
    case ExperimentKind::contract: {
        InitSpec i1, i2;
        i1.mean_x = Vec(cfg.model.d, 0.0);
        i2.mean_x = Vec(cfg.model.d, 0.0);
        i1.mean_x[0] = -cfg.ct_offset / 2.0;
        i2.mean_x[0] = +cfg.ct_offset / 2.0;
        i1.mean_v = i2.mean_v = Vec(cfg.model.d, 0.0);
        i1.sigma_x = i2.sigma_x = cfg.ct_sigma_x;
        i1.sigma_v = i2.sigma_v = cfg.ct_sigma_v;
        ContractionOptions opt;
        opt.window_frac = cfg.ct_window_frac;
        opt.w_max_exact = cfg.ct_w_max_exact;

        std::vector<double> xis;
        if (cfg.ct_xi_sweep_rel.empty())
            xis.push_back(cfg.sim.xi);
        else
            for (double rel : cfg.ct_xi_sweep_rel) xis.push_back(rel * dc.R1);

        nlohmann::json j = base_summary(cfg, "contract");
        j["tau"] = dc.tau.to_double();
        j["tau_log10"] = dc.tau.is_zero() ? nullptr
                                          : nlohmann::json(dc.tau.log_abs() / std::log(10.0));
        nlohmann::json runs = nlohmann::json::array();
        bool pass = true;
        std::vector<double> rates;
        for (std::size_t k = 0; k < xis.size(); ++k) {
            SimConfig sc = cfg.sim;
            sc.xi = xis[k];
            auto res = run_contraction(cfg.model, dc, pot_U, pot_W, sc, i1, i2, opt);
            if (!res.ok) {
                os << "contract xi=" << xis[k] << " FAILED: " << res.error << "\n";
                runs.push_back({{"xi", xis[k]}, {"error", res.error}});
                pass = false;
                continue;
            }
            std::string csv = cfg.output_dir + "/contraction" +
                              (xis.size() > 1 ? "_xi" + std::to_string(k) : "") + ".csv";
            write_timeseries_csv(csv, res.ts,
                                 {"E_rho", "SE_rho", "W1", "W2", "E_H_1", "E_H_2"});
            bool rho_positive = true;
            for (double v : res.ts.col("E_rho")) rho_positive = rho_positive && v > 0;
            double tau_d = dc.tau.to_double();
            bool rate_ok = res.fit.rate >= tau_d - 2.0 * res.fit.rate_se;
            bool r2_ok = res.fit.r_squared >= 0.95;
            rates.push_back(res.fit.rate);
            runs.push_back({{"xi", xis[k]},
                            {"csv", csv},
                            {"rate", res.fit.rate},
                            {"rate_se", res.fit.rate_se},
                            {"r_squared", res.fit.r_squared},
                            {"rho_positive", rho_positive},
                            {"rate_ge_tau", rate_ok},
                            {"excluded", res.ts.excluded_count}});
            os << "contract xi=" << xis[k] << ": rate=" << res.fit.rate
               << " (se " << res.fit.rate_se << "), r2=" << res.fit.r_squared << "\n";
            pass = pass && rho_positive && rate_ok && r2_ok;
        }
        double spread = 0;
        if (rates.size() >= 2) {
            double lo = *std::min_element(rates.begin(), rates.end());
            double hi = *std::max_element(rates.begin(), rates.end());
            double mid = rates[rates.size() / 2];
            spread = (hi - lo) / std::abs(mid);
            pass = pass && spread < 0.2;
        }
        j["runs"] = runs;
        j["rate_spread"] = spread;
        j["pass"] = pass;
        write_json(cfg.output_dir + "/summary.json", j);
        os << (pass ? "PASS" : "FAIL") << "\n";
        return exit_from_summary(j);
    }
    case ExperimentKind::drift: {
        InitSpec init;
        init.mean_x = Vec(cfg.model.d, 0.0);
        init.mean_x[0] = cfg.dr_init_mean_x;
        init.mean_v = Vec(cfg.model.d, 0.0);
        init.mean_v[0] = cfg.dr_init_mean_v;
        init.sigma_x = cfg.dr_sigma_x;
        init.sigma_v = cfg.dr_sigma_v;
        auto res = run_lyapunov_drift(cfg.model, dc, pot_U, pot_W, cfg.sim, init);
        nlohmann::json j = base_summary(cfg, "drift");
        if (!res.ok) {
            j["pass"] = false;
            j["error"] = res.error;
            write_json(cfg.output_dir + "/summary.json", j);
            os << "drift FAILED: " << res.error << "\n";
            return exit_from_summary(j);
        }
        write_timeseries_csv(cfg.output_dir + "/drift.csv", res.ts,
                             {"E_H", "SE", "slope_est", "bound", "margin_SE"});
        j["drift_ok"] = res.drift_ok;
        j["terminal_ok"] = res.terminal_ok;
        j["min_margin_se"] = res.min_margin_se;
        j["B_over_gamma"] = dc.B / dc.gamma;
        j["excluded"] = res.ts.excluded_count;
        j["pass"] = res.drift_ok && res.terminal_ok;
        write_json(cfg.output_dir + "/summary.json", j);
        os << "drift: min margin " << res.min_margin_se << " SE, terminal "
           << (res.terminal_ok ? "ok" : "FAIL") << "\n";
        os << (j["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
        return exit_from_summary(j);
    }
    case ExperimentKind::chaos: {
        InitSpec init;
        init.mean_x = Vec(cfg.model.d, 0.0);
        init.mean_v = Vec(cfg.model.d, 0.0);
        init.sigma_x = cfg.ch_sigma_x;
        init.sigma_v = cfg.ch_sigma_v;
        std::vector<double> t_eval;
        for (double rel : cfg.ch_t_eval_rel) t_eval.push_back(rel / dc.gamma);
        // horizon covers the last evaluation time
        double t_max = *std::max_element(t_eval.begin(), t_eval.end());
        SimConfig sc = cfg.sim;
        sc.t_final = std::ceil(t_max / sc.dt) * sc.dt;
        ChaosOptions opt;
        opt.pool = cfg.ch_pool;
        opt.m_reference = cfg.ch_m_reference;
        auto res = run_chaos(cfg.model, dc, pot_U, pot_W, sc, init, cfg.ch_n_sweep, t_eval, opt);
        nlohmann::json j = base_summary(cfg, "chaos");
        if (!res.ok) {
            j["pass"] = false;
            j["error"] = res.error;
            write_json(cfg.output_dir + "/summary.json", j);
            os << "chaos FAILED: " << res.error << "\n";
            return exit_from_summary(j);
        }
        std::vector<std::vector<double>> rows;
        for (const auto& r : res.records)
            rows.push_back({static_cast<double>(r.N), r.t, r.w1, r.se, r.w1_sqrtN});
        write_csv(cfg.output_dir + "/chaos.csv", {"N", "t", "W1", "SE", "W1_sqrtN"}, rows);
        bool slope_ok = res.slope_w1 >= -0.75 && res.slope_w1 <= -0.25;
        bool uniform_ok = res.uniformity_ratio <= 0.5;
        j["slope_w1"] = res.slope_w1;
        j["uniformity_ratio"] = res.uniformity_ratio;
        j["pass"] = slope_ok && uniform_ok;
        write_json(cfg.output_dir + "/summary.json", j);
        os << "chaos: slope " << res.slope_w1 << ", uniformity ratio " << res.uniformity_ratio
           << "\n";
        os << (j["pass"].get<bool>() ? "PASS" : "FAIL") << "\n";
        return exit_from_summary(j);
    }
    }
    return 2;
}

} // namespace kmv
