#pragma once

// Declarative run configuration: flat, sectioned key-value text. Parsing
// validates everything and reports all errors with their key paths; emit
// round-trips through parse.

#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kmv/constants.hpp"
#include "kmv/dynamics.hpp"
#include "kmv/experiments.hpp"
#include "kmv/potentials.hpp"

namespace kmv {

enum class ExperimentKind { constants, check, contract, drift, chaos };

struct RunConfig {
    ModelParams model;
    ConfiningKind confining = ConfiningKind::double_well;
    std::string table_path; // user_radial_table
    InteractionKind interaction = InteractionKind::zero;
    double coulomb_a = 1.0, coulomb_b = 1.0;
    int coulomb_k = 2;
    bool tilde_A_given = false;

    SimConfig sim;
    bool seed_given = false;

    ExperimentKind experiment = ExperimentKind::constants;

    // contract
    double ct_offset = 2.0;
    double ct_sigma_x = 0.5, ct_sigma_v = 0.5;
    double ct_window_frac = 0.5;
    std::vector<double> ct_xi_sweep_rel; // relative to R1; empty -> single default xi
    int ct_w_max_exact = 4096;

    // drift
    double dr_init_mean_x = 3.0, dr_init_mean_v = 0.0;
    double dr_sigma_x = 0.5, dr_sigma_v = 0.5;

    // chaos
    std::vector<int> ch_n_sweep{32, 128, 512, 2048};
    std::vector<double> ch_t_eval_rel{1, 2, 5, 10}; // units of 1/gamma
    int ch_pool = 2048;
    int ch_m_reference = 4096;
    double ch_sigma_x = 0.5, ch_sigma_v = 0.5;

    std::string output_dir = "out";

    ConfiningPotential make_confining() const {
        ConfiningPotential p;
        if (confining == ConfiningKind::user_radial_table)
            p = load_radial_table(table_path, model.lambda, model.A, model.d);
        else if (confining == ConfiningKind::quadratic)
            p = ConfiningPotential::quadratic_d(model.d, model.lambda, model.A);
        else
            p = ConfiningPotential::double_well_1d(model.lambda, model.A);
        p.dim = model.d;
        p.lambda = model.lambda;
        p.A = model.A;
        return p;
    }

    InteractionPotential make_interaction() const {
        switch (interaction) {
        case InteractionKind::zero:
            return InteractionPotential::none();
        case InteractionKind::harmonic_attract:
            return InteractionPotential::harmonic(model.L_W, true);
        case InteractionKind::harmonic_repulse:
            return InteractionPotential::harmonic(model.L_W, false);
        case InteractionKind::mollified_coulomb: {
            auto p = InteractionPotential::coulomb(coulomb_a, coulomb_b, coulomb_k, model.L_W);
            return p;
        }
        }
        return {};
    }
};

struct ParseResult {
    RunConfig cfg;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

namespace detail {

struct RawConfig {
    // section -> key -> value
    std::map<std::string, std::map<std::string, std::string>> kv;
    std::map<std::string, std::map<std::string, bool>> used;
};

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline bool parse_raw(const std::string& text, RawConfig& raw, std::vector<std::string>& errors) {
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
                continue;
            }
            section = trim(line.substr(1, line.size() - 2));
            raw.kv[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
            continue;
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (section.empty()) {
            errors.push_back("line " + std::to_string(lineno) + ": key outside any section");
            continue;
        }
        raw.kv[section][key] = val;
        raw.used[section][key] = false;
    }
    return errors.empty();
}

class Extract {
public:
    Extract(RawConfig& raw, std::vector<std::string>& errors) : raw_(raw), errors_(errors) {}

    bool has(const std::string& sec, const std::string& key) {
        auto s = raw_.kv.find(sec);
        return s != raw_.kv.end() && s->second.count(key);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& def) {
        if (!has(sec, key)) return def;
        raw_.used[sec][key] = true;
        return raw_.kv[sec][key];
    }

    double num(const std::string& sec, const std::string& key, double def, bool* given = nullptr) {
        if (!has(sec, key)) {
            if (given) *given = false;
            return def;
        }
        raw_.used[sec][key] = true;
        if (given) *given = true;
        try {
            return std::stod(raw_.kv[sec][key]);
        } catch (...) {
            errors_.push_back(sec + "." + key + ": not a number");
            return def;
        }
    }

    long integer(const std::string& sec, const std::string& key, long def, bool* given = nullptr) {
        if (!has(sec, key)) {
            if (given) *given = false;
            return def;
        }
        raw_.used[sec][key] = true;
        if (given) *given = true;
        try {
            return std::stol(raw_.kv[sec][key]);
        } catch (...) {
            errors_.push_back(sec + "." + key + ": not an integer");
            return def;
        }
    }

    std::uint64_t u64(const std::string& sec, const std::string& key, std::uint64_t def,
                      bool* given = nullptr) {
        if (!has(sec, key)) {
            if (given) *given = false;
            return def;
        }
        raw_.used[sec][key] = true;
        if (given) *given = true;
        try {
            return std::stoull(raw_.kv[sec][key]);
        } catch (...) {
            errors_.push_back(sec + "." + key + ": not an unsigned integer");
            return def;
        }
    }

    std::vector<double> num_list(const std::string& sec, const std::string& key,
                                 std::vector<double> def) {
        if (!has(sec, key)) return def;
        raw_.used[sec][key] = true;
        std::vector<double> out;
        std::istringstream ss(raw_.kv[sec][key]);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                errors_.push_back(sec + "." + key + ": bad list element '" + tok + "'");
            }
        }
        return out;
    }

    void flag_unknown() {
        for (auto& [sec, keys] : raw_.used)
            for (auto& [key, used] : keys)
                if (!used) errors_.push_back(sec + "." + key + ": unknown key");
    }

private:
    RawConfig& raw_;
    std::vector<std::string>& errors_;
};

} // namespace detail

inline ParseResult parse_config(const std::string& text) {
    ParseResult res;
    detail::RawConfig raw;
    detail::parse_raw(text, raw, res.errors);
    detail::Extract ex(raw, res.errors);
    RunConfig& c = res.cfg;

    c.model.lambda = ex.num("model", "lambda", c.model.lambda);
    c.model.A = ex.num("model", "A", c.model.A);
    c.model.tilde_A = ex.num("model", "tilde_A", c.model.tilde_A, &c.tilde_A_given);
    c.model.L_U = ex.num("model", "L_U", c.model.L_U);
    c.model.L_W = ex.num("model", "L_W", c.model.L_W);
    c.model.d = static_cast<int>(ex.integer("model", "d", c.model.d));
    c.model.a = ex.num("model", "a", c.model.a);
    c.model.C0 = ex.num("model", "C0", c.model.C0);
    c.model.grad_U0 = ex.num("model", "grad_U0", c.model.grad_U0);

    {
        std::string kind = ex.str("confining", "kind", "double_well");
        if (kind == "double_well")
            c.confining = ConfiningKind::double_well;
        else if (kind == "quadratic")
            c.confining = ConfiningKind::quadratic;
        else if (kind == "user_radial_table")
            c.confining = ConfiningKind::user_radial_table;
        else
            res.errors.push_back("confining.kind: unknown kind '" + kind + "'");
        c.table_path = ex.str("confining", "table_path", "");
        if (c.confining == ConfiningKind::user_radial_table && c.table_path.empty())
            res.errors.push_back("confining.table_path: required for user_radial_table");
    }
    {
        std::string kind = ex.str("interaction", "kind", "zero");
        if (kind == "zero")
            c.interaction = InteractionKind::zero;
        else if (kind == "harmonic_attract")
            c.interaction = InteractionKind::harmonic_attract;
        else if (kind == "harmonic_repulse")
            c.interaction = InteractionKind::harmonic_repulse;
        else if (kind == "mollified_coulomb")
            c.interaction = InteractionKind::mollified_coulomb;
        else
            res.errors.push_back("interaction.kind: unknown kind '" + kind + "'");
        c.coulomb_a = ex.num("interaction", "coulomb_a", c.coulomb_a);
        c.coulomb_b = ex.num("interaction", "coulomb_b", c.coulomb_b);
        c.coulomb_k = static_cast<int>(ex.integer("interaction", "coulomb_k", c.coulomb_k));
    }

    c.sim.dt = ex.num("sim", "dt", c.sim.dt);
    c.sim.t_final = ex.num("sim", "t_final", c.sim.t_final);
    c.sim.n_particles = static_cast<int>(ex.integer("sim", "n_particles", c.sim.n_particles));
    c.sim.n_replicas = static_cast<int>(ex.integer("sim", "n_replicas", c.sim.n_replicas));
    c.sim.xi = ex.num("sim", "xi", c.sim.xi);
    c.sim.seed = ex.u64("sim", "seed", 0, &c.seed_given);
    c.sim.record_every = static_cast<int>(ex.integer("sim", "record_every", c.sim.record_every));
    c.sim.threads = static_cast<int>(ex.integer("sim", "threads", c.sim.threads));

    {
        std::string kind = ex.str("experiment", "kind", "constants");
        if (kind == "constants")
            c.experiment = ExperimentKind::constants;
        else if (kind == "check")
            c.experiment = ExperimentKind::check;
        else if (kind == "contract")
            c.experiment = ExperimentKind::contract;
        else if (kind == "drift")
            c.experiment = ExperimentKind::drift;
        else if (kind == "chaos")
            c.experiment = ExperimentKind::chaos;
        else
            res.errors.push_back("experiment.kind: unknown kind '" + kind + "'");
    }

    c.ct_offset = ex.num("contract", "offset", c.ct_offset);
    c.ct_sigma_x = ex.num("contract", "sigma_x", c.ct_sigma_x);
    c.ct_sigma_v = ex.num("contract", "sigma_v", c.ct_sigma_v);
    c.ct_window_frac = ex.num("contract", "window_frac", c.ct_window_frac);
    c.ct_xi_sweep_rel = ex.num_list("contract", "xi_sweep_rel", c.ct_xi_sweep_rel);
    c.ct_w_max_exact = static_cast<int>(ex.integer("contract", "w_max_exact", c.ct_w_max_exact));

    c.dr_init_mean_x = ex.num("drift", "init_mean_x", c.dr_init_mean_x);
    c.dr_init_mean_v = ex.num("drift", "init_mean_v", c.dr_init_mean_v);
    c.dr_sigma_x = ex.num("drift", "sigma_x", c.dr_sigma_x);
    c.dr_sigma_v = ex.num("drift", "sigma_v", c.dr_sigma_v);

    {
        auto ns = ex.num_list("chaos", "n_sweep", {});
        if (!ns.empty()) {
            c.ch_n_sweep.clear();
            for (double v : ns) c.ch_n_sweep.push_back(static_cast<int>(v));
        }
        c.ch_t_eval_rel = ex.num_list("chaos", "t_eval_rel", c.ch_t_eval_rel);
        c.ch_pool = static_cast<int>(ex.integer("chaos", "pool", c.ch_pool));
        c.ch_m_reference = static_cast<int>(ex.integer("chaos", "m_reference", c.ch_m_reference));
        c.ch_sigma_x = ex.num("chaos", "sigma_x", c.ch_sigma_x);
        c.ch_sigma_v = ex.num("chaos", "sigma_v", c.ch_sigma_v);
    }

    c.output_dir = ex.str("output", "dir", c.output_dir);

    ex.flag_unknown();

    // cross-field validation with key paths
    if (!(c.model.lambda > 0)) res.errors.push_back("model.lambda: must be > 0");
    if (c.model.d < 1) res.errors.push_back("model.d: must be >= 1");
    if (c.model.d > 8) res.errors.push_back("model.d: at most 8 supported");
    if (!(c.model.L_U > 0)) res.errors.push_back("model.L_U: must be > 0");
    if (c.model.L_W < 0 || c.model.L_W >= c.model.lambda / 8)
        res.errors.push_back("model.L_W: interaction smallness requires L_W < lambda/8");
    if (!(c.model.a > 0)) res.errors.push_back("model.a: must be > 0");
    if (!(c.sim.dt > 0) || c.sim.dt > 0.01)
        res.errors.push_back("sim.dt: need 0 < dt <= 0.01");
    if (!(c.sim.t_final > 0)) res.errors.push_back("sim.t_final: must be > 0");
    else {
        double steps = c.sim.t_final / c.sim.dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
            res.errors.push_back("sim.t_final: t_final/dt must be integral");
    }
    if (c.sim.n_particles < 1) res.errors.push_back("sim.n_particles: must be >= 1");
    if (c.sim.n_replicas < 1) res.errors.push_back("sim.n_replicas: must be >= 1");
    if (c.sim.record_every < 1) res.errors.push_back("sim.record_every: must be >= 1");
    if (c.sim.threads < 1) res.errors.push_back("sim.threads: must be >= 1");
    if (c.sim.xi < 0) res.errors.push_back("sim.xi: must be >= 0 (0 selects the default)");
    for (int n : c.ch_n_sweep)
        if (n < 1) res.errors.push_back("chaos.n_sweep: entries must be >= 1");
    if (c.ch_pool < 2) res.errors.push_back("chaos.pool: must be >= 2");
    return res;
}

inline std::string emit_config(const RunConfig& c) {
    std::ostringstream o;
    auto d = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    o << "[model]\n";
    o << "lambda = " << d(c.model.lambda) << "\n";
    o << "A = " << d(c.model.A) << "\n";
    if (c.tilde_A_given) o << "tilde_A = " << d(c.model.tilde_A) << "\n";
    o << "L_U = " << d(c.model.L_U) << "\n";
    o << "L_W = " << d(c.model.L_W) << "\n";
    o << "d = " << c.model.d << "\n";
    o << "a = " << d(c.model.a) << "\n";
    o << "C0 = " << d(c.model.C0) << "\n";
    o << "grad_U0 = " << d(c.model.grad_U0) << "\n";
    o << "\n[confining]\n";
    o << "kind = "
      << (c.confining == ConfiningKind::double_well
              ? "double_well"
              : c.confining == ConfiningKind::quadratic ? "quadratic" : "user_radial_table")
      << "\n";
    if (!c.table_path.empty()) o << "table_path = " << c.table_path << "\n";
    o << "\n[interaction]\n";
    o << "kind = "
      << (c.interaction == InteractionKind::zero
              ? "zero"
              : c.interaction == InteractionKind::harmonic_attract
                    ? "harmonic_attract"
                    : c.interaction == InteractionKind::harmonic_repulse ? "harmonic_repulse"
                                                                         : "mollified_coulomb")
      << "\n";
    if (c.interaction == InteractionKind::mollified_coulomb) {
        o << "coulomb_a = " << d(c.coulomb_a) << "\n";
        o << "coulomb_b = " << d(c.coulomb_b) << "\n";
        o << "coulomb_k = " << c.coulomb_k << "\n";
    }
    o << "\n[sim]\n";
    o << "dt = " << d(c.sim.dt) << "\n";
    o << "t_final = " << d(c.sim.t_final) << "\n";
    o << "n_particles = " << c.sim.n_particles << "\n";
    o << "n_replicas = " << c.sim.n_replicas << "\n";
    o << "xi = " << d(c.sim.xi) << "\n";
    if (c.seed_given) o << "seed = " << c.sim.seed << "\n";
    o << "record_every = " << c.sim.record_every << "\n";
    o << "threads = " << c.sim.threads << "\n";
    o << "\n[experiment]\n";
    o << "kind = "
      << (c.experiment == ExperimentKind::constants
              ? "constants"
              : c.experiment == ExperimentKind::check
                    ? "check"
                    : c.experiment == ExperimentKind::contract
                          ? "contract"
                          : c.experiment == ExperimentKind::drift ? "drift" : "chaos")
      << "\n";
    o << "\n[contract]\n";
    o << "offset = " << d(c.ct_offset) << "\n";
    o << "sigma_x = " << d(c.ct_sigma_x) << "\n";
    o << "sigma_v = " << d(c.ct_sigma_v) << "\n";
    o << "window_frac = " << d(c.ct_window_frac) << "\n";
    if (!c.ct_xi_sweep_rel.empty()) {
        o << "xi_sweep_rel = ";
        for (std::size_t i = 0; i < c.ct_xi_sweep_rel.size(); ++i)
            o << (i ? "," : "") << d(c.ct_xi_sweep_rel[i]);
        o << "\n";
    }
    o << "w_max_exact = " << c.ct_w_max_exact << "\n";
    o << "\n[drift]\n";
    o << "init_mean_x = " << d(c.dr_init_mean_x) << "\n";
    o << "init_mean_v = " << d(c.dr_init_mean_v) << "\n";
    o << "sigma_x = " << d(c.dr_sigma_x) << "\n";
    o << "sigma_v = " << d(c.dr_sigma_v) << "\n";
    o << "\n[chaos]\n";
    o << "n_sweep = ";
    for (std::size_t i = 0; i < c.ch_n_sweep.size(); ++i)
        o << (i ? "," : "") << c.ch_n_sweep[i];
    o << "\n";
    o << "t_eval_rel = ";
    for (std::size_t i = 0; i < c.ch_t_eval_rel.size(); ++i)
        o << (i ? "," : "") << d(c.ch_t_eval_rel[i]);
    o << "\n";
    o << "pool = " << c.ch_pool << "\n";
    o << "m_reference = " << c.ch_m_reference << "\n";
    o << "sigma_x = " << d(c.ch_sigma_x) << "\n";
    o << "sigma_v = " << d(c.ch_sigma_v) << "\n";
    o << "\n[output]\n";
    o << "dir = " << c.output_dir << "\n";
    return o.str();
}

} // namespace kmv
