#pragma once

// CSV and JSON emission. Doubles are printed with max_digits10 so reruns
// with the same seed reproduce files byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kmv/experiments.hpp"

namespace kmv {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(const std::string& path, const std::vector<std::string>& columns,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (std::size_t i = 0; i < columns.size(); ++i)
        out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << (i ? "," : "") << fmt_double(r[i]);
        out << "\n";
    }
}

// Writes the named columns of a time series (first column is t).
inline void write_timeseries_csv(const std::string& path, const TimeSeries& ts,
                                 const std::vector<std::string>& columns) {
    std::vector<std::vector<double>> rows;
    rows.reserve(ts.times.size());
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
        std::vector<double> r;
        r.push_back(ts.times[i]);
        for (const auto& c : columns) r.push_back(ts.col(c)[i]);
        rows.push_back(std::move(r));
    }
    std::vector<std::string> header{"t"};
    header.insert(header.end(), columns.begin(), columns.end());
    write_csv(path, header, rows);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

inline double saturate(const LogReal& v) { return v.to_double(); }

inline nlohmann::json log_real_json(const LogReal& v) {
    nlohmann::json j;
    j["value"] = v.to_double();
    j["sign"] = v.sign();
    j["log10"] = v.is_zero() ? nullptr : nlohmann::json(v.log_abs() / std::log(10.0));
    return j;
}

inline nlohmann::json derived_constants_json(const DerivedConstants& dc) {
    nlohmann::json j;
    j["gamma"] = dc.gamma;
    j["B"] = dc.B;
    j["alpha"] = dc.alpha;
    j["R0"] = dc.R0;
    j["R1"] = dc.R1;
    j["C_dH1"] = dc.C_dH1;
    j["C_dH2"] = dc.C_dH2;
    j["c"] = saturate(dc.c);
    j["epsilon"] = saturate(dc.epsilon);
    j["C_bold"] = saturate(dc.C_bold);
    j["C1"] = saturate(dc.C1);
    j["C2"] = saturate(dc.C2);
    j["C_r"] = saturate(dc.C_r);
    j["C_z"] = saturate(dc.C_z);
    j["C_K"] = saturate(dc.C_K);
    j["C_K0"] = saturate(dc.C_K0);
    j["tau"] = saturate(dc.tau);
    j["L_W_max"] = saturate(dc.L_W_max);
    j["c_psi"] = saturate(dc.c_psi);
    j["log10"] = {{"c", log_real_json(dc.c)["log10"]},
                  {"epsilon", log_real_json(dc.epsilon)["log10"]},
                  {"C_bold", log_real_json(dc.C_bold)["log10"]},
                  {"C1", log_real_json(dc.C1)["log10"]},
                  {"C2", log_real_json(dc.C2)["log10"]},
                  {"C_r", log_real_json(dc.C_r)["log10"]},
                  {"C_z", log_real_json(dc.C_z)["log10"]},
                  {"C_K", log_real_json(dc.C_K)["log10"]},
                  {"C_K0", log_real_json(dc.C_K0)["log10"]},
                  {"tau", log_real_json(dc.tau)["log10"]},
                  {"L_W_max", log_real_json(dc.L_W_max)["log10"]},
                  {"c_psi", log_real_json(dc.c_psi)["log10"]}};
    j["f_at_1"] = dc.f_at_1;
    j["f_at_R1"] = dc.f_at_R1;
    j["phi_coeff"] = dc.phi_coeff;
    return j;
}

inline nlohmann::json particle_constants_json(const ParticleConstants& pc) {
    nlohmann::json j;
    j["B_tilde"] = saturate(pc.B_tilde);
    j["C_f1"] = pc.C_f1;
    j["C_f2"] = pc.C_f2;
    j["c_part"] = saturate(pc.c_part);
    j["epsilon_part"] = saturate(pc.epsilon_part);
    j["R0_part"] = saturate(pc.R0_part);
    j["R1_part"] = saturate(pc.R1_part);
    j["L_W_max_part"] = saturate(pc.L_W_max_part);
    j["log10"] = {{"B_tilde", log_real_json(pc.B_tilde)["log10"]},
                  {"c_part", log_real_json(pc.c_part)["log10"]},
                  {"epsilon_part", log_real_json(pc.epsilon_part)["log10"]},
                  {"R0_part", log_real_json(pc.R0_part)["log10"]},
                  {"R1_part", log_real_json(pc.R1_part)["log10"]},
                  {"L_W_max_part", log_real_json(pc.L_W_max_part)["log10"]}};
    return j;
}

inline nlohmann::json ledger_json(const ConstraintLedger& led) {
    nlohmann::json j;
    j["all_pass"] = led.all_pass;
    j["min_slack"] = led.min_slack;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : led.entries) {
        entries.push_back({{"name", e.name},
                           {"lhs", e.lhs},
                           {"rhs", e.rhs},
                           {"log10_lhs", e.log10_lhs},
                           {"log10_rhs", e.log10_rhs},
                           {"satisfied", e.satisfied},
                           {"slack", e.slack}});
    }
    j["entries"] = entries;
    return j;
}

} // namespace kmv
