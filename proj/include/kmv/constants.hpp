#pragma once

// Every explicit constant of the contraction and propagation-of-chaos
// machinery, plus the mechanical verification of the inequality ledger the
// proofs rely on. Many of these constants contain exp(-k R1^2) factors with
// k R1^2 ~ 1e5..1e9; they are computed and compared as LogReal values.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmv/gauss_profile.hpp"
#include "kmv/log_real.hpp"
#include "kmv/quadrature.hpp"

namespace kmv {

struct ModelParams {
    double lambda = 0.5;
    double A = 0.75;
    double tilde_A = 0.0;
    double L_U = 2.0;
    double L_W = 0.0;
    int d = 1;
    double a = 0.1;       // exponential moment scale
    double C0 = 50.0;     // bound on the initial expectation of H-tilde
    double grad_U0 = 0.0; // |grad U(0)|; zero for every built-in potential

    void validate() const {
        if (!(lambda > 0)) throw std::invalid_argument("ModelParams: lambda must be > 0");
        if (d < 1) throw std::invalid_argument("ModelParams: d must be >= 1");
        if (!(L_U > 0)) throw std::invalid_argument("ModelParams: L_U must be > 0");
        if (A < 0 || tilde_A < 0 || C0 < 0 || grad_U0 < 0)
            throw std::invalid_argument("ModelParams: negative constant");
        if (L_W < 0 || L_W >= lambda / 8)
            throw std::invalid_argument("ModelParams: interaction requires L_W < lambda/8");
    }
};

struct DerivedConstants {
    // moderate scale
    double gamma = 0, B = 0, alpha = 0, R0 = 0, R1 = 0;
    double C_dH1 = 0, C_dH2 = 0;
    // log scale
    LogReal c, epsilon, C_bold;
    LogReal C1, C2, C_r, C_z;
    LogReal C_K, C_K0;
    LogReal tau;     // c - L_W * C_K
    LogReal L_W_max; // c / C_K at the worst admissible L_W, capped at lambda/8
    LogReal c_psi;
    // distance-profile ingredients at the model's L_W
    double phi_coeff = 0; // (L_U+L_W)/alpha + alpha + 96 eps max(1/(2 alpha),1)
    double f_at_1 = 0, f_at_R1 = 0;
    double log_phi_R1 = 0, log_g_R1 = 0, log_I_R1 = 0;
};

struct ParticleConstants {
    LogReal B_tilde;
    double C_f1 = 0, C_f2 = 0;
    LogReal c_part, epsilon_part;
    LogReal R0_part, R1_part;
    double phi_coeff_part = 0;
    double f1_part = 0;
    LogReal C1_part, C_z_part;
    LogReal L_W_max_part;
};

struct LedgerEntry {
    std::string name;
    double lhs = 0, rhs = 0;           // saturating doubles
    double log10_lhs = 0, log10_rhs = 0;
    bool satisfied = false;
    double slack = 0; // decades for inequalities, (tol-res)/tol for residuals
    bool residual_kind = false;
};

struct ConstraintLedger {
    std::vector<LedgerEntry> entries;
    bool all_pass = false;
    double min_slack = 0;

    const LedgerEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

namespace detail {

// everything that depends on the interaction Lipschitz bound, evaluated at lw
struct BaseCore {
    LogReal c, epsilon, C_bold, C1, C2, C_r, C_z, C_K;
    double phi_coeff = 0, f1 = 0, fR1 = 0;
    double log_phi_R1 = 0, log_g_R1 = 0, log_I_R1 = 0;
};

// g(s) = 1 - pref * I(s); pref is log-tiny by construction, so g is 1 to
// double precision, but the evaluation keeps the exact structure.
inline double g_value(const GaussBump& gp, const LogReal& pref, double s) {
    if (pref.is_zero() || s <= 0) return 1.0;
    double lg = pref.log() + gp.log_I(s);
    if (lg >= 0) return 0.0; // profile would be invalid; ledger flags it
    return -std::expm1(lg);
}

// f(s) = int_0^min(s,R1) phi g, adaptive Simpson with g interpolated from a
// coarse log-I table (I is smooth and monotone).
inline double f_value(const GaussBump& gp, const LogReal& pref, double R1, double s) {
    double b = std::min(s, R1);
    if (b <= 0) return 0.0;
    constexpr int n = 64;
    double gv[n + 1];
    for (int i = 0; i <= n; ++i) gv[i] = g_value(gp, pref, b * i / n);
    auto integrand = [&](double u) {
        double t = u / b * n;
        int i = std::min(static_cast<int>(t), n - 1);
        double w = t - i;
        return gp.phi(u) * ((1 - w) * gv[i] + w * gv[i + 1]);
    };
    return integrate(integrand, 0.0, b, 1e-13);
}

inline BaseCore base_core_at_lw(const ModelParams& p, double gamma, double B, double alpha,
                                double R1, double lw) {
    BaseCore core;
    const double L = p.L_U + lw;
    const double maxhalf = std::max(1.0 / (2 * alpha), 1.0);
    const double m1 = 0.5 - L / (2 * alpha);
    const double m2 = 2.0 * std::sqrt(L / (2 * M_PI * alpha));
    if (!(m1 > 0)) throw std::domain_error("constants: L_U + L_W must stay below alpha");
    const double coef_c = L / alpha + alpha + 96.0 * maxhalf;
    const double log_c3 = std::log(std::min(m1, m2) / 7.0) - coef_c / 8.0 * R1 * R1;
    core.c = min(min(lr(gamma / 36.0), lr(B / 3.0)), LogReal::from_log(log_c3));
    core.epsilon = lr(3.0) * core.c / lr(B);
    core.C_bold = core.c + lr(2.0 * B) * core.epsilon;

    core.phi_coeff = L / alpha + alpha + 96.0 * maxhalf * core.epsilon.to_double();
    GaussBump gp{core.phi_coeff / 8.0};
    LogReal pref = core.C_bold / lr(4.0);

    core.log_I_R1 = gp.log_I(R1);
    core.log_phi_R1 = gp.log_phi(R1);
    {
        LogReal deficit = pref * LogReal::from_log(core.log_I_R1);
        double ld = deficit.is_zero() ? -std::numeric_limits<double>::infinity() : deficit.log();
        core.log_g_R1 = ld >= 0 ? -std::numeric_limits<double>::infinity()
                                : std::log1p(-std::exp(ld));
    }
    core.f1 = f_value(gp, pref, R1, 1.0);
    core.fR1 = f_value(gp, pref, R1, R1);

    const double kap = (1 + alpha) * (1 + alpha) + alpha * alpha;
    const double min23 = std::min(2.0 * p.lambda / 3.0, 6.0);
    const double min13 = std::min(p.lambda / 3.0, 3.0);
    LogReal inv_fpR1 = LogReal::from_log(-(core.log_phi_R1 + core.log_g_R1));
    core.C_r = max(lr(4.0 * kap / (min23 * core.f1)) / core.epsilon, inv_fpR1);
    core.C1 = lr(std::max(2.0 / alpha, 1.0)) * core.C_r;
    core.C2 = lr(3.0 / (1 + alpha * alpha)) * core.C_r;
    core.C_z = max(lr(1.0 / alpha) * inv_fpR1,
                   lr(std::sqrt(2.0 * kap / min13) / (alpha * core.f1)) / core.epsilon);
    core.C_K = core.C1 * (LogReal::one() + lr(2.0 * B / gamma) * core.epsilon) +
               lr(2.0 * B * (6 + 8 * p.lambda) / (gamma * p.lambda)) * core.epsilon;
    return core;
}

} // namespace detail

inline DerivedConstants derive_base_constants(const ModelParams& p) {
    p.validate();
    DerivedConstants dc;
    dc.gamma = p.lambda / (2.0 * (p.lambda + 1.0));
    dc.B = 24.0 * (p.A + (p.lambda - dc.gamma) * p.tilde_A + p.d);
    dc.alpha = p.L_U + p.lambda / 4.0;
    const double min13 = std::min(3.0, p.lambda / 3.0);
    dc.R0 = std::sqrt(24.0 * dc.B / (5.0 * dc.gamma * min13));
    const double kap = (1 + dc.alpha) * (1 + dc.alpha) + dc.alpha * dc.alpha;
    dc.R1 = std::sqrt(kap) * dc.R0;

    dc.C_dH1 = 24.0 * p.grad_U0 / dc.alpha;
    dc.C_dH2 = 24.0 * p.L_U / (dc.alpha * std::sqrt(p.lambda)) +
               (6.0 * (1 - dc.gamma) + p.lambda - 3.0) / (dc.alpha * std::sqrt(p.lambda)) +
               2.0 * std::sqrt(3.0) * std::max(1.0, 1.0 / (2 * dc.alpha));

    auto core = detail::base_core_at_lw(p, dc.gamma, dc.B, dc.alpha, dc.R1, p.L_W);
    dc.c = core.c;
    dc.epsilon = core.epsilon;
    dc.C_bold = core.C_bold;
    dc.C1 = core.C1;
    dc.C2 = core.C2;
    dc.C_r = core.C_r;
    dc.C_z = core.C_z;
    dc.C_K = core.C_K;
    dc.C_K0 = core.epsilon * (core.C1 + lr((6 + 8 * p.lambda) / p.lambda)) * lr(2.0 * p.C0);
    dc.phi_coeff = core.phi_coeff;
    dc.f_at_1 = core.f1;
    dc.f_at_R1 = core.fR1;
    dc.log_phi_R1 = core.log_phi_R1;
    dc.log_g_R1 = core.log_g_R1;
    dc.log_I_R1 = core.log_I_R1;
    dc.tau = dc.c - lr(p.L_W) * dc.C_K;

    // c and C_1 admit bounds independent of L_W under L_W < lambda/8; the
    // admissible bound is the worst case over that range.
    auto worst = detail::base_core_at_lw(p, dc.gamma, dc.B, dc.alpha, dc.R1, p.lambda / 8.0);
    dc.L_W_max = min(worst.c / worst.C_K, lr(p.lambda / 8.0));
    if (p.a > 0)
        dc.c_psi = lr(p.L_U * dc.gamma / 8.0) * min(lr(p.a / 8.0), worst.epsilon);
    return dc;
}

// Largest L_W keeping tau > 0, capped at lambda/8.
inline LogReal admissible_interaction_bound(const ModelParams& p, const DerivedConstants& dc) {
    (void)p;
    return dc.L_W_max;
}

inline ParticleConstants derive_particle_constants(const ModelParams& p,
                                                   const DerivedConstants& dc) {
    if (!(p.a > 0)) throw std::invalid_argument("derive_particle_constants: a must be > 0");
    ParticleConstants pc;
    const double a = p.a, gamma = dc.gamma, B = dc.B, alpha = dc.alpha;
    const double D = B + 288.0 * a * a / gamma +
                     p.L_W * (6 + 8 * p.lambda) * (B / gamma + p.C0) / p.lambda;

    // B-tilde = max over h >= 0 of exp(a sqrt(h)) (D - gamma h / 4); the log
    // objective is strictly concave on (0, 4D/gamma).
    const double hstar = 4.0 * D / gamma;
    auto lobj = [&](double h) {
        double rest = D - gamma * h / 4.0;
        if (rest <= 0) return -std::numeric_limits<double>::infinity();
        return a * std::sqrt(h) + std::log(rest);
    };
    double hm = golden_section_max(lobj, 0.0, hstar, 1e-10);
    pc.B_tilde = LogReal::from_log(std::max(lobj(hm), std::log(D)));

    const double min13 = std::min(p.lambda / 3.0, 3.0);
    pc.R0_part = (lr(160.0 / (gamma * min13)) * pc.B_tilde).sqrt();
    const double kap = (1 + alpha) * (1 + alpha) + alpha * alpha;
    pc.R1_part = lr(std::sqrt(kap)) * pc.R0_part;

    const double maxhalf = std::max(1.0, 1.0 / (2 * alpha));
    const double s3 = std::sqrt(3.0);
    pc.C_f1 = 8.0 * ((96.0 / (a * a) * maxhalf + 16.0 * s3 / a * dc.C_dH1) * std::expm1(a * a / 2.0) +
                     16.0 * s3 * (M_E - 2.0) * dc.C_dH2);
    pc.C_f2 = 8.0 * (24.0 * maxhalf + 4.0 * s3 * dc.C_dH1 * a + 8.0 * s3 * dc.C_dH2 * a * a);

    const double L = p.L_U + p.L_W;
    const double coef_cp = L / alpha + alpha + pc.C_f1 + pc.C_f2;
    const double R1p_sq = pc.R1_part.pow(2.0).to_double(); // saturating
    double expo = -coef_cp / 8.0 * R1p_sq;
    LogReal m2 = lr(2.0 * std::sqrt(L / (2.0 * M_PI * alpha))) / pc.R1_part;
    LogReal m1 = lr(0.5 * (1.0 - L / alpha));
    LogReal c3 = lr(1.0 / 12.0) * min(m1, m2) *
                 (std::isfinite(expo) ? LogReal::from_log(expo) : LogReal::zero());
    pc.c_part = min(min(c3, lr(2.0) * pc.B_tilde / lr(5.0)), lr(gamma / 800.0));
    pc.epsilon_part = lr(5.0) * pc.c_part / (lr(2.0) * pc.B_tilde);

    pc.phi_coeff_part = L / alpha + alpha + pc.epsilon_part.to_double() * pc.C_f1 + pc.C_f2;
    GaussBump gpp{pc.phi_coeff_part / 8.0};
    LogReal pref = (pc.c_part + lr(2.0) * pc.epsilon_part * pc.B_tilde) / lr(2.0);
    double R1p = pc.R1_part.to_double(); // may saturate to inf; guarded below
    pc.f1_part = detail::f_value(gpp, pref, std::isfinite(R1p) ? R1p : 1e30, 1.0);

    double log_phi_R1p = pc.c_part.is_zero()
                             ? -std::numeric_limits<double>::infinity()
                             : -gpp.beta * R1p_sq;
    double log_g_R1p = 0.0;
    if (!pc.c_part.is_zero() && std::isfinite(R1p)) {
        LogReal deficit = pref * LogReal::from_log(gpp.log_I(R1p));
        double ld = deficit.is_zero() ? -std::numeric_limits<double>::infinity() : deficit.log();
        log_g_R1p = ld >= 0 ? -std::numeric_limits<double>::infinity() : std::log1p(-std::exp(ld));
    }
    const double min23 = std::min(2.0 * p.lambda / 3.0, 6.0);
    LogReal inv_fpR1 = LogReal::from_log(-(log_phi_R1p + log_g_R1p));
    LogReal Crp = pc.epsilon_part.is_zero()
                      ? inv_fpR1
                      : max(lr(4.0 * kap / (min23 * pc.f1_part)) / pc.epsilon_part, inv_fpR1);
    pc.C1_part = lr(std::max(2.0 / alpha, 1.0)) * Crp;
    pc.C_z_part = pc.epsilon_part.is_zero()
                      ? lr(1.0 / alpha) * inv_fpR1
                      : max(lr(1.0 / alpha) * inv_fpR1,
                            lr(std::sqrt(2.0 * kap / min13) / (alpha * pc.f1_part)) /
                                pc.epsilon_part);

    LogReal t1 = lr(gamma * p.lambda / (16.0 * (3.0 + 4.0 * p.lambda)));
    LogReal t2 = pc.c_part / pc.C1_part;
    LogReal t3 = lr(gamma / 64.0) / pc.C_z_part;
    LogReal t4 = pc.epsilon_part.is_zero()
                     ? t3
                     : lr(gamma * a / 256.0) / (pc.C_z_part * pc.epsilon_part);
    pc.L_W_max_part = min(min(t1, t2), min(t3, t4));
    return pc;
}

namespace detail {

inline LedgerEntry make_ineq(const std::string& name, const LogReal& lhs, const LogReal& rhs,
                             bool strict = false) {
    LedgerEntry e;
    e.name = name;
    e.lhs = lhs.to_double();
    e.rhs = rhs.to_double();
    const double l10 = std::log(10.0);
    e.log10_lhs = lhs.is_zero() ? -std::numeric_limits<double>::infinity() : lhs.log_abs() / l10;
    e.log10_rhs = rhs.is_zero() ? -std::numeric_limits<double>::infinity() : rhs.log_abs() / l10;
    e.satisfied = strict ? (lhs < rhs) : (lhs <= rhs);
    if (lhs.sign() > 0 && rhs.sign() > 0) {
        e.slack = e.log10_rhs - e.log10_lhs;
        // once |log| reaches ~1e15 the log representation itself cannot
        // resolve O(1) factors; agreement within its ulp counts as satisfied
        if (!strict && !e.satisfied) {
            double ulp = 64.0 * std::numeric_limits<double>::epsilon() *
                         std::max({std::abs(lhs.log_abs()), std::abs(rhs.log_abs()), 1.0});
            if (lhs.log_abs() - rhs.log_abs() <= ulp) e.satisfied = true;
        }
    } else {
        e.slack = e.satisfied ? 1.0 : -1.0;
    }
    return e;
}

// max over 128 grid points of the normalized residual of the profile ODE
// 4 phi'(s) + coeff s phi(s) = 0, with phi' by complex-step differentiation.
inline LedgerEntry make_def_phi(const std::string& name, double coeff, double R1) {
    const double beta = coeff / 8.0;
    double s_hi = std::min(R1, std::sqrt(690.0 / std::max(beta, 1e-300)));
    double worst = 0.0;
    const double h = 1e-150;
    for (int i = 0; i < 128; ++i) {
        double s = s_hi * i / 127.0;
        std::complex<double> z(s, h);
        double dphi = std::exp(-beta * (z * z)).imag() / h;
        double phi = std::exp(-beta * s * s);
        double res = std::abs(4.0 * dphi + coeff * s * phi) / (1.0 + coeff * s * phi);
        worst = std::max(worst, res);
    }
    LedgerEntry e;
    e.name = name;
    e.residual_kind = true;
    e.lhs = worst;
    e.rhs = 1e-10;
    e.log10_lhs = worst > 0 ? std::log10(worst) : -std::numeric_limits<double>::infinity();
    e.log10_rhs = -10.0;
    e.satisfied = worst <= 1e-10;
    e.slack = (1e-10 - worst) / 1e-10;
    return e;
}

} // namespace detail

// Evaluates every inequality of the constant-construction ledger on the
// constants as given (mutations in dc propagate to the entries).
inline ConstraintLedger verify_constraint_ledger(const ModelParams& p,
                                                 const DerivedConstants& dc) {
    ConstraintLedger led;
    const double L = p.L_U + p.L_W;
    const LogReal epsB2 = lr(2.0 * dc.B) * dc.epsilon;
    const LogReal lhs_sum = dc.c + epsB2; // c + 2 eps B

    {
        LogReal denom = epsB2 + lr(5.0 * dc.gamma / 6.0);
        LogReal rhs = lr(dc.gamma / 6.0) * (epsB2 / denom);
        led.entries.push_back(detail::make_ineq("cond_region_3", dc.c, rhs));
    }
    led.entries.push_back(detail::make_ineq("cond_alpha", lr(L), lr(dc.alpha), true));

    GaussBump gp{dc.phi_coeff / 8.0};
    {
        LogReal inf = LogReal::from_log(
            std::max(gp.log_inf_rphi_over_Phi(dc.R1), gp.log_phi(dc.R1)));
        LogReal rhs = lr(0.5 * (1.0 - L / dc.alpha)) * inf;
        led.entries.push_back(detail::make_ineq("cond_region_2_prop", lhs_sum, rhs));
    }
    {
        LogReal rhs = lr(2.0) / LogReal::from_log(gp.log_I(dc.R1));
        led.entries.push_back(detail::make_ineq("cond_g_demi_prop", lhs_sum, rhs));
    }
    led.entries.push_back(detail::make_def_phi("def_phi", dc.phi_coeff, dc.R1));
    {
        LogReal phiR1 = LogReal::from_log(gp.log_phi(dc.R1));
        LogReal rhs = lr(0.5 * (1.0 - L / dc.alpha)) * phiR1;
        led.entries.push_back(detail::make_ineq("cond_c_2", lhs_sum, rhs));
        LogReal rhs3 = lr(2.0 * std::sqrt(L / (2.0 * M_PI * dc.alpha)) / dc.R1) * phiR1;
        led.entries.push_back(detail::make_ineq("cond_c_3", lhs_sum, rhs3));
    }

    // particle-system parameter conditions
    ParticleConstants pc = derive_particle_constants(p, dc);
    const LogReal epsBt2 = lr(2.0) * pc.epsilon_part * pc.B_tilde;
    {
        LogReal denom = lr(80.0) * pc.epsilon_part * pc.B_tilde + lr(dc.gamma);
        LogReal rhs = lr(dc.gamma / 160.0) *
                      (lr(80.0) * pc.epsilon_part * pc.B_tilde / denom);
        led.entries.push_back(detail::make_ineq("part_cond_c", pc.c_part, rhs));
    }
    led.entries.push_back(detail::make_ineq("part_epsilon_le_1", pc.epsilon_part, LogReal::one()));
    {
        GaussBump gpp{pc.phi_coeff_part / 8.0};
        double R1p = pc.R1_part.to_double();
        LogReal lhs2 = lr(2.0) * pc.c_part + lr(2.0) * epsBt2;
        if (std::isfinite(R1p)) {
            LogReal rhs = lr(2.0) / LogReal::from_log(gpp.log_I(R1p));
            led.entries.push_back(detail::make_ineq("part_cond_g_demi", lhs2, rhs));
            LogReal inf = LogReal::from_log(
                std::max(gpp.log_inf_rphi_over_Phi(R1p), -gpp.beta * R1p * R1p));
            LogReal rhs2 = lr(0.5 * (1.0 - L / dc.alpha)) * inf;
            led.entries.push_back(detail::make_ineq("part_cond_region_2", lhs2, rhs2));
            led.entries.push_back(detail::make_def_phi("part_def_phi", pc.phi_coeff_part, R1p));
        }
    }

    led.all_pass = true;
    led.min_slack = std::numeric_limits<double>::infinity();
    for (const auto& e : led.entries) {
        led.all_pass = led.all_pass && e.satisfied;
        led.min_slack = std::min(led.min_slack, e.slack);
    }
    return led;
}

} // namespace kmv
