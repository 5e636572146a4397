#pragma once

// Phase-space distance machinery: the skewed distance r, Lyapunov functions
// H and H-tilde, the semimetric rho = f(r) G, and the pairwise inequality
// checks tying them together.

#include <cmath>
#include <stdexcept>

#include "kmv/constants.hpp"
#include "kmv/potentials.hpp"
#include "kmv/profile.hpp"
#include "kmv/vec.hpp"

namespace kmv {

struct PhasePoint {
    Vec x, v;

    PhasePoint() = default;
    PhasePoint(Vec x_, Vec v_) : x(std::move(x_)), v(std::move(v_)) {
        if (x.size() != v.size()) throw std::invalid_argument("PhasePoint: dim mismatch");
    }
    int dim() const { return static_cast<int>(x.size()); }
    bool finite() const { return all_finite(x) && all_finite(v); }
};

// r = alpha |x - x~| + |x - x~ + v - v~|
inline double r_metric(const PhasePoint& p, const PhasePoint& q, double alpha) {
    if (p.dim() != q.dim()) throw std::invalid_argument("r_metric: dimension mismatch");
    double nz = 0.0, nq = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
        double z = p.x[i] - q.x[i];
        double w = p.v[i] - q.v[i];
        nz += z * z;
        nq += (z + w) * (z + w);
    }
    return alpha * std::sqrt(nz) + std::sqrt(nq);
}

// H(x,v) = 24 U(x) + (6(1-gamma)+lambda)|x|^2 + 12 x.v + 12 |v|^2
inline double lyapunov_H(const PhasePoint& p, const ConfiningPotential& pot, double gamma,
                         double lambda) {
    double u = eval_grad_U(pot, p.x).value;
    double x2 = dot(p.x, p.x), v2 = dot(p.v, p.v), xv = dot(p.x, p.v);
    return 24.0 * u + (6.0 * (1.0 - gamma) + lambda) * x2 + 12.0 * xv + 12.0 * v2;
}

// H value already known: H~ = int_0^H exp(a sqrt(u)) du, closed form
// (2/a^2) e^{a sqrt(H)} (a sqrt(H) - 1) + 2/a^2.
struct HTildeResult {
    double value = 0.0;
    bool overflow = false; // saturated at 1e300
};

inline HTildeResult lyapunov_H_tilde_of_H(double H, double a) {
    if (!(a > 0)) throw std::invalid_argument("lyapunov_H_tilde: a must be > 0");
    HTildeResult r;
    if (H <= 0) return r;
    double s = a * std::sqrt(H);
    if (s > 690.0) {
        r.value = 1e300;
        r.overflow = true;
        return r;
    }
    if (s < 1.0) {
        // sum_{k>=2} s^k (k-1)/k! , scaled: avoids the e^s(s-1)+1 cancellation
        double term = s * s / 2.0; // k=2
        double sum = term;
        for (int k = 3; k < 40; ++k) {
            term *= s / k;
            double add = term * (k - 1);
            sum += add;
            if (add < 1e-18 * sum) break;
        }
        r.value = 2.0 / (a * a) * sum;
    } else {
        r.value = 2.0 / (a * a) * (std::exp(s) * (s - 1.0) + 1.0);
    }
    return r;
}

inline HTildeResult lyapunov_H_tilde(const PhasePoint& p, const ConfiningPotential& pot,
                                     double gamma, double lambda, double a) {
    return lyapunov_H_tilde_of_H(lyapunov_H(p, pot, gamma, lambda), a);
}

enum class LyapunovKind { H, H_tilde };

// rho = f(r) (1 + eps Lyap + eps Lyap')
inline double rho_eval(const PhasePoint& p, const PhasePoint& q, const DistanceProfile& profile,
                       const ConfiningPotential& pot, double gamma, double lambda,
                       LyapunovKind kind = LyapunovKind::H, double a = 0.0) {
    double r = r_metric(p, q, profile.alpha);
    double f = profile.f(r);
    double hp, hq;
    if (kind == LyapunovKind::H) {
        hp = lyapunov_H(p, pot, gamma, lambda);
        hq = lyapunov_H(q, pot, gamma, lambda);
    } else {
        hp = lyapunov_H_tilde(p, pot, gamma, lambda, a).value;
        hq = lyapunov_H_tilde(q, pot, gamma, lambda, a).value;
    }
    return f * (1.0 + profile.epsilon * hp + profile.epsilon * hq);
}

struct EmpiricalMeasure {
    std::vector<PhasePoint> points;

    std::size_t size() const { return points.size(); }
};

// Worst signed slack (negative = violation) over the pairwise metric
// equivalence inequalities. The astronomically large constants are compared
// in log space so they cannot overflow into NaN.
struct EquivalenceReport {
    double worst_slack = std::numeric_limits<double>::infinity();
    std::string worst_name;
};

inline EquivalenceReport metric_equivalence_check(
    const std::vector<std::pair<PhasePoint, PhasePoint>>& samples, const ModelParams& mp,
    const DerivedConstants& dc, const DistanceProfile& profile, const ConfiningPotential& pot) {
    EquivalenceReport rep;
    auto log_or = [](double v) {
        return v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    };
    auto check_log = [&](const char* name, double log_lhs, const LogReal& C, double log_rho) {
        // slack in log units; +inf when lhs is zero
        double log_rhs = C.is_zero() ? -std::numeric_limits<double>::infinity()
                                     : C.log_abs() + log_rho;
        double slack = log_rhs - log_lhs;
        if (log_lhs == -std::numeric_limits<double>::infinity()) slack = 0.0;
        if (slack < rep.worst_slack) {
            rep.worst_slack = slack;
            rep.worst_name = name;
        }
    };
    auto check_abs = [&](const char* name, double slack) {
        if (slack < rep.worst_slack) {
            rep.worst_slack = slack;
            rep.worst_name = name;
        }
    };

    for (const auto& [p, q] : samples) {
        double r = r_metric(p, q, dc.alpha);
        double hp = lyapunov_H(p, pot, dc.gamma, mp.lambda);
        double hq = lyapunov_H(q, pot, dc.gamma, mp.lambda);
        double f = profile.f(r);
        double rho = f * (1.0 + profile.epsilon * (hp + hq));
        double log_rho = log_or(rho);

        double dx = 0, dv = 0;
        for (int i = 0; i < p.dim(); ++i) {
            dx += (p.x[i] - q.x[i]) * (p.x[i] - q.x[i]);
            dv += (p.v[i] - q.v[i]) * (p.v[i] - q.v[i]);
        }
        dx = std::sqrt(dx);
        dv = std::sqrt(dv);

        check_log("C1_l1", log_or(dx + dv), dc.C1, log_rho);
        check_log("C2_l2sq", log_or(dx * dx + dv * dv), dc.C2, log_rho);
        check_log("Cr_r", log_or(r), dc.C_r, log_rho);
        {
            double bracket = f * (1.0 + profile.epsilon * (std::sqrt(hp) + std::sqrt(hq)));
            check_log("Cz_x", log_or(dx), dc.C_z, log_or(bracket));
        }
        // |H - H'| <= C_dH1 r + C_dH2 r (sqrt H + sqrt H') : moderate scale
        double rhs = dc.C_dH1 * r + dc.C_dH2 * r * (std::sqrt(hp) + std::sqrt(hq));
        check_abs("dH_bound", rhs - std::abs(hp - hq));
    }
    return rep;
}

} // namespace kmv
