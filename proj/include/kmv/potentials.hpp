#pragma once

// Confining and interaction potentials, their gradients, and numerical
// verification of the structural assumptions (non-negativity, the
// confinement drift inequality, evenness, Lipschitz bounds).

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kmv/interp.hpp"
#include "kmv/rng.hpp"
#include "kmv/vec.hpp"

namespace kmv {

enum class ConfiningKind { double_well, quadratic, user_radial_table };
enum class InteractionKind { zero, harmonic_attract, harmonic_repulse, mollified_coulomb };

struct EvalResult {
    double value = 0.0;
    Vec gradient;
};

struct ConfiningPotential {
    ConfiningKind kind = ConfiningKind::double_well;
    double lambda = 0.5;  // confinement strength in the drift inequality
    double A = 0.75;      // additive slack in the drift inequality
    double L_U = 8.0;     // global Lipschitz constant of the gradient
    int dim = 1;
    CubicSpline radial;   // only for user_radial_table

    static ConfiningPotential double_well_1d(double lambda = 0.5, double A = 0.75) {
        ConfiningPotential p;
        p.kind = ConfiningKind::double_well;
        p.lambda = lambda;
        p.A = A;
        p.L_U = 8.0; // sup |U''|, attained at |x| = 1 on the inner branch
        p.dim = 1;
        return p;
    }

    static ConfiningPotential quadratic_d(int d, double lambda = 2.0 / 3.0, double A = 0.0) {
        ConfiningPotential p;
        p.kind = ConfiningKind::quadratic;
        p.lambda = lambda;
        p.A = A;
        p.L_U = 1.0;
        p.dim = d;
        return p;
    }

    static ConfiningPotential from_radial_table(std::vector<double> r, std::vector<double> u,
                                                double lambda, double A, int d) {
        ConfiningPotential p;
        p.kind = ConfiningKind::user_radial_table;
        p.lambda = lambda;
        p.A = A;
        p.dim = d;
        // Lipschitz estimate from table second differences of the slope
        double lu = 0.0;
        for (std::size_t i = 0; i + 2 < r.size(); ++i) {
            double s1 = (u[i + 1] - u[i]) / (r[i + 1] - r[i]);
            double s2 = (u[i + 2] - u[i + 1]) / (r[i + 2] - r[i + 1]);
            lu = std::max(lu, std::abs(s2 - s1) / (0.5 * (r[i + 2] - r[i])));
        }
        p.L_U = lu;
        p.radial = CubicSpline(std::move(r), std::move(u));
        return p;
    }
};

struct InteractionPotential {
    InteractionKind kind = InteractionKind::zero;
    double L_W = 0.0;
    double coulomb_a = 1.0;
    double coulomb_b = 1.0;
    int coulomb_k = 2;

    static InteractionPotential none() { return {}; }
    static InteractionPotential harmonic(double lw, bool attract = true) {
        InteractionPotential p;
        p.kind = attract ? InteractionKind::harmonic_attract : InteractionKind::harmonic_repulse;
        p.L_W = lw;
        return p;
    }
    static InteractionPotential coulomb(double a, double b, int k, double lw) {
        InteractionPotential p;
        p.kind = InteractionKind::mollified_coulomb;
        p.coulomb_a = a;
        p.coulomb_b = b;
        p.coulomb_k = k;
        p.L_W = lw;
        return p;
    }
};

inline EvalResult eval_grad_U(const ConfiningPotential& pot, const Vec& x) {
    if (static_cast<int>(x.size()) != pot.dim)
        throw std::invalid_argument("eval_grad_U: dimension mismatch");
    if (!all_finite(x)) throw std::domain_error("eval_grad_U: non-finite input");
    EvalResult out;
    out.gradient.assign(x.size(), 0.0);
    const double r = norm(x);
    switch (pot.kind) {
    case ConfiningKind::double_well: {
        if (r <= 1.0) {
            double t = r * r - 1.0;
            out.value = t * t;
            for (std::size_t i = 0; i < x.size(); ++i) out.gradient[i] = 4.0 * t * x[i];
        } else {
            double t = r - 1.0;
            out.value = t * t;
            for (std::size_t i = 0; i < x.size(); ++i) out.gradient[i] = 2.0 * t * x[i] / r;
        }
        break;
    }
    case ConfiningKind::quadratic: {
        out.value = 0.5 * r * r;
        out.gradient = x;
        break;
    }
    case ConfiningKind::user_radial_table: {
        double d = 0.0;
        out.value = pot.radial.eval(r, d);
        if (r > 0)
            for (std::size_t i = 0; i < x.size(); ++i) out.gradient[i] = d * x[i] / r;
        break;
    }
    }
    return out;
}

inline EvalResult eval_grad_W(const InteractionPotential& pot, const Vec& z) {
    if (!all_finite(z)) throw std::domain_error("eval_grad_W: non-finite input");
    EvalResult out;
    out.gradient.assign(z.size(), 0.0);
    const double r = norm(z);
    switch (pot.kind) {
    case InteractionKind::zero:
        break;
    case InteractionKind::harmonic_attract:
        out.value = 0.5 * pot.L_W * r * r;
        for (std::size_t i = 0; i < z.size(); ++i) out.gradient[i] = pot.L_W * z[i];
        break;
    case InteractionKind::harmonic_repulse:
        out.value = -0.5 * pot.L_W * r * r;
        for (std::size_t i = 0; i < z.size(); ++i) out.gradient[i] = -pot.L_W * z[i];
        break;
    case InteractionKind::mollified_coulomb: {
        // W(z) = a/(|z|^k+b^k)^(1/k); gradient = -a z |z|^(k-2) / (|z|^k+b^k)^(1+1/k)
        const double a = pot.coulomb_a, b = pot.coulomb_b;
        const int k = pot.coulomb_k;
        double rk = std::pow(r, k), bk = std::pow(b, k);
        out.value = a / std::pow(rk + bk, 1.0 / k);
        if (r > 0) {
            double coef = -a * std::pow(r, k - 2) / std::pow(rk + bk, 1.0 + 1.0 / k);
            for (std::size_t i = 0; i < z.size(); ++i) out.gradient[i] = coef * z[i];
        }
        break;
    }
    }
    return out;
}

// Allocation-free gradient paths for the inner simulation loops.
inline void grad_U_raw(const ConfiningPotential& pot, const double* x, int d, double* g) {
    double r2 = 0;
    for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
    switch (pot.kind) {
    case ConfiningKind::double_well: {
        if (r2 <= 1.0) {
            double c = 4.0 * (r2 - 1.0);
            for (int k = 0; k < d; ++k) g[k] = c * x[k];
        } else {
            double r = std::sqrt(r2);
            double c = 2.0 * (r - 1.0) / r;
            for (int k = 0; k < d; ++k) g[k] = c * x[k];
        }
        break;
    }
    case ConfiningKind::quadratic:
        for (int k = 0; k < d; ++k) g[k] = x[k];
        break;
    case ConfiningKind::user_radial_table: {
        double r = std::sqrt(r2);
        double dv = 0.0;
        pot.radial.eval(r, dv);
        double c = r > 0 ? dv / r : 0.0;
        for (int k = 0; k < d; ++k) g[k] = c * x[k];
        break;
    }
    }
}

inline void grad_W_raw(const InteractionPotential& pot, const double* z, int d, double* g) {
    switch (pot.kind) {
    case InteractionKind::zero:
        for (int k = 0; k < d; ++k) g[k] = 0.0;
        break;
    case InteractionKind::harmonic_attract:
        for (int k = 0; k < d; ++k) g[k] = pot.L_W * z[k];
        break;
    case InteractionKind::harmonic_repulse:
        for (int k = 0; k < d; ++k) g[k] = -pot.L_W * z[k];
        break;
    case InteractionKind::mollified_coulomb: {
        double r2 = 0;
        for (int k = 0; k < d; ++k) r2 += z[k] * z[k];
        double r = std::sqrt(r2);
        if (r == 0) {
            for (int k = 0; k < d; ++k) g[k] = 0.0;
            break;
        }
        double rk = std::pow(r, pot.coulomb_k), bk = std::pow(pot.coulomb_b, pot.coulomb_k);
        double c = -pot.coulomb_a * std::pow(r, pot.coulomb_k - 2) /
                   std::pow(rk + bk, 1.0 + 1.0 / pot.coulomb_k);
        for (int k = 0; k < d; ++k) g[k] = c * z[k];
        break;
    }
    }
}

struct GridSpec {
    double r_min = 1e-3;
    double r_max = 0.0; // 0 -> computed as 3*sqrt(4A/lambda)+10
    int n_radii = 64;
    int n_dirs = 32;
};

struct ConfinementReport {
    bool pass = false;
    double hyp_u_margin = 0.0; // worst-case slack of the drift inequality
    double tilde_A = 0.0;
    Vec worst_point;
    std::string grid_spec;
};

namespace detail {
// deterministic quasi-uniform directions on the unit sphere
inline std::vector<Vec> directions(int d, int n) {
    std::vector<Vec> dirs;
    if (d == 1) {
        dirs.push_back({1.0});
        dirs.push_back({-1.0});
        return dirs;
    }
    if (d == 2) {
        for (int i = 0; i < n; ++i) {
            double th = 2.0 * M_PI * i / n;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
        return dirs;
    }
    RngStream rng(0x9E3779B97F4A7C15ull, RngStream::stream_id(0xD1u, 0));
    for (int i = 0; i < n; ++i) {
        Vec v(d);
        rng.fill_gauss(static_cast<std::uint64_t>(i), 0, v.data(), v.size());
        double nv = norm(v);
        if (nv == 0) {
            v[0] = 1.0;
            nv = 1.0;
        }
        for (auto& c : v) c /= nv;
        dirs.push_back(std::move(v));
    }
    return dirs;
}
} // namespace detail

// Checks (1/2) grad U . x - lambda (U + |x|^2/4) + A >= 0 on a log-radial grid
// and extracts tilde_A = max(0, sup (lambda/6)|x|^2 - U(x)).
inline ConfinementReport verify_confinement(const ConfiningPotential& pot, GridSpec grid = {}) {
    ConfinementReport rep;
    double r_max = grid.r_max > 0 ? grid.r_max
                                  : 3.0 * std::sqrt(4.0 * pot.A / pot.lambda) + 10.0;
    auto dirs = detail::directions(pot.dim, grid.n_dirs);
    double min_margin = std::numeric_limits<double>::infinity();
    double tilde_A = 0.0;
    Vec worst;
    for (int i = 0; i < grid.n_radii; ++i) {
        double t = static_cast<double>(i) / (grid.n_radii - 1);
        double r = grid.r_min * std::pow(r_max / grid.r_min, t);
        for (const auto& dir : dirs) {
            Vec x = r * dir;
            auto e = eval_grad_U(pot, x);
            double margin = 0.5 * dot(e.gradient, x) - pot.lambda * (e.value + 0.25 * r * r) + pot.A;
            if (margin < min_margin) {
                min_margin = margin;
                worst = x;
            }
            tilde_A = std::max(tilde_A, pot.lambda / 6.0 * r * r - e.value);
            if (e.value < -1e-12) min_margin = std::min(min_margin, -1.0); // U must be >= 0
        }
    }
    rep.hyp_u_margin = min_margin;
    rep.tilde_A = tilde_A;
    rep.pass = min_margin >= -1e-9;
    rep.worst_point = worst;
    std::ostringstream ss;
    ss << grid.n_radii << " log radii in [" << grid.r_min << ", " << r_max << "] x "
       << dirs.size() << " directions";
    rep.grid_spec = ss.str();
    return rep;
}

// Central finite difference vs analytic gradient; max relative error over samples.
// Eval is any callable Vec -> EvalResult. `skip` rejects sample points (e.g. kinks).
template <class Eval, class Skip>
double fd_gradient_check(const Eval& eval, int dim, int samples, double step, const Skip& skip,
                         double scale = 2.0, std::uint64_t seed = 1234) {
    if (!(step > 0) || step > 1e-3) throw std::invalid_argument("fd_gradient_check: bad step");
    RngStream rng(seed, RngStream::stream_id(0xFDu, 0));
    double worst = 0.0;
    int done = 0;
    std::uint64_t draw = 0;
    while (done < samples && draw < static_cast<std::uint64_t>(samples) * 64) {
        Vec x(dim);
        rng.fill_gauss(draw++, 0, x.data(), x.size());
        for (auto& c : x) c *= scale;
        if (skip(x)) continue;
        auto e = eval(x);
        double num = 0.0, den = 0.0;
        bool bad = false;
        for (int k = 0; k < dim; ++k) {
            Vec xp = x, xm = x;
            xp[k] += step;
            xm[k] -= step;
            if (skip(xp) || skip(xm)) {
                bad = true;
                break;
            }
            double fd = (eval(xp).value - eval(xm).value) / (2.0 * step);
            if (!std::isfinite(fd)) {
                bad = true;
                break;
            }
            num += (fd - e.gradient[k]) * (fd - e.gradient[k]);
            den += e.gradient[k] * e.gradient[k];
        }
        if (bad) continue;
        double rel = std::sqrt(num) / std::max(1.0, std::sqrt(den));
        worst = std::max(worst, rel);
        ++done;
    }
    return worst;
}

inline bool near_double_well_kink(const Vec& x) {
    return std::abs(norm(x) - 1.0) < 1e-3;
}

// Two-column CSV (radius, value), strictly increasing radius.
inline ConfiningPotential load_radial_table(const std::string& path, double lambda, double A,
                                            int dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("radial table: cannot open " + path);
    std::vector<double> r, u;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b;
        if (!(ss >> a >> b)) throw std::runtime_error("radial table: bad line: " + line);
        if (!r.empty() && a <= r.back())
            throw std::runtime_error("radial table: radius not strictly increasing");
        r.push_back(a);
        u.push_back(b);
    }
    return ConfiningPotential::from_radial_table(std::move(r), std::move(u), lambda, A, dim);
}

} // namespace kmv
