#pragma once

// Tabulated concave distance modification f with its ingredients phi, Phi,
// g on [0, R1]. Built once per constant set; f is interpolated by a
// monotone cubic so evaluation inside assignment costs stays cheap.

#include <cmath>
#include <vector>

#include "kmv/constants.hpp"
#include "kmv/gauss_profile.hpp"
#include "kmv/interp.hpp"
#include "kmv/quadrature.hpp"

namespace kmv {

struct DistanceProfile {
    double alpha = 0;
    double epsilon = 0;       // Lyapunov weight in G (double; may underflow to 0)
    double R1 = 0;
    double exponent_coeff = 0; // coefficient inside phi
    LogReal g_prefactor;

    std::vector<double> grid_s, grid_phi, grid_Phi, grid_g, grid_f, grid_fp;
    double f_R1 = 0;
    MonotoneCubic f_interp;
    GaussBump bump{0.0};

    double phi(double s) const { return bump.phi(s); }

    double g(double s) const {
        if (s <= 0) return grid_g.empty() ? 1.0 : grid_g.front();
        if (s >= R1) return grid_g.back();
        double t = s / R1 * (grid_g.size() - 1);
        std::size_t i = std::min(static_cast<std::size_t>(t), grid_g.size() - 2);
        double w = t - i;
        return (1 - w) * grid_g[i] + w * grid_g[i + 1];
    }

    // (f(s), f'(s)); f' = phi*g below R1, 0 above.
    std::pair<double, double> f_eval(double s) const {
        if (s <= 0) return {0.0, phi(0.0) * g(0.0)};
        if (s >= R1) return {f_R1, 0.0};
        return {f_interp.eval(s), phi(s) * g(s)};
    }

    double f(double s) const { return f_eval(s).first; }
};

inline DistanceProfile build_profile(double alpha, double epsilon_double, double R1,
                                     double exponent_coeff, LogReal g_prefactor,
                                     int n_nodes = 4096) {
    DistanceProfile pr;
    pr.alpha = alpha;
    pr.epsilon = epsilon_double;
    pr.R1 = R1;
    pr.exponent_coeff = exponent_coeff;
    pr.g_prefactor = g_prefactor;
    pr.bump = GaussBump{exponent_coeff / 8.0};

    const int n = n_nodes;
    pr.grid_s.resize(n);
    pr.grid_phi.resize(n);
    pr.grid_Phi.resize(n);
    pr.grid_g.resize(n);
    pr.grid_f.resize(n);
    pr.grid_fp.resize(n);

    // g via a coarse log-I table; I(s) is smooth, increasing, and dominated
    // by its endpoint, so linear interpolation of log I suffices here.
    constexpr int ncoarse = 128;
    std::vector<double> gI(ncoarse + 1);
    for (int i = 0; i <= ncoarse; ++i)
        gI[i] = detail::g_value(pr.bump, g_prefactor, R1 * i / ncoarse);

    auto g_of = [&](double s) {
        double t = s / R1 * ncoarse;
        int i = std::min(static_cast<int>(t), ncoarse - 1);
        double w = t - i;
        return (1 - w) * gI[i] + w * gI[i + 1];
    };

    const double cell_tol = 1e-12 / n;
    double acc_Phi = 0.0, acc_f = 0.0;
    for (int k = 0; k < n; ++k) {
        double s = R1 * k / (n - 1);
        pr.grid_s[k] = s;
        pr.grid_phi[k] = pr.bump.phi(s);
        pr.grid_g[k] = g_of(s);
        pr.grid_fp[k] = pr.grid_phi[k] * pr.grid_g[k];
        if (k > 0) {
            double s0 = pr.grid_s[k - 1];
            acc_Phi += integrate([&](double u) { return pr.bump.phi(u); }, s0, s, cell_tol);
            acc_f += integrate([&](double u) { return pr.bump.phi(u) * g_of(u); }, s0, s, cell_tol);
        }
        pr.grid_Phi[k] = acc_Phi;
        pr.grid_f[k] = acc_f;
    }
    pr.f_R1 = pr.grid_f.back();
    pr.f_interp = MonotoneCubic(pr.grid_s, pr.grid_f);
    return pr;
}

// Profile carrying the constants of the two-process contraction setup.
inline DistanceProfile build_profile(const ModelParams& p, const DerivedConstants& dc) {
    (void)p;
    return build_profile(dc.alpha, dc.epsilon.to_double(), dc.R1, dc.phi_coeff,
                         dc.C_bold / lr(4.0));
}

} // namespace kmv
