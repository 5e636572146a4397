#pragma once

// Shared math for the Gaussian bump phi(s) = exp(-beta s^2): its primitive
// Phi, the log of the ratio integral I(b) = int_0^b Phi/phi, and the
// infimum of r phi(r)/Phi(r). All quantities that leave double range are
// handled as logs; I(b) switches to its Laplace expansion once
// beta*b^2 is large enough that direct quadrature cannot resolve the tail.

#include <cmath>
#include <limits>

#include "kmv/quadrature.hpp"

namespace kmv {

inline double log_erf(double x) {
    if (x <= 0) return -std::numeric_limits<double>::infinity();
    if (x < 1e-4) {
        // erf(x) = 2/sqrt(pi) x (1 - x^2/3 + ...)
        return std::log(2.0 / std::sqrt(M_PI)) + std::log(x) + std::log1p(-x * x / 3.0);
    }
    return std::log(std::erf(x));
}

struct GaussBump {
    double beta; // phi(s) = exp(-beta s^2)

    double log_phi(double s) const { return -beta * s * s; }
    double phi(double s) const { return std::exp(-beta * s * s); }

    double Phi_inf() const { return 0.5 * std::sqrt(M_PI / beta); }

    double log_Phi(double u) const {
        if (u <= 0) return -std::numeric_limits<double>::infinity();
        return std::log(Phi_inf()) + log_erf(std::sqrt(beta) * u);
    }
    double Phi(double u) const { return u <= 0 ? 0.0 : Phi_inf() * std::erf(std::sqrt(beta) * u); }

    // log of I(b) = int_0^b Phi(u) exp(beta u^2) du
    double log_I(double b) const {
        if (b <= 0) return -std::numeric_limits<double>::infinity();
        double e = beta * b * b;
        if (e <= 600.0) {
            auto lf = [this](double u) { return log_Phi(u) + beta * u * u; };
            return integrate_log(lf, 0.0, b, 1e-12);
        }
        // Laplace expansion: I(b) ~ e^{beta b^2} Phi(b)/(2 beta b) (1 + 1/(2e) + 3/(4e^2) + 15/(8e^3))
        double corr = 1.0 + 0.5 / e + 0.75 / (e * e) + 1.875 / (e * e * e);
        return e + log_Phi(b) - std::log(2.0 * beta * b) + std::log(corr);
    }

    // log of inf over (0, R1] of r phi(r)/Phi(r); the ratio is decreasing, the
    // grid scan confirms it.
    double log_inf_rphi_over_Phi(double R1, int n = 4096) const {
        double cap = std::min(R1, 1e8);
        double best = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= n; ++k) {
            double s = cap * k / n;
            best = std::min(best, std::log(s) - beta * s * s - log_Phi(s));
        }
        if (R1 > cap) best = std::min(best, std::log(R1) - beta * R1 * R1 - log_Phi(R1));
        return best;
    }
};

} // namespace kmv
