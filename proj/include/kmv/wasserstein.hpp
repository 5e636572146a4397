#pragma once

// Exact empirical Wasserstein distances between equal-size uniform clouds.
// For such measures the optimal coupling is a permutation, so the assignment
// optimum is the exact distance. Clouds above the exact-size cap are
// subsampled without replacement (seeded) and averaged over resamples.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kmv/assignment.hpp"
#include "kmv/profile.hpp"
#include "kmv/rng.hpp"
#include "kmv/semimetric.hpp"

namespace kmv {

enum class TransportCost { L1, L2_squared, rho };

struct WassersteinOptions {
    std::size_t max_exact = 4096;
    int resamples = 8;
    std::uint64_t seed = 0;
    // rho cost ingredients
    const DistanceProfile* profile = nullptr;
    const ConfiningPotential* pot = nullptr;
    double gamma = 0, lambda = 0;
};

namespace detail {

inline double pair_cost(const PhasePoint& a, const PhasePoint& b, TransportCost cost,
                        const WassersteinOptions& opt) {
    switch (cost) {
    case TransportCost::L1: {
        double dx = 0, dv = 0;
        for (int i = 0; i < a.dim(); ++i) {
            dx += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
            dv += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
        }
        return std::sqrt(dx) + std::sqrt(dv);
    }
    case TransportCost::L2_squared: {
        double s = 0;
        for (int i = 0; i < a.dim(); ++i) {
            s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
            s += (a.v[i] - b.v[i]) * (a.v[i] - b.v[i]);
        }
        return s;
    }
    case TransportCost::rho:
        return rho_eval(a, b, *opt.profile, *opt.pot, opt.gamma, opt.lambda);
    }
    return 0.0;
}

inline double exact_between(const std::vector<const PhasePoint*>& mu,
                            const std::vector<const PhasePoint*>& nu, TransportCost cost,
                            const WassersteinOptions& opt) {
    const int n = static_cast<int>(mu.size());
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c[i * static_cast<std::size_t>(n) + j] = pair_cost(*mu[i], *nu[j], cost, opt);
    double total = solve_assignment(c, n);
    double mean = total / n;
    return cost == TransportCost::L2_squared ? std::sqrt(mean) : mean;
}

// seeded partial Fisher-Yates pick of k of n indices
inline std::vector<int> subsample(std::size_t n, std::size_t k, const RngStream& rng,
                                  std::uint64_t draw) {
    std::vector<int> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
    for (std::size_t i = 0; i < k; ++i) {
        double u = rng.uniform01(draw, static_cast<std::uint32_t>(i % 16),
                                 static_cast<std::uint32_t>((i / 16) % 16));
        std::size_t j = i + static_cast<std::size_t>(u * (n - i));
        if (j >= n) j = n - 1;
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

} // namespace detail

inline double wasserstein_exact(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                                TransportCost cost, const WassersteinOptions& opt = {}) {
    if (mu.size() != nu.size())
        throw std::invalid_argument("wasserstein_exact: measures must have equal size");
    if (mu.size() == 0) throw std::invalid_argument("wasserstein_exact: empty measure");
    if (cost == TransportCost::rho && (!opt.profile || !opt.pot))
        throw std::invalid_argument("wasserstein_exact: rho cost needs a profile and potential");

    const std::size_t n = mu.size();
    if (n <= opt.max_exact) {
        std::vector<const PhasePoint*> a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = &mu.points[i];
            b[i] = &nu.points[i];
        }
        return detail::exact_between(a, b, cost, opt);
    }
    // subsample to the cap, average over resamples
    RngStream rng(opt.seed, RngStream::stream_id(0x57u, 0));
    double acc = 0.0;
    for (int r = 0; r < opt.resamples; ++r) {
        auto ia = detail::subsample(n, opt.max_exact, rng, 2 * r);
        auto ib = detail::subsample(n, opt.max_exact, rng, 2 * r + 1);
        std::vector<const PhasePoint*> a(opt.max_exact), b(opt.max_exact);
        for (std::size_t i = 0; i < opt.max_exact; ++i) {
            a[i] = &mu.points[ia[i]];
            b[i] = &nu.points[ib[i]];
        }
        acc += detail::exact_between(a, b, cost, opt);
    }
    return acc / opt.resamples;
}

} // namespace kmv
