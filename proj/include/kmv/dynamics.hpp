#pragma once

// Euler-Maruyama time stepping for the particle system, the nonlinear
// process (ensemble approximation), and the reflection/synchronous coupled
// constructions. States are stored flat (SoA); every random increment is
// addressed by (seed, stream, step), so trajectories are bitwise
// reproducible for any worker count.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "kmv/potentials.hpp"
#include "kmv/rng.hpp"
#include "kmv/threading.hpp"
#include "kmv/vec.hpp"

namespace kmv {

struct SimConfig {
    double dt = 1e-3;
    double t_final = 10.0;
    int n_particles = 512; // N
    int n_replicas = 1024; // M
    double xi = 0.0;       // coupling transition width; experiments default it to 1e-2 R1
    std::uint64_t seed = 0;
    int record_every = 100;
    int threads = 1;
    double noise_scale = 1.0; // test hook; 0 disables the Brownian forcing

    void validate() const {
        if (!(dt > 0) || dt > 0.01) throw std::invalid_argument("SimConfig: need 0 < dt <= 0.01");
        if (!(t_final > 0)) throw std::invalid_argument("SimConfig: t_final must be > 0");
        double steps = t_final / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
            throw std::invalid_argument("SimConfig: t_final/dt must be integral");
        if (n_particles < 1 || n_replicas < 1)
            throw std::invalid_argument("SimConfig: counts must be >= 1");
        if (record_every < 1) throw std::invalid_argument("SimConfig: record_every must be >= 1");
    }
    long n_steps() const { return std::lround(t_final / dt); }
};

// dB - 2 (e . dB) e ; e must be a unit vector or zero.
inline Vec reflect_increment(const Vec& e, const Vec& dB) {
    if (e.size() != dB.size()) throw std::invalid_argument("reflect_increment: dim mismatch");
    double ne = norm(e);
    if (ne != 0.0 && std::abs(ne - 1.0) > 1e-9)
        throw std::invalid_argument("reflect_increment: e must be unit or zero");
    double proj = dot(e, dB);
    Vec out = dB;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= 2.0 * proj * e[i];
    return out;
}

struct CouplingWeights {
    double rc = 0, sc = 1;
};

// rc = h1(|z+w|) h2(alpha|z|+|z+w|); h1 ramps 0->1 on [xi/2, xi], h2 ramps
// 1->0 on [R1, R1+xi]; sc = sqrt(1-rc^2).
inline CouplingWeights coupling_weights_norm(double q_norm, double r_val, double xi, double R1) {
    if (!(xi > 0)) throw std::invalid_argument("coupling_weights: xi must be > 0");
    auto clamp01 = [](double t) { return t < 0 ? 0.0 : (t > 1 ? 1.0 : t); };
    double h1 = clamp01((q_norm - 0.5 * xi) / (0.5 * xi));
    double h2 = clamp01((R1 + xi - r_val) / xi);
    CouplingWeights w;
    w.rc = h1 * h2;
    w.sc = std::sqrt(std::max(0.0, 1.0 - w.rc * w.rc));
    return w;
}

inline CouplingWeights coupling_weights(const Vec& z, const Vec& w, double xi, double alpha,
                                        double R1) {
    Vec q = z + w;
    return coupling_weights_norm(norm(q), alpha * norm(z) + norm(q), xi, R1);
}

enum class CoupledMode { pair_nonlinear, particle_vs_nonlinear };

struct CoupledCloud {
    CoupledMode mode = CoupledMode::pair_nonlinear;
    int d = 1;
    int n = 0; // number of pairs
    // side 1: (X,V) resp. the nonlinear copies; side 2: (X~,V~) resp. particles
    std::vector<double> x1, v1, x2, v2;
    std::vector<char> excluded;
    long excluded_count = 0;

    void resize(int n_, int d_) {
        if (d_ < 1 || d_ > 8) throw std::invalid_argument("CoupledCloud: 1 <= d <= 8");
        n = n_;
        d = d_;
        x1.assign(static_cast<std::size_t>(n) * d, 0.0);
        v1 = x2 = v2 = x1;
        excluded.assign(n, 0);
        excluded_count = 0;
    }
    long active_count() const { return n - excluded_count; }
};

struct ParticleCloud {
    int d = 1;
    int n = 0;
    std::vector<double> x, v;
    std::vector<char> excluded;
    long excluded_count = 0;

    void resize(int n_, int d_) {
        if (d_ < 1 || d_ > 8) throw std::invalid_argument("ParticleCloud: 1 <= d <= 8");
        n = n_;
        d = d_;
        x.assign(static_cast<std::size_t>(n) * d, 0.0);
        v = x;
        excluded.assign(n, 0);
        excluded_count = 0;
    }
    long active_count() const { return n - excluded_count; }
};

namespace detail {

// component-wise mean over active rows, deterministic pairwise order
inline Vec masked_mean(const std::vector<double>& flat, const std::vector<char>& excluded,
                       int n, int d) {
    Vec m(d, 0.0);
    long active = 0;
    for (int i = 0; i < n; ++i) active += excluded[i] ? 0 : 1;
    if (active == 0) return m;
    for (int k = 0; k < d; ++k) {
        m[k] = pairwise_sum(0, static_cast<std::size_t>(n), [&](std::size_t i) {
                   return excluded[i] ? 0.0 : flat[i * d + k];
               }) /
               active;
    }
    return m;
}

} // namespace detail

// Mean-field interaction drift grad W * mu for an ensemble of positions.
// Harmonic kinds use the O(N) closed form through the ensemble mean; other
// kinds use the O(N^2) sum over a start-of-step snapshot.
class MeanFieldDrift {
public:
    MeanFieldDrift() = default;

    MeanFieldDrift(const InteractionPotential& pot, const std::vector<double>& positions,
                   const std::vector<char>& excluded, int n, int d, bool force_full_sum = false)
        : pot_(&pot), d_(d) {
        full_sum_ = force_full_sum || (pot.kind == InteractionKind::mollified_coulomb);
        if (pot.kind == InteractionKind::zero) {
            zero_ = true;
        } else if (!full_sum_) {
            mean_ = detail::masked_mean(positions, excluded, n, d);
        } else {
            snapshot_ = &positions;
            excluded_ = &excluded;
            n_ = n;
        }
    }

    // drift from an explicit ensemble x-mean (harmonic closed form)
    static MeanFieldDrift from_mean(const InteractionPotential& pot, Vec mean) {
        if (pot.kind == InteractionKind::mollified_coulomb)
            throw std::invalid_argument("MeanFieldDrift::from_mean: needs zero/harmonic kind");
        MeanFieldDrift mf;
        mf.pot_ = &pot;
        mf.d_ = static_cast<int>(mean.size());
        mf.zero_ = pot.kind == InteractionKind::zero;
        mf.mean_ = std::move(mean);
        return mf;
    }

    void eval(const double* x, double* out) const {
        if (zero_ || !pot_) {
            for (int k = 0; k < d_; ++k) out[k] = 0.0;
            return;
        }
        if (!full_sum_) {
            double sgn = pot_->kind == InteractionKind::harmonic_repulse ? -1.0 : 1.0;
            for (int k = 0; k < d_; ++k) out[k] = sgn * pot_->L_W * (x[k] - mean_[k]);
            return;
        }
        double acc[8] = {0}, diff[8], g[8];
        long active = 0;
        for (int j = 0; j < n_; ++j) {
            if ((*excluded_)[j]) continue;
            ++active;
            for (int k = 0; k < d_; ++k) diff[k] = x[k] - (*snapshot_)[j * d_ + k];
            grad_W_raw(*pot_, diff, d_, g);
            for (int k = 0; k < d_; ++k) acc[k] += g[k];
        }
        for (int k = 0; k < d_; ++k) out[k] = active ? acc[k] / active : 0.0;
    }

private:
    const InteractionPotential* pot_ = nullptr;
    int d_ = 1;
    bool zero_ = false;
    bool full_sum_ = false;
    Vec mean_;
    const std::vector<double>* snapshot_ = nullptr;
    const std::vector<char>* excluded_ = nullptr;
    int n_ = 0;
};

namespace detail {

constexpr std::uint32_t kStreamPair = 0x10;
constexpr std::uint32_t kStreamParticle = 0x20;
constexpr std::uint32_t kStreamChaos = 0x30;
constexpr std::uint32_t kStreamReference = 0x40;
constexpr std::uint32_t kStreamInit = 0x50;

inline bool finite_row(const double* x, const double* v, int d) {
    for (int k = 0; k < d; ++k)
        if (!std::isfinite(x[k]) || !std::isfinite(v[k])) return false;
    return true;
}

} // namespace detail

struct StepContext {
    const ConfiningPotential* pot_U = nullptr;
    const InteractionPotential* pot_W = nullptr;
    double alpha = 0, R1 = 0; // for the coupling weights
    std::uint32_t stream_kind = detail::kStreamPair;
    std::uint64_t stream_offset = 0; // distinguishes replicas of whole systems
    bool force_full_interaction = false; // O(N^2) sum even for harmonic kinds
};

// One Euler-Maruyama step of the two-process coupling. Side 1 and side 2
// each interact through their own ensemble empirical measure.
inline void step_pair_coupled(CoupledCloud& cloud, const StepContext& ctx, const SimConfig& cfg,
                              long step) {
    const int d = cloud.d, n = cloud.n;
    MeanFieldDrift mf1(*ctx.pot_W, cloud.x1, cloud.excluded, n, d);
    MeanFieldDrift mf2(*ctx.pot_W, cloud.x2, cloud.excluded, n, d);
    const double sdt = std::sqrt(2.0 * cfg.dt) * cfg.noise_scale;

    parallel_for(0, static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
        if (cloud.excluded[i]) return;
        double* X = &cloud.x1[i * d];
        double* V = &cloud.v1[i * d];
        double* Xt = &cloud.x2[i * d];
        double* Vt = &cloud.v2[i * d];

        // coupling geometry at step start
        double nq = 0, nz = 0;
        for (int k = 0; k < d; ++k) {
            double z = X[k] - Xt[k];
            double q = z + (V[k] - Vt[k]);
            nz += z * z;
            nq += q * q;
        }
        nq = std::sqrt(nq);
        nz = std::sqrt(nz);
        auto w = coupling_weights_norm(nq, ctx.alpha * nz + nq, cfg.xi, ctx.R1);

        RngStream rng(cfg.seed, RngStream::stream_id(ctx.stream_kind, ctx.stream_offset + i));
        double grc[8], gsc[8];
        rng.fill_gauss(static_cast<std::uint64_t>(step), 0, grc, d);
        rng.fill_gauss(static_cast<std::uint64_t>(step), 1, gsc, d);

        // e from Q at step start; zero when Q is exactly zero
        double proj = 0.0;
        double e[8] = {0};
        if (nq > 0) {
            for (int k = 0; k < d; ++k) {
                e[k] = (X[k] - Xt[k] + V[k] - Vt[k]) / nq;
                proj += e[k] * grc[k];
            }
        }

        double gu1[8], gu2[8], mfa[8], mfb[8];
        grad_U_raw(*ctx.pot_U, X, d, gu1);
        grad_U_raw(*ctx.pot_U, Xt, d, gu2);
        mf1.eval(X, mfa);
        mf2.eval(Xt, mfb);

        for (int k = 0; k < d; ++k) {
            double grc_ref = grc[k] - 2.0 * proj * e[k];
            double dv1 = (-V[k] - gu1[k] - mfa[k]) * cfg.dt +
                         sdt * (w.rc * grc[k] + w.sc * gsc[k]);
            double dv2 = (-Vt[k] - gu2[k] - mfb[k]) * cfg.dt +
                         sdt * (w.rc * grc_ref + w.sc * gsc[k]);
            double xa = X[k] + V[k] * cfg.dt;
            double xb = Xt[k] + Vt[k] * cfg.dt;
            X[k] = xa;
            Xt[k] = xb;
            V[k] += dv1;
            Vt[k] += dv2;
        }
        if (!detail::finite_row(X, V, d) || !detail::finite_row(Xt, Vt, d)) cloud.excluded[i] = 2;
    });

    for (int i = 0; i < n; ++i) {
        if (cloud.excluded[i] == 2) {
            cloud.excluded[i] = 1;
            ++cloud.excluded_count;
        }
    }
}

// One Euler-Maruyama step of the N-particle mean-field system.
inline void step_particle_system(ParticleCloud& cloud, const StepContext& ctx,
                                 const SimConfig& cfg, long step) {
    const int d = cloud.d, n = cloud.n;
    MeanFieldDrift mf(*ctx.pot_W, cloud.x, cloud.excluded, n, d);
    // general-W path needs start-of-step positions; harmonic uses the mean only
    std::vector<double> snapshot;
    const bool full = ctx.pot_W->kind == InteractionKind::mollified_coulomb ||
                      ctx.force_full_interaction;
    if (full) snapshot = cloud.x;
    MeanFieldDrift mf_snap =
        full ? MeanFieldDrift(*ctx.pot_W, snapshot, cloud.excluded, n, d, true) : mf;
    const double sdt = std::sqrt(2.0 * cfg.dt) * cfg.noise_scale;

    parallel_for(0, static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
        if (cloud.excluded[i]) return;
        double* X = &cloud.x[i * d];
        double* V = &cloud.v[i * d];
        RngStream rng(cfg.seed, RngStream::stream_id(ctx.stream_kind, ctx.stream_offset + i));
        double g[8];
        rng.fill_gauss(static_cast<std::uint64_t>(step), 0, g, d);
        double gu[8], mfv[8];
        grad_U_raw(*ctx.pot_U, X, d, gu);
        mf_snap.eval(X, mfv);
        for (int k = 0; k < d; ++k) {
            double dv = (-V[k] - gu[k] - mfv[k]) * cfg.dt + sdt * g[k];
            X[k] += V[k] * cfg.dt;
            V[k] += dv;
        }
        if (!detail::finite_row(X, V, d)) cloud.excluded[i] = 2;
    });
    for (int i = 0; i < n; ++i) {
        if (cloud.excluded[i] == 2) {
            cloud.excluded[i] = 1;
            ++cloud.excluded_count;
        }
    }
}

// One step of the propagation-of-chaos coupling: side 1 holds nonlinear
// copies, side 2 the interacting particles; they share (B_rc, B_sc) with the
// reflection applied on the particle side. The nonlinear drift law can be
// supplied externally (a reference ensemble), otherwise the copies' own
// empirical measure is used.
inline void step_coupled_chaos(CoupledCloud& cloud, const StepContext& ctx, const SimConfig& cfg,
                               long step, const MeanFieldDrift* nonlinear_law = nullptr) {
    if (cloud.mode != CoupledMode::particle_vs_nonlinear)
        throw std::invalid_argument("step_coupled_chaos: wrong cloud mode");
    const int d = cloud.d, n = cloud.n;
    MeanFieldDrift own_law(*ctx.pot_W, cloud.x1, cloud.excluded, n, d);
    const MeanFieldDrift& law = nonlinear_law ? *nonlinear_law : own_law;
    MeanFieldDrift part_mf(*ctx.pot_W, cloud.x2, cloud.excluded, n, d);
    const double sdt = std::sqrt(2.0 * cfg.dt) * cfg.noise_scale;

    parallel_for(0, static_cast<std::size_t>(n), cfg.threads, [&](std::size_t i) {
        if (cloud.excluded[i]) return;
        double* Xb = &cloud.x1[i * d]; // nonlinear copy
        double* Vb = &cloud.v1[i * d];
        double* Xp = &cloud.x2[i * d]; // particle
        double* Vp = &cloud.v2[i * d];

        double nq = 0, nz = 0;
        for (int k = 0; k < d; ++k) {
            double z = Xb[k] - Xp[k];
            double q = z + (Vb[k] - Vp[k]);
            nz += z * z;
            nq += q * q;
        }
        nq = std::sqrt(nq);
        nz = std::sqrt(nz);
        auto w = coupling_weights_norm(nq, ctx.alpha * nz + nq, cfg.xi, ctx.R1);

        RngStream rng(cfg.seed, RngStream::stream_id(ctx.stream_kind, ctx.stream_offset + i));
        double grc[8], gsc[8];
        rng.fill_gauss(static_cast<std::uint64_t>(step), 0, grc, d);
        rng.fill_gauss(static_cast<std::uint64_t>(step), 1, gsc, d);

        double proj = 0.0;
        double e[8] = {0};
        if (nq > 0) {
            for (int k = 0; k < d; ++k) {
                e[k] = (Xb[k] - Xp[k] + Vb[k] - Vp[k]) / nq;
                proj += e[k] * grc[k];
            }
        }

        double gub[8], gup[8], mfb[8], mfp[8];
        grad_U_raw(*ctx.pot_U, Xb, d, gub);
        grad_U_raw(*ctx.pot_U, Xp, d, gup);
        law.eval(Xb, mfb);
        part_mf.eval(Xp, mfp);

        for (int k = 0; k < d; ++k) {
            double grc_ref = grc[k] - 2.0 * proj * e[k];
            double dvb = (-Vb[k] - gub[k] - mfb[k]) * cfg.dt +
                         sdt * (w.rc * grc[k] + w.sc * gsc[k]);
            double dvp = (-Vp[k] - gup[k] - mfp[k]) * cfg.dt +
                         sdt * (w.rc * grc_ref + w.sc * gsc[k]);
            Xb[k] += Vb[k] * cfg.dt;
            Xp[k] += Vp[k] * cfg.dt;
            Vb[k] += dvb;
            Vp[k] += dvp;
        }
        if (!detail::finite_row(Xb, Vb, d) || !detail::finite_row(Xp, Vp, d))
            cloud.excluded[i] = 2;
    });
    for (int i = 0; i < n; ++i) {
        if (cloud.excluded[i] == 2) {
            cloud.excluded[i] = 1;
            ++cloud.excluded_count;
        }
    }
}

} // namespace kmv
