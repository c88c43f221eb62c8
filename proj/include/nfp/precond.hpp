#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "nfp/errors.hpp"
#include "nfp/rng.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Hessian-vector product callback: v -> H v at the consumer's current
// parameter point. All estimators below are pure given this and an rng.
using HvpFn = std::function<Tensor(const Tensor&)>;

inline Tensor rademacher_vector(std::int64_t p, Rng& rng) {
    Tensor v({p});
    for (std::int64_t i = 0; i < p; ++i) v[i] = rng.rademacher();
    return v;
}

// Equilibration diagonal: D_i = |H_{i,.}|_2, estimated as
// sqrt( mean over probes of (Hv)_i^2 ) with Rademacher v. The mean of
// (Hv)^2 is unbiased for the squared row norms; sqrt is applied at read.
inline Tensor estimate_equilibrated(const HvpFn& hvp_fn, std::int64_t p, int n_probes, Rng& rng) {
    if (n_probes < 1) throw ConfigError("estimate_equilibrated: n_probes must be >= 1");
    Tensor acc({p});
    for (int s = 0; s < n_probes; ++s) {
        const Tensor hv = hvp_fn(rademacher_vector(p, rng));
        for (std::int64_t i = 0; i < p; ++i) acc[i] += hv[i] * hv[i];
    }
    Tensor d({p});
    for (std::int64_t i = 0; i < p; ++i) d[i] = std::sqrt(acc[i] / n_probes);
    return d;
}

// Jacobi diagonal: D_i = |H_ii|, via the Hutchinson identity
// diag(H) = E[v .* Hv]. The signed mean is formed first; abs at read.
inline Tensor estimate_jacobi(const HvpFn& hvp_fn, std::int64_t p, int n_probes, Rng& rng) {
    if (n_probes < 1) throw ConfigError("estimate_jacobi: n_probes must be >= 1");
    Tensor acc({p});
    for (int s = 0; s < n_probes; ++s) {
        const Tensor v = rademacher_vector(p, rng);
        const Tensor hv = hvp_fn(v);
        for (std::int64_t i = 0; i < p; ++i) acc[i] += v[i] * hv[i];
    }
    Tensor d({p});
    for (std::int64_t i = 0; i < p; ++i) d[i] = std::abs(acc[i] / n_probes);
    return d;
}

// Diagonal of the Gauss-Newton matrix J^T J for a scalar least-squares
// residual: just g .* g (the statistic Adam's second moment accumulates).
inline Tensor gauss_newton_diag(const Tensor& g) { return hadamard(g, g); }

// Damped diagonal solve: (D^{1/2} + lambda I)^{-1} g with D = diag(d).
// d holds squared-magnitude estimates where the caller chose to store them
// that way; this op's contract is exactly g_i / (sqrt(d_i) + lambda).
// lambda = 0 is permitted (undamped limit); then the caller must ensure
// d > 0. Configured optimizer runs validate lambda > 0 elsewhere.
inline Tensor apply_diag(const Tensor& d, const Tensor& g, double lambda) {
    if (d.numel() != g.numel()) throw ConfigError("apply_diag: diagonal/gradient length mismatch");
    if (lambda < 0.0) throw ConfigError("apply_diag: damping must be >= 0");
    Tensor out(g.shape());
    for (std::int64_t i = 0; i < g.numel(); ++i) {
        if (d[i] < 0.0) throw ConfigError("apply_diag: negative diagonal entry");
        out[i] = g[i] / (std::sqrt(d[i]) + lambda);
    }
    return out;
}

// Running estimate consumed by the ESGD-family optimizers. acc aggregates
// the probe statistic ((Hv)^2 for equilibrated, v.*Hv for Jacobi) either as
// a plain running mean or, when ema_beta is set, as an EMA with Adam-style
// bias correction by probe count.
struct PreconditionerState {
    Tensor acc;          // aggregated statistic
    std::int64_t n_samples = 0;
    int refresh_every = 100;
    double damping = 1e-4;
    double ema_beta = 0.0;  // 0 => plain running mean

    explicit PreconditionerState(std::int64_t p = 0) : acc({p}) {}

    void absorb(const Tensor& stat) {
        if (stat.numel() != acc.numel())
            throw ConfigError("preconditioner statistic length mismatch");
        ++n_samples;
        if (ema_beta > 0.0) {
            for (std::int64_t i = 0; i < acc.numel(); ++i)
                acc[i] = ema_beta * acc[i] + (1.0 - ema_beta) * stat[i];
        } else {
            const double w = 1.0 / static_cast<double>(n_samples);
            for (std::int64_t i = 0; i < acc.numel(); ++i) acc[i] += w * (stat[i] - acc[i]);
        }
    }

    // Bias-corrected view of the accumulator (identity for running means).
    Tensor corrected() const {
        if (n_samples < 1) throw ConfigError("preconditioner read before any probe was absorbed");
        if (ema_beta <= 0.0) return acc;
        const double c = 1.0 - std::pow(ema_beta, static_cast<double>(n_samples));
        return (1.0 / c) * acc;
    }
};

}  // namespace nfp
