#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nfp/errors.hpp"
#include "nfp/linalg.hpp"
#include "nfp/param_vector.hpp"
#include "nfp/precond.hpp"
#include "nfp/rng.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

enum class Algorithm {
    kSgd,
    kPrecondSgd,  // SGD with a caller-supplied diagonal
    kAdam,
    kEsgd,
    kEsgdMax,
    kAdaHessianE,
    kAdaHessianJ,
    kShampoo,
};

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::kSgd: return "sgd";
        case Algorithm::kPrecondSgd: return "precond-sgd";
        case Algorithm::kAdam: return "adam";
        case Algorithm::kEsgd: return "esgd";
        case Algorithm::kEsgdMax: return "esgd-max";
        case Algorithm::kAdaHessianE: return "adahessian-e";
        case Algorithm::kAdaHessianJ: return "adahessian-j";
        case Algorithm::kShampoo: return "shampoo";
    }
    return "?";
}

inline Algorithm algorithm_from_name(const std::string& s) {
    for (Algorithm a : {Algorithm::kSgd, Algorithm::kPrecondSgd, Algorithm::kAdam, Algorithm::kEsgd,
                        Algorithm::kEsgdMax, Algorithm::kAdaHessianE, Algorithm::kAdaHessianJ,
                        Algorithm::kShampoo})
        if (s == algorithm_name(a)) return a;
    throw ConfigError("unknown optimizer algorithm '" + s + "'");
}

// Does the step rule consume Hessian-vector products?
inline bool uses_hvp(Algorithm a) {
    return a == Algorithm::kEsgd || a == Algorithm::kEsgdMax || a == Algorithm::kAdaHessianE ||
           a == Algorithm::kAdaHessianJ;
}

struct OptimizerConfig {
    Algorithm algorithm = Algorithm::kAdam;
    double eta = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double damping = 1e-8;        // lambda; 1e-4 is the usual choice for HVP methods
    int refresh_every = 100;      // N: steps between preconditioner refreshes (ESGD family)
    int probes_per_refresh = 1;   // Rademacher probes folded in per refresh
    int shampoo_interval = 20;    // steps between factor-root recomputations
    double shampoo_eps = 1e-4;

    void validate() const {
        if (!(eta > 0.0)) throw ConfigError("optimizer: eta must be > 0");
        if (!(0.0 < beta1 && beta1 < beta2 && beta2 < 1.0))
            throw ConfigError("optimizer: betas must satisfy 0 < beta1 < beta2 < 1");
        if (damping < 0.0) throw ConfigError("optimizer: damping must be >= 0");
        if (refresh_every < 1) throw ConfigError("optimizer: refresh interval must be >= 1");
        if (probes_per_refresh < 1) throw ConfigError("optimizer: probes must be >= 1");
        if (shampoo_interval < 1) throw ConfigError("optimizer: shampoo interval must be >= 1");
        if (!(shampoo_eps > 0.0)) throw ConfigError("optimizer: shampoo eps must be > 0");
    }

    // Conventional damping when the config does not pin one: HVP-driven
    // denominators need more slack than Adam's g^2 accumulator.
    static double default_damping(Algorithm a) {
        return a == Algorithm::kAdam || a == Algorithm::kSgd || a == Algorithm::kPrecondSgd ||
                       a == Algorithm::kShampoo
                   ? 1e-8
                   : 1e-4;
    }
};

// Kronecker-factored accumulators for one parameter block (weights r x c).
struct ShampooFactors {
    Tensor l;       // r x r gradient outer-product sum
    Tensor r;       // c x c
    Tensor l_root;  // (l + eps I)^{-1/4}, refreshed on the configured cadence
    Tensor r_root;
};

struct OptimizerState {
    std::int64_t t = 0;  // completed steps
    Tensor m;            // first moment
    Tensor v;            // second moment / EMA diagonal accumulator
    Tensor u;            // ESGD-max running max accumulator
    PreconditionerState precond;
    std::vector<ShampooFactors> shampoo;  // one per layout slot
    Rng rng;             // probe stream; serialized so resume continues it

    OptimizerState() : precond(0), rng(0) {}

    OptimizerState(const OptimizerConfig& cfg, const ParamLayout& layout, std::uint64_t seed)
        : m({layout.total()}),
          v({layout.total()}),
          u({layout.total()}),
          precond(layout.total()),
          rng(Rng::substream(seed, 0x9B0BE)) {
        precond.refresh_every = cfg.refresh_every;
        precond.damping = cfg.damping;
        precond.ema_beta = cfg.beta2;
        if (cfg.algorithm == Algorithm::kShampoo) {
            for (const auto& slot : layout.slots) {
                ShampooFactors f;
                f.l = Tensor({slot.rows, slot.rows});
                f.r = Tensor({slot.cols, slot.cols});
                shampoo.push_back(std::move(f));
            }
        }
    }
};

namespace detail {
inline void require_finite_grad(const Tensor& g) {
    if (!g.all_finite()) throw NumericError("optimizer step received a non-finite gradient");
}
}  // namespace detail

// theta <- theta - eta g.
inline void sgd_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                     const Tensor& g) {
    detail::require_finite_grad(g);
    if (g.numel() != theta.size()) throw ConfigError("sgd_step: gradient length mismatch");
    for (std::int64_t i = 0; i < g.numel(); ++i) theta.flat()[i] -= cfg.eta * g[i];
    ++st.t;
}

// theta <- theta - eta * g / (sqrt(d) + lambda) for a caller-supplied d >= 0.
inline void precond_sgd_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                             const Tensor& g, const Tensor& d) {
    detail::require_finite_grad(g);
    const Tensor step = apply_diag(d, g, cfg.damping);
    for (std::int64_t i = 0; i < g.numel(); ++i) theta.flat()[i] -= cfg.eta * step[i];
    ++st.t;
}

// Adam with bias correction; denominator sqrt(v-hat) + lambda.
inline void adam_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                      const Tensor& g) {
    detail::require_finite_grad(g);
    if (g.numel() != st.m.numel()) throw ConfigError("adam_step: gradient length mismatch");
    const std::int64_t t = st.t + 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::int64_t i = 0; i < g.numel(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        theta.flat()[i] -= cfg.eta * mhat / (std::sqrt(vhat) + cfg.damping);
    }
    st.t = t;
}

// ESGD: refresh the equilibration EMA with (Hv)^2 probes every N steps,
// then take a damped diagonal step with the bias-corrected estimate.
inline void esgd_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                      const Tensor& g, const HvpFn& hvp_fn) {
    detail::require_finite_grad(g);
    if (st.t % cfg.refresh_every == 0) {
        for (int s = 0; s < cfg.probes_per_refresh; ++s) {
            const Tensor hv = hvp_fn(rademacher_vector(theta.size(), st.rng));
            st.precond.absorb(hadamard(hv, hv));
        }
    }
    const Tensor step = apply_diag(st.precond.corrected(), g, cfg.damping);
    for (std::int64_t i = 0; i < g.numel(); ++i) theta.flat()[i] -= cfg.eta * step[i];
    ++st.t;
}

// ESGD-max: running elementwise max u <- max(beta2 u, (Hv)^2) at refresh
// steps, no bias correction (the max keeps the scale).
inline void esgd_max_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                          const Tensor& g, const HvpFn& hvp_fn) {
    detail::require_finite_grad(g);
    if (st.t % cfg.refresh_every == 0) {
        for (int s = 0; s < cfg.probes_per_refresh; ++s) {
            const Tensor hv = hvp_fn(rademacher_vector(theta.size(), st.rng));
            for (std::int64_t i = 0; i < st.u.numel(); ++i)
                st.u[i] = std::max(cfg.beta2 * st.u[i], hv[i] * hv[i]);
        }
    }
    const Tensor step = apply_diag(st.u, g, cfg.damping);
    for (std::int64_t i = 0; i < g.numel(); ++i) theta.flat()[i] -= cfg.eta * step[i];
    ++st.t;
}

// AdaHessian core with the per-step diagonal estimate supplied by the
// caller. estimate is (Hv)^2 for variant E and the sign-preserving square
// (v .* Hv)|v .* Hv| for variant J; both carry squared-curvature units, the
// EMA accumulates them as given, and the magnitude is taken at read time.
// On an exactly diagonal Hessian the two statistics agree up to a fixed
// sign, so the variants take identical steps there and only separate when
// off-diagonal mass makes the squared row norm exceed the squared diagonal.
// Exposed separately so the Adam-reduction identity (estimate forced to
// g^2) is directly testable.
inline void adahessian_step_with_estimate(const OptimizerConfig& cfg, OptimizerState& st,
                                          ParamVector& theta, const Tensor& g,
                                          const Tensor& estimate) {
    detail::require_finite_grad(g);
    if (estimate.numel() != g.numel())
        throw ConfigError("adahessian: estimate length mismatch");
    const std::int64_t t = st.t + 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (std::int64_t i = 0; i < g.numel(); ++i) {
        st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
        st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * estimate[i];
        const double mhat = st.m[i] / c1;
        const double dhat = std::abs(st.v[i] / c2);
        theta.flat()[i] -= cfg.eta * mhat / (std::sqrt(dhat) + cfg.damping);
    }
    st.t = t;
}

// AdaHessian proper: one Rademacher probe per step (its defining cadence).
inline void adahessian_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                            const Tensor& g, const HvpFn& hvp_fn) {
    const Tensor v = rademacher_vector(theta.size(), st.rng);
    const Tensor hv = hvp_fn(v);
    Tensor estimate({theta.size()});
    if (cfg.algorithm == Algorithm::kAdaHessianJ) {
        for (std::int64_t i = 0; i < estimate.numel(); ++i) {
            const double s = v[i] * hv[i]; // signed Hutchinson diag sample
            estimate.flat()[i] = s * std::abs(s);
        }
    } else {
        estimate = hadamard(hv, hv); // equilibration estimate
    }
    adahessian_step_with_estimate(cfg, st, theta, g, estimate);
}

// Per-block Shampoo: accumulate G G^T / G^T G, refresh the inverse-root
// factors on the configured cadence, then step along Lroot G Rroot.
inline void shampoo_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                         const Tensor& g) {
    detail::require_finite_grad(g);
    const auto& slots = theta.layout().slots;
    if (st.shampoo.size() != slots.size())
        throw ConfigError("shampoo_step: state was not initialized for this layout");
    const bool refresh = st.t % cfg.shampoo_interval == 0;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        const ParamSlot& slot = slots[k];
        ShampooFactors& f = st.shampoo[k];

        Tensor gk({slot.rows, slot.cols});
        for (std::int64_t i = 0; i < slot.numel(); ++i) gk[i] = g[slot.offset + i];

        gemm_nt_acc(gk.data(), gk.data(), f.l.data(), slot.rows, slot.cols, slot.rows);
        gemm_tn_acc(gk.data(), gk.data(), f.r.data(), slot.rows, slot.cols, slot.cols);

        if (refresh) {
            f.l_root = inv_fourth_root(f.l, cfg.shampoo_eps);
            f.r_root = inv_fourth_root(f.r, cfg.shampoo_eps);
        }
        const Tensor step = matmul(matmul(f.l_root, gk), f.r_root);
        auto dst = theta.view(slot);
        for (std::int64_t i = 0; i < slot.numel(); ++i)
            dst[static_cast<std::size_t>(i)] -= cfg.eta * step[i];
    }
    ++st.t;
}

// Uniform dispatch used by the training loop. hvp_fn may be empty for
// algorithms that never call it.
inline void optimizer_step(const OptimizerConfig& cfg, OptimizerState& st, ParamVector& theta,
                           const Tensor& g, const HvpFn& hvp_fn) {
    switch (cfg.algorithm) {
        case Algorithm::kSgd: sgd_step(cfg, st, theta, g); break;
        case Algorithm::kPrecondSgd:
            throw ConfigError("precond-sgd requires an explicit diagonal; use precond_sgd_step");
        case Algorithm::kAdam: adam_step(cfg, st, theta, g); break;
        case Algorithm::kEsgd: esgd_step(cfg, st, theta, g, hvp_fn); break;
        case Algorithm::kEsgdMax: esgd_max_step(cfg, st, theta, g, hvp_fn); break;
        case Algorithm::kAdaHessianE:
        case Algorithm::kAdaHessianJ: adahessian_step(cfg, st, theta, g, hvp_fn); break;
        case Algorithm::kShampoo: shampoo_step(cfg, st, theta, g); break;
    }
}

}  // namespace nfp
