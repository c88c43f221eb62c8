#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nfp/autodiff.hpp"
#include "nfp/errors.hpp"
#include "nfp/linalg.hpp"
#include "nfp/param_vector.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Dense Hessian assembly costs P HVPs and P^2 doubles; past this size the
// request is refused rather than silently grinding.
inline constexpr std::int64_t kFullHessianLimit = 3000;

// Relative null-space cutoff for condition numbers: overparameterized
// losses carry near-zero eigenvalues that would make raw kappa meaningless.
inline constexpr double kKappaCutoff = 1e-8;

// Relative magnitude threshold for HVP sparsity counting.
inline constexpr double kSparsityTau = 1e-6;

// ------------------------------------------------------------- full Hessian

// Dense Hessian at theta: column i is hvp(f, theta, e_i). The raw assembly
// is symmetric only up to roundoff, so the result is symmetrized as
// (H + H^T)/2; the pre-symmetrization defect is reported through
// max_asymmetry_out when requested (it should sit at rounding level, and a
// large value would indicate a broken HVP).
inline Tensor full_hessian(const DiffProgram& f, const ParamVector& theta,
                           std::int64_t limit = kFullHessianLimit,
                           double* max_asymmetry_out = nullptr) {
    const std::int64_t p = theta.size();
    if (p > limit)
        throw LimitError("full_hessian: " + std::to_string(p) +
                         " parameters exceed the dense-Hessian limit of " + std::to_string(limit));
    Tensor h({p, p});
    Tensor e({p});
    for (std::int64_t i = 0; i < p; ++i) {
        if (i > 0) e[i - 1] = 0.0;
        e[i] = 1.0;
        const Tensor col = hvp(f, theta, e);
        for (std::int64_t r = 0; r < p; ++r) h.at(r, i) = col[r];
    }
    double asym = 0.0;
    for (std::int64_t r = 0; r < p; ++r) {
        for (std::int64_t c = r + 1; c < p; ++c) {
            asym = std::max(asym, std::abs(h.at(r, c) - h.at(c, r)));
            const double mean = 0.5 * (h.at(r, c) + h.at(c, r));
            h.at(r, c) = mean;
            h.at(c, r) = mean;
        }
    }
    if (max_asymmetry_out) *max_asymmetry_out = asym;
    return h;
}

// --------------------------------------------------------- condition number

struct SpectrumReport {
    std::vector<double> eigenvalues;  // sorted descending by magnitude
    double kappa = 1.0;
    std::int64_t n_dropped = 0;  // |lambda| below the relative cutoff
    std::int64_t param_count = 0;
};

// kappa = max|lambda| / min kept |lambda|, where eigenvalues with
// |lambda| < tau0 * max|lambda| are treated as numerical null space and
// dropped (their count is reported so the cutoff stays auditable).
inline SpectrumReport condition_number(const Tensor& h, double tau0 = kKappaCutoff) {
    if (h.rows() != h.cols() || h.rows() < 1)
        throw ConfigError("condition_number: matrix must be square and nonempty");
    if (!(tau0 >= 0.0 && tau0 < 1.0))
        throw ConfigError("condition_number: cutoff must lie in [0,1)");
    double scale = 0.0;
    for (std::int64_t i = 0; i < h.numel(); ++i) scale = std::max(scale, std::abs(h[i]));
    for (std::int64_t r = 0; r < h.rows(); ++r)
        for (std::int64_t c = r + 1; c < h.cols(); ++c)
            if (std::abs(h.at(r, c) - h.at(c, r)) > 1e-8 * std::max(scale, 1.0))
                throw ConfigError("condition_number: matrix is not symmetric");

    SpectrumReport rep;
    rep.param_count = h.rows();
    rep.eigenvalues = sym_eigenvalues(h);
    std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end(),
              [](double a, double b) { return std::abs(a) > std::abs(b); });
    const double max_abs = std::abs(rep.eigenvalues.front());
    if (max_abs <= 0.0)
        throw NumericError("condition_number: degenerate spectrum (all eigenvalues zero)");
    const double cut = tau0 * max_abs;
    double min_kept = max_abs;
    for (double lam : rep.eigenvalues) {
        const double a = std::abs(lam);
        if (a < cut || a == 0.0)
            ++rep.n_dropped;
        else
            min_kept = std::min(min_kept, a);
    }
    if (rep.n_dropped == static_cast<std::int64_t>(rep.eigenvalues.size()))
        throw NumericError("condition_number: degenerate spectrum (everything below cutoff)");
    rep.kappa = max_abs / min_kept;
    return rep;
}

// kappa of the preconditioned Hessian S H S with S = diag(1/(sqrt(d_i)+lambda)).
// d holds the preconditioner diagonal itself in curvature units (row norms
// for the equilibrated variant, |diag H| for Jacobi) -- at lambda=0 this is
// exactly the similarity transform D^{-1/2} H D^{-1/2}.
inline SpectrumReport preconditioned_condition_number(const Tensor& h, const Tensor& d,
                                                      double lambda, double tau0 = kKappaCutoff) {
    if (d.numel() != h.rows())
        throw ConfigError("preconditioned kappa: diagonal length mismatch");
    if (lambda < 0.0) throw ConfigError("preconditioned kappa: damping must be >= 0");
    std::vector<double> s(static_cast<std::size_t>(d.numel()));
    for (std::int64_t i = 0; i < d.numel(); ++i) {
        if (!(d[i] >= 0.0)) throw ConfigError("preconditioned kappa: diagonal must be >= 0");
        const double denom = std::sqrt(d[i]) + lambda;
        if (denom <= 0.0)
            throw ConfigError("preconditioned kappa: zero scale at coordinate " +
                              std::to_string(i) + " (d=0 with lambda=0)");
        s[static_cast<std::size_t>(i)] = 1.0 / denom;
    }
    Tensor m({h.rows(), h.cols()});
    for (std::int64_t r = 0; r < h.rows(); ++r)
        for (std::int64_t c = 0; c < h.cols(); ++c)
            m.at(r, c) = s[static_cast<std::size_t>(r)] * h.at(r, c) *
                         s[static_cast<std::size_t>(c)];
    return condition_number(m, tau0);
}

// ----------------------------------------------------------------- sparsity

struct SparsityRecord {
    std::int64_t iteration = 0;
    std::vector<double> per_layer;  // fraction per network layer (weights+bias)
    double global_fraction = 0.0;
    double tau = kSparsityTau;
    bool all_zero = false;  // Hv was identically zero; fractions forced to 1
};

// Fraction of HVP entries with |x| <= tau * max|x|, per layer and overall.
// The global fraction equals the parameter-count-weighted mean of the layer
// fractions by construction.
inline SparsityRecord hvp_sparsity(const Tensor& hv, const ParamLayout& layout,
                                   double tau = kSparsityTau, std::int64_t iteration = 0) {
    if (!(tau > 0.0)) throw ConfigError("hvp_sparsity: tau must be positive");
    if (hv.numel() != layout.total())
        throw ConfigError("hvp_sparsity: vector length does not match layout");
    SparsityRecord rec;
    rec.iteration = iteration;
    rec.tau = tau;
    const int n_layers = layout.n_layers();
    rec.per_layer.assign(static_cast<std::size_t>(n_layers), 0.0);

    double max_abs = 0.0;
    for (std::int64_t i = 0; i < hv.numel(); ++i) max_abs = std::max(max_abs, std::abs(hv[i]));
    if (max_abs == 0.0) {
        rec.all_zero = true;
        rec.global_fraction = 1.0;
        std::fill(rec.per_layer.begin(), rec.per_layer.end(), 1.0);
        return rec;
    }
    const double cut = tau * max_abs;
    std::vector<std::int64_t> layer_total(static_cast<std::size_t>(n_layers), 0);
    std::vector<std::int64_t> layer_sparse(static_cast<std::size_t>(n_layers), 0);
    std::int64_t global_sparse = 0;
    for (const auto& slot : layout.slots) {
        const std::size_t li = static_cast<std::size_t>(slot.layer - 1);
        layer_total[li] += slot.numel();
        for (std::int64_t i = slot.offset; i < slot.offset + slot.numel(); ++i) {
            if (std::abs(hv[i]) <= cut) {
                ++layer_sparse[li];
                ++global_sparse;
            }
        }
    }
    for (int l = 0; l < n_layers; ++l)
        rec.per_layer[static_cast<std::size_t>(l)] =
            static_cast<double>(layer_sparse[static_cast<std::size_t>(l)]) /
            static_cast<double>(layer_total[static_cast<std::size_t>(l)]);
    rec.global_fraction = static_cast<double>(global_sparse) / static_cast<double>(hv.numel());
    return rec;
}

}  // namespace nfp
