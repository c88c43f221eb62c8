#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nfp/param_vector.hpp"
#include "nfp/tape.hpp"

namespace nfp {

// A differentiable scalar program over the flat parameter vector. build()
// gets one leaf Var per layout slot (in slot order) and returns the loss.
// The two overloads run the identical computation; the Dual instantiation
// is what carries tangents for Hessian-vector products.
class DiffProgram {
public:
    virtual ~DiffProgram() = default;
    virtual Var build(Tape<double>& tape, std::span<const Var> params) const = 0;
    virtual Var build(Tape<Dual>& tape, std::span<const Var> params) const = 0;
};

namespace detail {

template <class F>
class GenericProgram final : public DiffProgram {
public:
    explicit GenericProgram(F f) : f_(std::move(f)) {}
    Var build(Tape<double>& tape, std::span<const Var> params) const override {
        return f_(tape, params);
    }
    Var build(Tape<Dual>& tape, std::span<const Var> params) const override {
        return f_(tape, params);
    }

private:
    F f_;
};

}  // namespace detail

// Wrap a generic lambda (auto& tape, std::span<const Var>) -> Var.
template <class F>
std::unique_ptr<DiffProgram> make_program(F f) {
    return std::make_unique<detail::GenericProgram<F>>(std::move(f));
}

// Convenience for losses over an unstructured parameter block: a layout with
// a single 1xP weight slot.
inline ParamVector flat_param_vector(Tensor flat) {
    ParamLayout layout;
    layout.slots.push_back({1, ParamRole::kWeight, 0, 1, flat.numel()});
    return ParamVector(std::move(layout), std::move(flat));
}

inline TensorT<Dual> to_dual(const Tensor& t, const Tensor* tangent = nullptr) {
    TensorT<Dual> out(t.shape());
    for (std::int64_t i = 0; i < t.numel(); ++i)
        out[i] = Dual(t[i], tangent ? (*tangent)[i] : 0.0);
    return out;
}

namespace detail {

template <class S>
std::vector<Var> make_param_leaves(Tape<S>& tape, const ParamVector& theta,
                                   const Tensor* tangent) {
    std::vector<Var> leaves;
    leaves.reserve(theta.layout().slots.size());
    for (const auto& slot : theta.layout().slots) {
        TensorT<S> block({slot.rows, slot.cols});
        for (std::int64_t i = 0; i < slot.numel(); ++i) {
            if constexpr (std::is_same_v<S, Dual>) {
                block[i] = Dual(theta.flat()[slot.offset + i],
                                tangent ? (*tangent)[slot.offset + i] : 0.0);
            } else {
                block[i] = theta.flat()[slot.offset + i];
            }
        }
        leaves.push_back(tape.leaf(std::move(block)));
    }
    return leaves;
}

template <class S>
[[noreturn]] void throw_nonfinite(const Tape<S>& tape, const char* where) {
    const int id = tape.first_nonfinite();
    std::string desc = id >= 0 ? std::string(op_name(tape.node(id).op)) + " node #" +
                                     std::to_string(id)
                               : std::string("(adjoint pass)");
    throw NumericError(std::string("non-finite value in ") + where + " at " + desc);
}

}  // namespace detail

struct GradResult {
    double loss = 0.0;
    Tensor grad;
};

// loss and dL/dtheta as a flat vector, via one reverse sweep.
inline GradResult value_and_grad(const DiffProgram& f, const ParamVector& theta) {
    Tape<double> tape;
    auto leaves = detail::make_param_leaves(tape, theta, nullptr);
    const Var loss = f.build(tape, leaves);
    if (tape.value(loss).numel() != 1)
        throw ConfigError("loss program must produce a scalar");
    if (!std::isfinite(tape.value(loss)[0])) detail::throw_nonfinite(tape, "forward pass");

    auto adj = tape.backward(loss);
    GradResult out;
    out.loss = tape.value(loss)[0];
    out.grad = Tensor({theta.size()});
    const auto& slots = theta.layout().slots;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const Tensor& g = adj[static_cast<std::size_t>(leaves[s].id)];
        for (std::int64_t i = 0; i < slots[s].numel(); ++i)
            out.grad[slots[s].offset + i] = g[i];
    }
    if (!out.grad.all_finite()) detail::throw_nonfinite(tape, "gradient");
    return out;
}

inline Tensor grad(const DiffProgram& f, const ParamVector& theta) {
    return value_and_grad(f, theta).grad;
}

struct HvpResult {
    double loss = 0.0;
    Tensor grad;  // byproduct of the Dual sweep, free to return
    Tensor hvp;
};

// Exact H*v at theta: the whole forward+reverse pass runs on Dual numbers
// seeded with tangent v, so the tangent of the gradient is H*v to rounding.
inline HvpResult hvp_full(const DiffProgram& f, const ParamVector& theta, const Tensor& v) {
    if (v.numel() != theta.size())
        throw ConfigError("hvp direction length " + std::to_string(v.numel()) +
                          " != parameter count " + std::to_string(theta.size()));
    if (norm2(v) == 0.0) throw ConfigError("hvp requires a non-zero direction vector");

    Tape<Dual> tape;
    auto leaves = detail::make_param_leaves(tape, theta, &v);
    const Var loss = f.build(tape, leaves);
    if (tape.value(loss).numel() != 1)
        throw ConfigError("loss program must produce a scalar");
    if (!is_finite(tape.value(loss)[0])) detail::throw_nonfinite(tape, "forward pass");

    auto adj = tape.backward(loss);
    HvpResult out;
    out.loss = tape.value(loss)[0].v;
    out.grad = Tensor({theta.size()});
    out.hvp = Tensor({theta.size()});
    const auto& slots = theta.layout().slots;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        const TensorT<Dual>& g = adj[static_cast<std::size_t>(leaves[s].id)];
        for (std::int64_t i = 0; i < slots[s].numel(); ++i) {
            out.grad[slots[s].offset + i] = g[i].v;
            out.hvp[slots[s].offset + i] = g[i].d;
        }
    }
    if (!out.grad.all_finite() || !out.hvp.all_finite())
        detail::throw_nonfinite(tape, "hessian-vector product");
    return out;
}

inline Tensor hvp(const DiffProgram& f, const ParamVector& theta, const Tensor& v) {
    return hvp_full(f, theta, v).hvp;
}

// Central-difference reference (grad(theta + eps v) - grad(theta - eps v)) / 2eps.
// Deliberately routed through the plain double gradient path so it stays an
// independent check on the Dual machinery.
inline Tensor hvp_fd_oracle(const DiffProgram& f, const ParamVector& theta, const Tensor& v,
                            double eps = 1e-5) {
    if (!(eps > 0.0)) throw ConfigError("hvp_fd_oracle requires eps > 0");
    if (v.numel() != theta.size()) throw ConfigError("hvp_fd_oracle direction length mismatch");

    ParamVector plus(theta.layout(), theta.flat() + (eps * v));
    ParamVector minus(theta.layout(), theta.flat() - (eps * v));
    const Tensor gp = grad(f, plus);
    const Tensor gm = grad(f, minus);
    return (0.5 / eps) * (gp - gm);
}

}  // namespace nfp
