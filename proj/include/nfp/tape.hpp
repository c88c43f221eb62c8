#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nfp/activation.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Handle to a tape node.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

enum class OpKind {
    kLeaf,      // differentiable input (parameters)
    kConst,     // non-differentiable input (data, targets)
    kMatMul,    // A[MxK] * B[KxN]
    kAddRow,    // X[NxM] + row broadcast b[1xM]
    kAdd,
    kSub,
    kMul,       // elementwise
    kScale,     // x * c, c a plain double
    kSquare,
    kAct,       // elementwise activation
    kSoftplus,  // log(1 + e^x), stable form
    kSum,       // -> scalar
    kMean,      // -> scalar
};

inline const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::kLeaf: return "leaf";
        case OpKind::kConst: return "const";
        case OpKind::kMatMul: return "matmul";
        case OpKind::kAddRow: return "add_row";
        case OpKind::kAdd: return "add";
        case OpKind::kSub: return "sub";
        case OpKind::kMul: return "mul";
        case OpKind::kScale: return "scale";
        case OpKind::kSquare: return "square";
        case OpKind::kAct: return "activation";
        case OpKind::kSoftplus: return "softplus";
        case OpKind::kSum: return "sum";
        case OpKind::kMean: return "mean";
    }
    return "?";
}

template <class S>
S stable_softplus(const S& x) {
    using std::exp;
    using std::log1p;
    if (primal(x) > 0.0) return x + log1p(exp(-x));
    return log1p(exp(x));
}

template <class S>
S stable_sigmoid(const S& x) {
    using std::exp;
    if (primal(x) >= 0.0) return S(1.0) / (S(1.0) + exp(-x));
    const S e = exp(x);
    return e / (S(1.0) + e);
}

// Reverse-mode tape over scalar type S. Nodes are appended in evaluation
// order, so the insertion order is already topological. Instantiated at
// S = double for gradients and S = Dual for Hessian-vector products.
//
// Not shareable across threads; independent computations get their own tape.
template <class S>
class Tape {
public:
    using T = TensorT<S>;

    struct Node {
        OpKind op;
        int a = -1;
        int b = -1;
        T value;
        ActivationKind act{};  // kAct only
        double c = 0.0;        // kScale only
    };

    int size() const { return static_cast<int>(nodes_.size()); }
    const T& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
    const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }

    Var leaf(T v) { return push({OpKind::kLeaf, -1, -1, std::move(v)}); }
    Var constant(T v) { return push({OpKind::kConst, -1, -1, std::move(v)}); }

    // Constant from plain-double data (targets, encoded inputs), widened to S.
    Var constant_real(const Tensor& t) {
        T out(t.shape());
        for (std::int64_t i = 0; i < t.numel(); ++i) out[i] = S(t[i]);
        return constant(std::move(out));
    }

    Var matmul(Var a, Var b) {
        return push({OpKind::kMatMul, a.id, b.id, nfp::matmul(value(a), value(b))});
    }

    Var add_row(Var x, Var row) {
        const T& xv = value(x);
        const T& rv = value(row);
        if (rv.numel() != xv.cols())
            throw ConfigError("add_row: row length " + std::to_string(rv.numel()) +
                              " != matrix cols " + std::to_string(xv.cols()));
        T out(xv.shape());
        const std::int64_t n = xv.rows(), m = xv.cols();
        for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t j = 0; j < m; ++j) out[i * m + j] = xv[i * m + j] + rv[j];
        return push({OpKind::kAddRow, x.id, row.id, std::move(out)});
    }

    Var add(Var a, Var b) { return binary_ew(OpKind::kAdd, a, b); }
    Var sub(Var a, Var b) { return binary_ew(OpKind::kSub, a, b); }
    Var mul(Var a, Var b) { return binary_ew(OpKind::kMul, a, b); }

    Var scale(Var x, double c) {
        T out(value(x).shape());
        const T& xv = value(x);
        for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = S(c) * xv[i];
        Node n{OpKind::kScale, x.id, -1, std::move(out)};
        n.c = c;
        return push(std::move(n));
    }

    Var square(Var x) {
        const T& xv = value(x);
        T out(xv.shape());
        for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] * xv[i];
        return push({OpKind::kSquare, x.id, -1, std::move(out)});
    }

    Var activation(Var x, const ActivationKind& kind) {
        const T& xv = value(x);
        T out(xv.shape());
        for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = activate(kind, xv[i]);
        Node n{OpKind::kAct, x.id, -1, std::move(out)};
        n.act = kind;
        return push(std::move(n));
    }

    Var softplus(Var x) {
        const T& xv = value(x);
        T out(xv.shape());
        for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = stable_softplus(xv[i]);
        return push({OpKind::kSoftplus, x.id, -1, std::move(out)});
    }

    Var sum(Var x) {
        const T& xv = value(x);
        S acc(0.0);
        for (std::int64_t i = 0; i < xv.numel(); ++i) acc += xv[i];
        return push({OpKind::kSum, x.id, -1, T::scalar(acc)});
    }

    Var mean(Var x) {
        const T& xv = value(x);
        S acc(0.0);
        for (std::int64_t i = 0; i < xv.numel(); ++i) acc += xv[i];
        return push({OpKind::kMean, x.id, -1, T::scalar(acc * S(1.0 / static_cast<double>(xv.numel())))});
    }

    // Adjoints of every node w.r.t. the (scalar) root. Fixed reverse order,
    // so results are bit-deterministic for identical tapes.
    std::vector<T> backward(Var root) const {
        if (value(root).numel() != 1)
            throw ConfigError("backward requires a scalar root");
        std::vector<T> adj(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) adj[i] = T::zeros(nodes_[i].value.shape());
        adj[static_cast<std::size_t>(root.id)][0] = S(1.0);

        for (int id = root.id; id >= 0; --id) {
            const Node& n = nodes_[static_cast<std::size_t>(id)];
            const T& dy = adj[static_cast<std::size_t>(id)];
            switch (n.op) {
                case OpKind::kLeaf:
                case OpKind::kConst:
                    break;
                case OpKind::kMatMul: {
                    const T& a = nodes_[static_cast<std::size_t>(n.a)].value;
                    const T& b = nodes_[static_cast<std::size_t>(n.b)].value;
                    const std::int64_t m = a.rows(), k = a.cols(), nn = b.cols();
                    // dA += dC * B^T ; dB += A^T * dC
                    gemm_nt_acc(dy.data(), b.data(), adj[static_cast<std::size_t>(n.a)].data(), m, nn, k);
                    gemm_tn_acc(a.data(), dy.data(), adj[static_cast<std::size_t>(n.b)].data(), m, k, nn);
                    break;
                }
                case OpKind::kAddRow: {
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    T& db = adj[static_cast<std::size_t>(n.b)];
                    const std::int64_t rows = dy.rows(), cols = dy.cols();
                    for (std::int64_t i = 0; i < rows; ++i)
                        for (std::int64_t j = 0; j < cols; ++j) {
                            dx[i * cols + j] += dy[i * cols + j];
                            db[j] += dy[i * cols + j];
                        }
                    break;
                }
                case OpKind::kAdd: {
                    accumulate(adj[static_cast<std::size_t>(n.a)], dy, S(1.0));
                    accumulate(adj[static_cast<std::size_t>(n.b)], dy, S(1.0));
                    break;
                }
                case OpKind::kSub: {
                    accumulate(adj[static_cast<std::size_t>(n.a)], dy, S(1.0));
                    accumulate(adj[static_cast<std::size_t>(n.b)], dy, S(-1.0));
                    break;
                }
                case OpKind::kMul: {
                    const T& a = nodes_[static_cast<std::size_t>(n.a)].value;
                    const T& b = nodes_[static_cast<std::size_t>(n.b)].value;
                    T& da = adj[static_cast<std::size_t>(n.a)];
                    T& db = adj[static_cast<std::size_t>(n.b)];
                    for (std::int64_t i = 0; i < dy.numel(); ++i) {
                        da[i] += b[i] * dy[i];
                        db[i] += a[i] * dy[i];
                    }
                    break;
                }
                case OpKind::kScale:
                    accumulate(adj[static_cast<std::size_t>(n.a)], dy, S(n.c));
                    break;
                case OpKind::kSquare: {
                    const T& x = nodes_[static_cast<std::size_t>(n.a)].value;
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    for (std::int64_t i = 0; i < dy.numel(); ++i) dx[i] += S(2.0) * x[i] * dy[i];
                    break;
                }
                case OpKind::kAct: {
                    const T& x = nodes_[static_cast<std::size_t>(n.a)].value;
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    for (std::int64_t i = 0; i < dy.numel(); ++i)
                        dx[i] += activate_deriv(n.act, x[i]) * dy[i];
                    break;
                }
                case OpKind::kSoftplus: {
                    const T& x = nodes_[static_cast<std::size_t>(n.a)].value;
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    for (std::int64_t i = 0; i < dy.numel(); ++i)
                        dx[i] += stable_sigmoid(x[i]) * dy[i];
                    break;
                }
                case OpKind::kSum: {
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    for (std::int64_t i = 0; i < dx.numel(); ++i) dx[i] += dy[0];
                    break;
                }
                case OpKind::kMean: {
                    T& dx = adj[static_cast<std::size_t>(n.a)];
                    const S w = dy[0] * S(1.0 / static_cast<double>(dx.numel()));
                    for (std::int64_t i = 0; i < dx.numel(); ++i) dx[i] += w;
                    break;
                }
            }
        }
        return adj;
    }

    // Recompute every non-input node from its inputs and compare with the
    // cached value. Returns the id of the first mismatching node, or -1.
    int replay_mismatch() const {
        Tape<S> fresh;
        std::vector<Var> remap(nodes_.size());
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            const Node& n = nodes_[i];
            Var v;
            switch (n.op) {
                case OpKind::kLeaf: v = fresh.leaf(n.value); break;
                case OpKind::kConst: v = fresh.constant(n.value); break;
                case OpKind::kMatMul: v = fresh.matmul(remap[static_cast<std::size_t>(n.a)], remap[static_cast<std::size_t>(n.b)]); break;
                case OpKind::kAddRow: v = fresh.add_row(remap[static_cast<std::size_t>(n.a)], remap[static_cast<std::size_t>(n.b)]); break;
                case OpKind::kAdd: v = fresh.add(remap[static_cast<std::size_t>(n.a)], remap[static_cast<std::size_t>(n.b)]); break;
                case OpKind::kSub: v = fresh.sub(remap[static_cast<std::size_t>(n.a)], remap[static_cast<std::size_t>(n.b)]); break;
                case OpKind::kMul: v = fresh.mul(remap[static_cast<std::size_t>(n.a)], remap[static_cast<std::size_t>(n.b)]); break;
                case OpKind::kScale: v = fresh.scale(remap[static_cast<std::size_t>(n.a)], n.c); break;
                case OpKind::kSquare: v = fresh.square(remap[static_cast<std::size_t>(n.a)]); break;
                case OpKind::kAct: v = fresh.activation(remap[static_cast<std::size_t>(n.a)], n.act); break;
                case OpKind::kSoftplus: v = fresh.softplus(remap[static_cast<std::size_t>(n.a)]); break;
                case OpKind::kSum: v = fresh.sum(remap[static_cast<std::size_t>(n.a)]); break;
                case OpKind::kMean: v = fresh.mean(remap[static_cast<std::size_t>(n.a)]); break;
            }
            remap[i] = v;
            const T& got = fresh.value(v);
            for (std::int64_t j = 0; j < got.numel(); ++j)
                if (!bits_equal(got[j], n.value[j])) return static_cast<int>(i);
        }
        return -1;
    }

    // First node holding a non-finite value, or -1. Used by the gradient/HVP
    // entry points to attach the offending op to NumericError.
    int first_nonfinite() const {
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!nodes_[i].value.all_finite()) return static_cast<int>(i);
        return -1;
    }

private:
    Var push(Node n) {
        nodes_.push_back(std::move(n));
        return Var{static_cast<int>(nodes_.size()) - 1};
    }

    Var binary_ew(OpKind op, Var a, Var b) {
        const T& av = value(a);
        const T& bv = value(b);
        if (!av.same_shape(bv))
            throw ConfigError(std::string(op_name(op)) + ": shape mismatch " +
                              shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
        T out(av.shape());
        for (std::int64_t i = 0; i < av.numel(); ++i) {
            switch (op) {
                case OpKind::kAdd: out[i] = av[i] + bv[i]; break;
                case OpKind::kSub: out[i] = av[i] - bv[i]; break;
                default: out[i] = av[i] * bv[i]; break;
            }
        }
        return push({op, a.id, b.id, std::move(out)});
    }

    static void accumulate(T& dst, const T& src, S w) {
        for (std::int64_t i = 0; i < dst.numel(); ++i) dst[i] += w * src[i];
    }

    static bool bits_equal(double a, double b) {
        return a == b || (a != a && b != b);
    }
    static bool bits_equal(const Dual& a, const Dual& b) {
        return bits_equal(a.v, b.v) && bits_equal(a.d, b.d);
    }

    std::vector<Node> nodes_;
};

}  // namespace nfp
