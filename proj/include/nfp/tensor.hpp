#pragma once

#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nfp/dual.hpp"
#include "nfp/errors.hpp"

namespace nfp {

using Shape = std::vector<std::int64_t>;

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ']';
    return os.str();
}

// Dense row-major array of S (double for values, Dual for HVP passes).
// Rank is 1 or 2 everywhere in this library.
template <class S>
class TensorT {
public:
    TensorT() = default;

    explicit TensorT(Shape shape)
        : shape_(std::move(shape)), data_(static_cast<std::size_t>(shape_numel(shape_))) {}

    TensorT(Shape shape, std::vector<S> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (shape_numel(shape_) != static_cast<std::int64_t>(data_.size()))
            throw ConfigError("tensor shape " + shape_str(shape_) + " does not match data size " +
                              std::to_string(data_.size()));
    }

    static TensorT zeros(Shape shape) { return TensorT(std::move(shape)); }

    static TensorT full(Shape shape, S value) {
        TensorT t(std::move(shape));
        for (auto& x : t.data_) x = value;
        return t;
    }

    static TensorT scalar(S value) { return TensorT({1}, {value}); }

    const Shape& shape() const { return shape_; }
    std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
    std::int64_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
    std::int64_t cols() const { return shape_.size() == 2 ? shape_[1] : (shape_.empty() ? 0 : shape_[0]); }

    S* data() { return data_.data(); }
    const S* data() const { return data_.data(); }
    std::span<S> flat() { return {data_.data(), data_.size()}; }
    std::span<const S> flat() const { return {data_.data(), data_.size()}; }

    S& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
    const S& operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    S& at(std::int64_t r, std::int64_t c) { return data_[static_cast<std::size_t>(r * cols() + c)]; }
    const S& at(std::int64_t r, std::int64_t c) const {
        return data_[static_cast<std::size_t>(r * cols() + c)];
    }

    bool all_finite() const {
        for (const auto& x : data_)
            if (!is_finite(x)) return false;
        return true;
    }

    void fill(S value) {
        for (auto& x : data_) x = value;
    }

    bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

private:
    Shape shape_;
    std::vector<S> data_;
};

using Tensor = TensorT<double>;

// ---------------------------------------------------------------------------
// Matrix kernels. The NN kernel accumulates each output strictly in k order
// (i-k-j loop); tests compare it bit-for-bit against a naive per-element
// reference, so keep that ordering if touching this.
// ---------------------------------------------------------------------------

// C[M x N] = A[M x K] * B[K x N]
template <class S>
void gemm_nn(const S* a, const S* b, S* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        S* crow = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) crow[j] = S(0.0);
        const S* arow = a + i * k;
        for (std::int64_t p = 0; p < k; ++p) {
            const S aip = arow[p];
            const S* brow = b + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

// C[M x N] += A[M x K] * B[N x K]^T  (rows of B are the columns of B^T)
template <class S>
void gemm_nt_acc(const S* a, const S* b, S* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        S* crow = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) {
            const S* brow = b + j * k;
            S acc = S(0.0);
            for (std::int64_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C[K x N] += A[M x K]^T * B[M x N]
template <class S>
void gemm_tn_acc(const S* a, const S* b, S* c, std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        const S* arow = a + i * k;
        const S* brow = b + i * n;
        for (std::int64_t p = 0; p < k; ++p) {
            const S aip = arow[p];
            S* crow = c + p * n;
            for (std::int64_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
        }
    }
}

template <class S>
TensorT<S> matmul(const TensorT<S>& a, const TensorT<S>& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
        throw ConfigError("matmul shape mismatch: " + shape_str(a.shape()) + " * " +
                          shape_str(b.shape()));
    TensorT<S> c({a.shape()[0], b.shape()[1]});
    gemm_nn(a.data(), b.data(), c.data(), a.shape()[0], a.shape()[1], b.shape()[1]);
    return c;
}

// ---------------------------------------------------------------------------
// Small elementwise helpers (double only; optimizer/diagnostic plumbing).
// ---------------------------------------------------------------------------

inline Tensor operator+(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("tensor add shape mismatch");
    Tensor c(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) c[i] = a[i] + b[i];
    return c;
}

inline Tensor operator-(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("tensor sub shape mismatch");
    Tensor c(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) c[i] = a[i] - b[i];
    return c;
}

inline Tensor operator*(double s, const Tensor& a) {
    Tensor c(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) c[i] = s * a[i];
    return c;
}

inline Tensor hadamard(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) throw ConfigError("tensor hadamard shape mismatch");
    Tensor c(a.shape());
    for (std::int64_t i = 0; i < a.numel(); ++i) c[i] = a[i] * b[i];
    return c;
}

inline double dot(const Tensor& a, const Tensor& b) {
    if (a.numel() != b.numel()) throw ConfigError("tensor dot length mismatch");
    double s = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Tensor& a) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) s += a[i] * a[i];
    return std::sqrt(s);
}

inline double max_abs(const Tensor& a) {
    double m = 0.0;
    for (std::int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i]));
    return m;
}

}  // namespace nfp
