#pragma once

#include <cmath>

namespace nfp {

// First-order dual number: v carries the primal value, d the directional
// derivative. Running an entire forward+reverse gradient computation on Dual
// instead of double differentiates the gradient itself, which is how exact
// Hessian-vector products are obtained (forward-over-reverse).
struct Dual {
    double v = 0.0;
    double d = 0.0;

    Dual() = default;
    Dual(double value) : v(value), d(0.0) {}  // NOLINT: implicit by design
    Dual(double value, double dot) : v(value), d(dot) {}

    Dual& operator+=(const Dual& o) {
        v += o.v;
        d += o.d;
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        d -= o.d;
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        d = d * o.v + v * o.d;
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        const double inv = 1.0 / o.v;
        const double q = v * inv;
        d = (d - q * o.d) * inv;
        v = q;
        return *this;
    }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }

inline Dual sin(const Dual& x) { return {std::sin(x.v), std::cos(x.v) * x.d}; }
inline Dual cos(const Dual& x) { return {std::cos(x.v), -std::sin(x.v) * x.d}; }

inline Dual exp(const Dual& x) {
    const double e = std::exp(x.v);
    return {e, e * x.d};
}

inline Dual log(const Dual& x) { return {std::log(x.v), x.d / x.v}; }

inline Dual log1p(const Dual& x) { return {std::log1p(x.v), x.d / (1.0 + x.v)}; }

inline Dual sqrt(const Dual& x) {
    const double s = std::sqrt(x.v);
    return {s, 0.5 * x.d / s};
}

// Scalar accessors so numeric code can be written once for double and Dual.
inline double primal(double x) { return x; }
inline double primal(const Dual& x) { return x.v; }
inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Dual& x) {
    return std::isfinite(x.v) && std::isfinite(x.d);
}

}  // namespace nfp
