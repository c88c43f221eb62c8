#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "nfp/dual.hpp"
#include "nfp/errors.hpp"
#include "nfp/param_vector.hpp"
#include "nfp/rng.hpp"
#include "nfp/tensor.hpp"

using namespace nfp;

// ---------------------------------------------------------------- rng

TEST(Rng, DeterministicBySeed) {
    Rng a(42), b(42), c(43);
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        if (x != c.next_u64()) any_diff = true;
    }
    EXPECT_TRUE(any_diff);
}

TEST(Rng, SubstreamsDiffer) {
    Rng a = Rng::substream(7, 1), b = Rng::substream(7, 2);
    bool any_diff = false;
    for (int i = 0; i < 64; ++i) any_diff |= (a.next_u64() != b.next_u64());
    EXPECT_TRUE(any_diff);
}

TEST(Rng, UniformInHalfOpenUnit) {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, UniformRangeRespectsBounds) {
    Rng r(2);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform(-3.0, 5.0);
        EXPECT_GE(u, -3.0);
        EXPECT_LT(u, 5.0);
    }
}

TEST(Rng, RademacherIsSignsOnly) {
    Rng r(3);
    int pos = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double s = r.rademacher();
        ASSERT_TRUE(s == 1.0 || s == -1.0);
        pos += s > 0;
    }
    // Balanced to ~5 sigma.
    EXPECT_NEAR(static_cast<double>(pos) / n, 0.5, 5.0 * 0.5 / std::sqrt(n));
}

TEST(Rng, NormalMomentsRoughlyStandard) {
    Rng r(4);
    const int n = 200000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s1 += x;
        s2 += x * x;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.02);
    EXPECT_NEAR(s2 / n, 1.0, 0.03);
}

TEST(Rng, StateRoundTrip) {
    Rng r(99);
    for (int i = 0; i < 17; ++i) r.next_u64();
    const auto snap = r.state();
    std::vector<std::uint64_t> want;
    for (int i = 0; i < 20; ++i) want.push_back(r.next_u64());
    Rng other(1);
    other.set_state(snap);
    for (int i = 0; i < 20; ++i) EXPECT_EQ(other.next_u64(), want[static_cast<std::size_t>(i)]);
}

TEST(Rng, BelowCoversAllResidues) {
    Rng r(5);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t k = r.below(7);
        ASSERT_LT(k, 7u);
        seen.insert(k);
    }
    EXPECT_EQ(seen.size(), 7u);
}

// ---------------------------------------------------------------- dual

TEST(Dual, ArithmeticCarriesTangent) {
    const Dual x(3.0, 1.0);  // d/dx at x=3
    const Dual y(2.0, 0.0);

    Dual s = x + y;
    EXPECT_DOUBLE_EQ(s.v, 5.0);
    EXPECT_DOUBLE_EQ(s.d, 1.0);

    Dual p = x * y;
    EXPECT_DOUBLE_EQ(p.v, 6.0);
    EXPECT_DOUBLE_EQ(p.d, 2.0);

    Dual q = x / y;
    EXPECT_DOUBLE_EQ(q.v, 1.5);
    EXPECT_DOUBLE_EQ(q.d, 0.5);

    Dual d = x - y;
    EXPECT_DOUBLE_EQ(d.v, 1.0);
    EXPECT_DOUBLE_EQ(d.d, 1.0);
}

TEST(Dual, MathFunctionDerivatives) {
    const Dual x(0.7, 1.0);
    using std::cos;
    using std::exp;
    using std::sin;
    using std::sqrt;
    EXPECT_NEAR(sin(x).d, std::cos(0.7), 1e-15);
    EXPECT_NEAR(cos(x).d, -std::sin(0.7), 1e-15);
    EXPECT_NEAR(exp(x).d, std::exp(0.7), 1e-15);
    EXPECT_NEAR(sqrt(x).d, 0.5 / std::sqrt(0.7), 1e-15);
    EXPECT_NEAR(log(x).d, 1.0 / 0.7, 1e-15);
}

TEST(Dual, ChainThroughComposition) {
    // f(x) = sin(x^2), f'(x) = 2x cos(x^2)
    const double x0 = 1.3;
    Dual x(x0, 1.0);
    Dual f = sin(x * x);
    EXPECT_NEAR(f.v, std::sin(x0 * x0), 1e-15);
    EXPECT_NEAR(f.d, 2 * x0 * std::cos(x0 * x0), 1e-14);
}

TEST(Dual, ComparisonsUsePrimal) {
    EXPECT_TRUE(Dual(1.0, 100.0) < Dual(2.0, -100.0));
    EXPECT_TRUE(Dual(3.0, 0.0) > 2.5);
}

// ---------------------------------------------------------------- tensor

TEST(Tensor, ConstructionAndIndexing) {
    Tensor t({2, 3});
    EXPECT_EQ(t.rows(), 2);
    EXPECT_EQ(t.cols(), 3);
    EXPECT_EQ(t.numel(), 6);
    for (std::int64_t i = 0; i < 6; ++i) EXPECT_EQ(t[i], 0.0);
    t.at(1, 2) = 5.0;
    EXPECT_EQ(t[5], 5.0);
}

TEST(Tensor, MatmulKnownProduct) {
    Tensor a({2, 2});
    a[0] = 1; a[1] = 2; a[2] = 3; a[3] = 4;
    Tensor b({2, 2});
    b[0] = 5; b[1] = 6; b[2] = 7; b[3] = 8;
    Tensor c = matmul(a, b);
    EXPECT_DOUBLE_EQ(c.at(0, 0), 19.0);
    EXPECT_DOUBLE_EQ(c.at(0, 1), 22.0);
    EXPECT_DOUBLE_EQ(c.at(1, 0), 43.0);
    EXPECT_DOUBLE_EQ(c.at(1, 1), 50.0);
}

TEST(Tensor, MatmulShapeMismatchThrows) {
    Tensor a({2, 3}), b({2, 3});
    EXPECT_THROW(matmul(a, b), ConfigError);
}

TEST(Tensor, BackwardKernelsMatchNaiveBitForBit) {
    Rng rng(11);
    const std::int64_t m = 5, k = 7, n = 4;
    std::vector<double> A(static_cast<std::size_t>(m * k)), B(static_cast<std::size_t>(n * k)),
        C(static_cast<std::size_t>(m * n));
    for (auto& x : A) x = rng.normal();
    for (auto& x : B) x = rng.normal();
    for (auto& x : C) x = rng.normal();

    // gemm_nt_acc: C[MxN] += A[MxK] * B[NxK]^T
    std::vector<double> got(static_cast<std::size_t>(m * n), 0.25), want = got;
    gemm_nt_acc(A.data(), B.data(), got.data(), m, k, n);
    // The kernel forms each dot product from zero and folds it into C once.
    for (std::int64_t i = 0; i < m; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::int64_t kk = 0; kk < k; ++kk)
                s += A[static_cast<std::size_t>(i * k + kk)] * B[static_cast<std::size_t>(j * k + kk)];
            want[static_cast<std::size_t>(i * n + j)] += s;
        }
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], want[i]);

    // gemm_tn_acc: C[KxN] += A[MxK]^T * C2[MxN]
    std::vector<double> got2(static_cast<std::size_t>(k * n), -0.5), want2 = got2;
    gemm_tn_acc(A.data(), C.data(), got2.data(), m, k, n);
    for (std::int64_t kk = 0; kk < k; ++kk)
        for (std::int64_t j = 0; j < n; ++j) {
            double s = want2[static_cast<std::size_t>(kk * n + j)];
            for (std::int64_t i = 0; i < m; ++i)
                s += A[static_cast<std::size_t>(i * k + kk)] * C[static_cast<std::size_t>(i * n + j)];
            want2[static_cast<std::size_t>(kk * n + j)] = s;
        }
    for (std::size_t i = 0; i < got2.size(); ++i) EXPECT_EQ(got2[i], want2[i]);
}

TEST(Tensor, ElementwiseHelpers) {
    Tensor a({3});
    a[0] = 1; a[1] = -2; a[2] = 3;
    Tensor b({3});
    b[0] = 4; b[1] = 5; b[2] = -6;

    Tensor s = a + b;
    EXPECT_DOUBLE_EQ(s[0], 5.0);
    EXPECT_DOUBLE_EQ(s[1], 3.0);
    EXPECT_DOUBLE_EQ(s[2], -3.0);

    Tensor d = a - b;
    EXPECT_DOUBLE_EQ(d[1], -7.0);

    Tensor h = hadamard(a, b);
    EXPECT_DOUBLE_EQ(h[2], -18.0);

    EXPECT_DOUBLE_EQ(dot(a, b), 4 - 10 - 18);
    EXPECT_DOUBLE_EQ(norm2(a), std::sqrt(14.0));
    EXPECT_DOUBLE_EQ(max_abs(b), 6.0);

    Tensor sc = 2.0 * a;
    EXPECT_DOUBLE_EQ(sc[1], -4.0);
}

TEST(Tensor, AllFiniteDetectsNan) {
    Tensor t({2});
    EXPECT_TRUE(t.all_finite());
    t[1] = std::nan("");
    EXPECT_FALSE(t.all_finite());
}

// ---------------------------------------------------------------- params

TEST(ParamVector, LayoutContiguityEnforced) {
    ParamLayout bad;
    bad.slots.push_back({1, ParamRole::kWeight, 0, 2, 3});
    bad.slots.push_back({1, ParamRole::kBias, 7, 1, 3});  // gap: should start at 6
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ParamVector, ViewsAliasFlatStorage) {
    ParamLayout layout;
    layout.slots.push_back({1, ParamRole::kWeight, 0, 2, 2});
    layout.slots.push_back({1, ParamRole::kBias, 4, 1, 2});
    ParamVector p(layout);
    EXPECT_EQ(p.size(), 6);

    auto w = p.view(layout.slots[0]);
    w[3] = 9.0;
    EXPECT_DOUBLE_EQ(p.flat()[3], 9.0);

    auto b = p.view(layout.slots[1]);
    b[1] = -1.0;
    EXPECT_DOUBLE_EQ(p.flat()[5], -1.0);
}

TEST(ParamVector, LengthMismatchThrows) {
    ParamLayout layout;
    layout.slots.push_back({1, ParamRole::kWeight, 0, 2, 2});
    EXPECT_THROW(ParamVector(layout, Tensor({3})), ConfigError);
}
