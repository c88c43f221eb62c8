#pragma once

#include <cmath>
#include <string>

#include "nfp/dual.hpp"
#include "nfp/errors.hpp"

namespace nfp {

// Componentwise activation for the hidden layers: relu, sine(w0),
// gaussian(sigma), wavelet(w0, s) as a real Gabor (cosine-modulated
// Gaussian), or sinc(a) with the removable singularity filled in.
struct ActivationKind {
    enum class Tag { kRelu, kSine, kGaussian, kWavelet, kSinc };

    Tag tag = Tag::kRelu;
    double p0 = 0.0;  // sine/wavelet: w0, gaussian: sigma, sinc: a
    double p1 = 0.0;  // wavelet: envelope width s

    static ActivationKind relu() { return {Tag::kRelu, 0.0, 0.0}; }
    static ActivationKind sine(double w0) {
        require_pos(w0, "sine w0");
        return {Tag::kSine, w0, 0.0};
    }
    static ActivationKind gaussian(double sigma) {
        require_pos(sigma, "gaussian sigma");
        return {Tag::kGaussian, sigma, 0.0};
    }
    static ActivationKind wavelet(double w0, double s) {
        require_pos(w0, "wavelet w0");
        require_pos(s, "wavelet s");
        return {Tag::kWavelet, w0, s};
    }
    static ActivationKind sinc(double a) {
        require_pos(a, "sinc a");
        return {Tag::kSinc, a, 0.0};
    }

    bool smooth() const { return tag != Tag::kRelu; }

    std::string name() const {
        switch (tag) {
            case Tag::kRelu: return "relu";
            case Tag::kSine: return "sine";
            case Tag::kGaussian: return "gaussian";
            case Tag::kWavelet: return "wavelet";
            case Tag::kSinc: return "sinc";
        }
        return "?";
    }

private:
    static void require_pos(double v, const char* what) {
        if (!(v > 0.0)) throw ConfigError(std::string(what) + " must be > 0");
    }
};

// phi(x). Written once over the scalar type so the same code runs on double
// (values, gradients) and Dual (Hessian-vector passes).
template <class S>
S activate(const ActivationKind& k, const S& x) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (k.tag) {
        case ActivationKind::Tag::kRelu:
            return primal(x) > 0.0 ? x : S(0.0);
        case ActivationKind::Tag::kSine:
            return sin(S(k.p0) * x);
        case ActivationKind::Tag::kGaussian: {
            const double inv2s2 = 1.0 / (2.0 * k.p0 * k.p0);
            return exp(S(-inv2s2) * x * x);
        }
        case ActivationKind::Tag::kWavelet: {
            const double inv2s2 = 1.0 / (2.0 * k.p1 * k.p1);
            return cos(S(k.p0) * x) * exp(S(-inv2s2) * x * x);
        }
        case ActivationKind::Tag::kSinc: {
            const S t = S(k.p0) * x;
            if (std::abs(primal(t)) < 1e-8) return S(1.0) - t * t * S(1.0 / 6.0);
            return sin(t) / t;
        }
    }
    return S(0.0);
}

// phi'(x), again generic over S; evaluating it on Dual supplies the
// second-derivative term that exact HVPs need. ReLU uses phi'(0) = 0.
template <class S>
S activate_deriv(const ActivationKind& k, const S& x) {
    using std::cos;
    using std::exp;
    using std::sin;
    switch (k.tag) {
        case ActivationKind::Tag::kRelu:
            return primal(x) > 0.0 ? S(1.0) : S(0.0);
        case ActivationKind::Tag::kSine:
            return S(k.p0) * cos(S(k.p0) * x);
        case ActivationKind::Tag::kGaussian: {
            const double inv_s2 = 1.0 / (k.p0 * k.p0);
            return exp(S(-0.5 * inv_s2) * x * x) * (S(-inv_s2) * x);
        }
        case ActivationKind::Tag::kWavelet: {
            const double inv_s2 = 1.0 / (k.p1 * k.p1);
            const S env = exp(S(-0.5 * inv_s2) * x * x);
            const S ph = S(k.p0) * x;
            return env * (S(-k.p0) * sin(ph) - S(inv_s2) * x * cos(ph));
        }
        case ActivationKind::Tag::kSinc: {
            const S t = S(k.p0) * x;
            // (t cos t - sin t)/t^2 cancels badly near 0; switch to the series.
            if (std::abs(primal(t)) < 1e-4)
                return S(k.p0) * (S(-1.0 / 3.0) * t + t * t * t * S(1.0 / 30.0));
            return S(k.p0) * (t * cos(t) - sin(t)) / (t * t);
        }
    }
    return S(0.0);
}

}  // namespace nfp
