#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nfp/activation.hpp"
#include "nfp/autodiff.hpp"
#include "nfp/param_vector.hpp"
#include "nfp/rng.hpp"
#include "nfp/tape.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Fourier feature lift: [sin(2^k pi x), cos(2^k pi x)] for k = 0..bands-1,
// with the raw coordinates prepended when include_input is set.
struct PositionalEncoding {
    int bands = 0;
    bool include_input = true;

    std::int64_t output_dim(std::int64_t in_dim) const {
        return in_dim * (2 * bands + (include_input ? 1 : 0));
    }
};

inline Tensor encode(const PositionalEncoding& pe, const Tensor& x) {
    const std::int64_t n = x.rows(), d = x.cols();
    const std::int64_t de = pe.output_dim(d);
    Tensor out({n, de});
    constexpr double kPi = 3.141592653589793238462643383279502884;
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t col = 0;
        if (pe.include_input)
            for (std::int64_t j = 0; j < d; ++j) out.at(i, col++) = x.at(i, j);
        double freq = kPi;
        for (int k = 0; k < pe.bands; ++k) {
            for (std::int64_t j = 0; j < d; ++j) out.at(i, col++) = std::sin(freq * x.at(i, j));
            for (std::int64_t j = 0; j < d; ++j) out.at(i, col++) = std::cos(freq * x.at(i, j));
            freq *= 2.0;
        }
    }
    return out;
}

enum class InitScheme { kAuto, kSiren, kGlorot };

// Architecture description: input dim, hidden widths, output dim, hidden
// activation, optional positional encoding. Depth L counts weight layers,
// so hidden.size() == L - 1 and the output layer is linear.
struct NetworkSpec {
    std::int64_t input_dim = 1;
    std::vector<std::int64_t> hidden;
    std::int64_t output_dim = 1;
    ActivationKind activation = ActivationKind::relu();
    bool has_encoding = false;
    PositionalEncoding encoding;
    InitScheme init = InitScheme::kAuto;

    int depth() const { return static_cast<int>(hidden.size()) + 1; }

    // Width of F_0, i.e. the network input after any encoding.
    std::int64_t lifted_input_dim() const {
        return has_encoding ? encoding.output_dim(input_dim) : input_dim;
    }

    void validate() const {
        if (input_dim < 1 || output_dim < 1)
            throw ConfigError("network input/output dims must be >= 1");
        if (hidden.empty()) throw ConfigError("network needs at least one hidden layer");
        for (auto w : hidden)
            if (w < 1) throw ConfigError("hidden widths must be >= 1");
        if (has_encoding && encoding.bands < 0)
            throw ConfigError("encoding bands must be >= 0");
    }

    // Layer width n_k for k = 0..L (0 = lifted input, L = output).
    std::int64_t width(int k) const {
        if (k == 0) return lifted_input_dim();
        if (k == depth()) return output_dim;
        return hidden[static_cast<std::size_t>(k - 1)];
    }

    std::string summary() const {
        std::string s = "act=" + activation.name() + "(" + std::to_string(activation.p0) + "," +
                        std::to_string(activation.p1) + ");in=" + std::to_string(input_dim);
        s += ";hidden=";
        for (std::size_t i = 0; i < hidden.size(); ++i)
            s += (i ? "," : "") + std::to_string(hidden[i]);
        s += ";out=" + std::to_string(output_dim);
        if (has_encoding)
            s += ";pe=" + std::to_string(encoding.bands) +
                 (encoding.include_input ? "+x" : "");
        return s;
    }
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t network_digest(const NetworkSpec& spec) { return fnv1a64(spec.summary()); }

inline ParamLayout make_layout(const NetworkSpec& spec) {
    spec.validate();
    ParamLayout layout;
    std::int64_t offset = 0;
    for (int k = 1; k <= spec.depth(); ++k) {
        const std::int64_t fan_in = spec.width(k - 1), fan_out = spec.width(k);
        layout.slots.push_back({k, ParamRole::kWeight, offset, fan_in, fan_out});
        offset += fan_in * fan_out;
        layout.slots.push_back({k, ParamRole::kBias, offset, 1, fan_out});
        offset += fan_out;
    }
    return layout;
}

// Weight init. Sine nets use the sinusoidal scheme (first layer +-1/fan_in,
// deeper +-sqrt(6/fan_in)/w0); everything else uses Glorot uniform
// +-sqrt(6/(fan_in+fan_out)). Biases start at zero.
inline ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed) {
    ParamVector theta(make_layout(spec));
    Rng rng = Rng::substream(seed, /*tag=*/0x1717);
    const bool siren = spec.init == InitScheme::kSiren ||
                       (spec.init == InitScheme::kAuto &&
                        spec.activation.tag == ActivationKind::Tag::kSine);
    for (const auto& slot : theta.layout().slots) {
        auto dst = theta.view(slot);
        if (slot.role == ParamRole::kBias) {
            for (auto& x : dst) x = 0.0;
            continue;
        }
        const double fan_in = static_cast<double>(slot.rows);
        const double fan_out = static_cast<double>(slot.cols);
        double bound;
        if (siren) {
            bound = slot.layer == 1 ? 1.0 / fan_in
                                    : std::sqrt(6.0 / fan_in) / spec.activation.p0;
        } else {
            bound = std::sqrt(6.0 / (fan_in + fan_out));
        }
        for (auto& x : dst) x = rng.uniform(-bound, bound);
    }
    return theta;
}

// F_L per the layer recursion: affine + componentwise activation on hidden
// layers, linear output layer. X is raw (pre-encoding) input.
inline Tensor forward(const NetworkSpec& spec, const ParamVector& theta, const Tensor& x) {
    spec.validate();
    if (x.cols() != spec.input_dim)
        throw ConfigError("forward: input has " + std::to_string(x.cols()) +
                          " columns, spec expects " + std::to_string(spec.input_dim));
    if (theta.size() != make_layout(spec).total())
        throw ConfigError("forward: parameter vector does not match spec");

    Tensor f = spec.has_encoding ? encode(spec.encoding, x) : x;
    const auto& slots = theta.layout().slots;
    const int L = spec.depth();
    for (int k = 1; k <= L; ++k) {
        const ParamSlot& ws = slots[static_cast<std::size_t>(2 * (k - 1))];
        const ParamSlot& bs = slots[static_cast<std::size_t>(2 * (k - 1) + 1)];
        Tensor z({f.rows(), ws.cols});
        gemm_nn(f.data(), theta.view(ws).data(), z.data(), f.rows(), ws.rows, ws.cols);
        const auto b = theta.view(bs);
        for (std::int64_t i = 0; i < z.rows(); ++i)
            for (std::int64_t j = 0; j < z.cols(); ++j) z.at(i, j) += b[static_cast<std::size_t>(j)];
        if (k < L)
            for (std::int64_t i = 0; i < z.numel(); ++i) z[i] = activate(spec.activation, z[i]);
        f = std::move(z);
    }
    return f;
}

// Same recursion, recorded on a tape. params are the leaves made from the
// layout (W1, b1, W2, b2, ...); x_const is the already-encoded input node.
template <class S>
Var network_on_tape(Tape<S>& tape, const NetworkSpec& spec, std::span<const Var> params,
                    Var x_const) {
    const int L = spec.depth();
    if (static_cast<int>(params.size()) != 2 * L)
        throw ConfigError("network_on_tape: wrong number of parameter leaves");
    Var f = x_const;
    for (int k = 1; k <= L; ++k) {
        f = tape.matmul(f, params[static_cast<std::size_t>(2 * (k - 1))]);
        f = tape.add_row(f, params[static_cast<std::size_t>(2 * (k - 1) + 1)]);
        if (k < L) f = tape.activation(f, spec.activation);
    }
    return f;
}

// MSE over all output entries against targets y, as a differentiable program.
inline std::unique_ptr<DiffProgram> make_mse_program(const NetworkSpec& spec, const Tensor& x,
                                                     const Tensor& y) {
    Tensor xe = spec.has_encoding ? encode(spec.encoding, x) : x;
    return make_program([spec, xe, y](auto& tape, std::span<const Var> p) {
        const Var xc = tape.constant_real(xe);
        const Var yc = tape.constant_real(y);
        const Var out = network_on_tape(tape, spec, p, xc);
        return tape.mean(tape.square(tape.sub(out, yc)));
    });
}

// Binary cross-entropy on raw logits: mean(softplus(z) - y .* z), the
// softplus-stabilized form. Targets are 0/1.
inline std::unique_ptr<DiffProgram> make_bce_program(const NetworkSpec& spec, const Tensor& x,
                                                     const Tensor& y) {
    Tensor xe = spec.has_encoding ? encode(spec.encoding, x) : x;
    return make_program([spec, xe, y](auto& tape, std::span<const Var> p) {
        const Var xc = tape.constant_real(xe);
        const Var yc = tape.constant_real(y);
        const Var z = network_on_tape(tape, spec, p, xc);
        return tape.mean(tape.sub(tape.softplus(z), tape.mul(yc, z)));
    });
}

}  // namespace nfp
