#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "nfp/errors.hpp"
#include "nfp/optim.hpp"
#include "nfp/param_vector.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

// Binary training snapshot. Layout (all integers and doubles little-endian):
//   magic "NFPC" + version byte 0x01
//   u64 network digest  (must match the loading config's architecture)
//   i64 iteration, i64 epoch, i64 batch cursor
//   params        : i64 count + doubles
//   optimizer     : i64 t; tensors m, v, u; preconditioner (acc tensor,
//                   i64 n_samples, i64 refresh_every, f64 damping,
//                   f64 ema_beta); i64 shampoo slot count + 4 tensors per
//                   slot (l, r, l_root, r_root); 4 x u64 rng state
// Bit-exact round-trip: load(save(x)) == x including rng position.
inline constexpr char kCheckpointMagic[5] = {'N', 'F', 'P', 'C', '\x01'};

namespace detail {

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

inline void put_i64(std::ostream& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

inline void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw ConfigError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline std::int64_t get_i64(std::istream& in) {
    return static_cast<std::int64_t>(get_u64(in));
}

inline double get_f64(std::istream& in) {
    const std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

inline void put_tensor(std::ostream& out, const Tensor& t) {
    put_i64(out, t.numel());
    for (std::int64_t i = 0; i < t.numel(); ++i) put_f64(out, t[i]);
}

// Shape is re-imposed by the caller; only lengths are stored.
inline Tensor get_tensor(std::istream& in) {
    const std::int64_t n = get_i64(in);
    if (n < 0 || n > (1LL << 32)) throw ConfigError("checkpoint: corrupt tensor length");
    Tensor t({n});
    for (std::int64_t i = 0; i < n; ++i) t[i] = get_f64(in);
    return t;
}

}  // namespace detail

struct Checkpoint {
    std::uint64_t digest = 0;
    std::int64_t iteration = 0;
    std::int64_t epoch = 0;
    std::int64_t cursor = 0;  // minibatch position within the epoch
    Tensor params{{0}};
    // optimizer state, shape-erased
    std::int64_t opt_t = 0;
    Tensor opt_m{{0}}, opt_v{{0}}, opt_u{{0}};
    Tensor precond_acc{{0}};
    std::int64_t precond_n_samples = 0;
    std::int64_t precond_refresh_every = 100;
    double precond_damping = 1e-4;
    double precond_ema_beta = 0.0;
    std::vector<std::array<Tensor, 4>> shampoo;  // l, r, l_root, r_root
    std::array<std::uint64_t, 4> rng_state{};
};

inline Checkpoint snapshot_state(std::uint64_t digest, std::int64_t iteration, std::int64_t epoch,
                                 std::int64_t cursor, const ParamVector& theta,
                                 const OptimizerState& st) {
    Checkpoint ck;
    ck.digest = digest;
    ck.iteration = iteration;
    ck.epoch = epoch;
    ck.cursor = cursor;
    ck.params = theta.flat();
    ck.opt_t = st.t;
    ck.opt_m = st.m;
    ck.opt_v = st.v;
    ck.opt_u = st.u;
    ck.precond_acc = st.precond.acc;
    ck.precond_n_samples = st.precond.n_samples;
    ck.precond_refresh_every = st.precond.refresh_every;
    ck.precond_damping = st.precond.damping;
    ck.precond_ema_beta = st.precond.ema_beta;
    for (const auto& f : st.shampoo) ck.shampoo.push_back({f.l, f.r, f.l_root, f.r_root});
    ck.rng_state = st.rng.state();
    return ck;
}

// Pours the shape-erased arrays back into a freshly constructed state; the
// state must come from the same (config, layout) pair, which the digest
// check upstream guarantees.
inline void restore_state(const Checkpoint& ck, ParamVector& theta, OptimizerState& st) {
    if (ck.params.numel() != theta.size())
        throw ConfigError("checkpoint: parameter count mismatch");
    for (std::int64_t i = 0; i < theta.size(); ++i) theta.flat()[i] = ck.params[i];
    auto copy_into = [](const Tensor& src, Tensor& dst, const char* what) {
        if (src.numel() != dst.numel())
            throw ConfigError(std::string("checkpoint: ") + what + " length mismatch");
        for (std::int64_t i = 0; i < src.numel(); ++i) dst[i] = src[i];
    };
    st.t = ck.opt_t;
    copy_into(ck.opt_m, st.m, "first-moment");
    copy_into(ck.opt_v, st.v, "second-moment");
    copy_into(ck.opt_u, st.u, "max-accumulator");
    copy_into(ck.precond_acc, st.precond.acc, "preconditioner");
    st.precond.n_samples = ck.precond_n_samples;
    st.precond.refresh_every = static_cast<int>(ck.precond_refresh_every);
    st.precond.damping = ck.precond_damping;
    st.precond.ema_beta = ck.precond_ema_beta;
    if (ck.shampoo.size() != st.shampoo.size())
        throw ConfigError("checkpoint: shampoo slot count mismatch");
    for (std::size_t i = 0; i < ck.shampoo.size(); ++i) {
        auto& f = st.shampoo[i];
        const auto reshape = [](const Tensor& flat, const Tensor& like) {
            if (flat.numel() != like.numel())
                throw ConfigError("checkpoint: shampoo factor shape mismatch");
            Tensor out(like.shape());
            for (std::int64_t k = 0; k < flat.numel(); ++k) out[k] = flat[k];
            return out;
        };
        f.l = reshape(ck.shampoo[i][0], f.l);
        f.r = reshape(ck.shampoo[i][1], f.r);
        // roots may be empty pre-first-refresh; restore verbatim
        f.l_root = ck.shampoo[i][2].numel() == f.l.numel() ? reshape(ck.shampoo[i][2], f.l)
                                                           : Tensor({0});
        f.r_root = ck.shampoo[i][3].numel() == f.r.numel() ? reshape(ck.shampoo[i][3], f.r)
                                                           : Tensor({0});
    }
    st.rng.set_state(ck.rng_state);
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    using namespace detail;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("checkpoint: cannot write '" + path + "'");
    out.write(kCheckpointMagic, 5);
    put_u64(out, ck.digest);
    put_i64(out, ck.iteration);
    put_i64(out, ck.epoch);
    put_i64(out, ck.cursor);
    put_tensor(out, ck.params);
    put_i64(out, ck.opt_t);
    put_tensor(out, ck.opt_m);
    put_tensor(out, ck.opt_v);
    put_tensor(out, ck.opt_u);
    put_tensor(out, ck.precond_acc);
    put_i64(out, ck.precond_n_samples);
    put_i64(out, ck.precond_refresh_every);
    put_f64(out, ck.precond_damping);
    put_f64(out, ck.precond_ema_beta);
    put_i64(out, static_cast<std::int64_t>(ck.shampoo.size()));
    for (const auto& f : ck.shampoo)
        for (const auto& t : f) put_tensor(out, t);
    for (std::uint64_t w : ck.rng_state) put_u64(out, w);
    if (!out) throw ConfigError("checkpoint: write failure for '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    using namespace detail;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("checkpoint: cannot open '" + path + "'");
    char magic[5];
    in.read(magic, 5);
    if (!in || std::memcmp(magic, kCheckpointMagic, 5) != 0)
        throw ConfigError("checkpoint: '" + path + "' is not a checkpoint file");
    Checkpoint ck;
    ck.digest = get_u64(in);
    ck.iteration = get_i64(in);
    ck.epoch = get_i64(in);
    ck.cursor = get_i64(in);
    ck.params = get_tensor(in);
    ck.opt_t = get_i64(in);
    ck.opt_m = get_tensor(in);
    ck.opt_v = get_tensor(in);
    ck.opt_u = get_tensor(in);
    ck.precond_acc = get_tensor(in);
    ck.precond_n_samples = get_i64(in);
    ck.precond_refresh_every = get_i64(in);
    ck.precond_damping = get_f64(in);
    ck.precond_ema_beta = get_f64(in);
    const std::int64_t n_slots = get_i64(in);
    if (n_slots < 0 || n_slots > 4096) throw ConfigError("checkpoint: corrupt slot count");
    for (std::int64_t i = 0; i < n_slots; ++i) {
        std::array<Tensor, 4> f = {Tensor({0}), Tensor({0}), Tensor({0}), Tensor({0})};
        for (auto& t : f) t = get_tensor(in);
        ck.shampoo.push_back(std::move(f));
    }
    for (auto& w : ck.rng_state) w = get_u64(in);
    return ck;
}

}  // namespace nfp
