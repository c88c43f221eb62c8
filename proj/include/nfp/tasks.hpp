#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nfp/errors.hpp"
#include "nfp/image.hpp"
#include "nfp/mesh.hpp"
#include "nfp/rng.hpp"
#include "nfp/tape.hpp"
#include "nfp/tensor.hpp"

namespace nfp {

enum class TaskKind { k1d, kImage, kOccupancy };

inline const char* task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::k1d: return "1d";
        case TaskKind::kImage: return "image";
        case TaskKind::kOccupancy: return "occupancy";
    }
    return "?";
}

// Immutable training set. Inputs live in [-1,1] per dimension; image
// targets are RGB in [0,1], occupancy targets are hard {0,1} labels.
// width/height record the pixel grid for image datasets so predictions can
// be rendered back.
struct Dataset {
    TaskKind kind = TaskKind::k1d;
    Tensor inputs{{1, 1}};
    Tensor targets{{1, 1}};
    int width = 0;
    int height = 0;

    std::int64_t size() const { return inputs.rows(); }

    void validate() const {
        if (inputs.rows() < 1) throw ConfigError("dataset: empty");
        if (inputs.rows() != targets.rows())
            throw ConfigError("dataset: inputs/targets row mismatch");
        for (std::int64_t i = 0; i < inputs.numel(); ++i)
            if (!(inputs[i] >= -1.0 && inputs[i] <= 1.0))
                throw ConfigError("dataset: input outside [-1,1]");
        if (kind == TaskKind::kOccupancy) {
            for (std::int64_t i = 0; i < targets.numel(); ++i)
                if (targets[i] != 0.0 && targets[i] != 1.0)
                    throw ConfigError("dataset: occupancy target not in {0,1}");
        } else if (kind == TaskKind::kImage) {
            for (std::int64_t i = 0; i < targets.numel(); ++i)
                if (!(targets[i] >= 0.0 && targets[i] <= 1.0))
                    throw ConfigError("dataset: image target outside [0,1]");
        }
    }
};

// ------------------------------------------------------------------ 1D

inline double signal_1d(double x) {
    const double pi = 3.14159265358979323846;
    return std::sin(2.0 * pi * x) + std::sin(6.0 * pi * x);
}

// Uniform inclusive grid over [lo, hi]; full-batch regression target.
inline Dataset make_1d_task(std::int64_t n_points, double lo = -1.0, double hi = 1.0) {
    if (n_points < 2) throw ConfigError("1d task: need at least 2 points");
    if (!(lo < hi) || lo < -1.0 || hi > 1.0)
        throw ConfigError("1d task: domain must be a nonempty subinterval of [-1,1]");
    Dataset ds;
    ds.kind = TaskKind::k1d;
    ds.inputs = Tensor({n_points, 1});
    ds.targets = Tensor({n_points, 1});
    for (std::int64_t i = 0; i < n_points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
        ds.inputs[i] = x;
        ds.targets[i] = signal_1d(x);
    }
    return ds;
}

// ------------------------------------------------------------------ image

// Row-major pixel order; pixel centers normalized so a WxH grid covers
// (-1,1)^2 symmetrically: column j maps to x = (2j+1)/W - 1.
inline Dataset make_image_task(const Image& img) {
    Dataset ds;
    ds.kind = TaskKind::kImage;
    ds.width = img.width;
    ds.height = img.height;
    const std::int64_t n = static_cast<std::int64_t>(img.width) * img.height;
    ds.inputs = Tensor({n, 2});
    ds.targets = Tensor({n, 3});
    std::int64_t s = 0;
    for (int i = 0; i < img.height; ++i) {
        for (int j = 0; j < img.width; ++j, ++s) {
            ds.inputs.at(s, 0) = (2.0 * j + 1.0) / img.width - 1.0;
            ds.inputs.at(s, 1) = (2.0 * i + 1.0) / img.height - 1.0;
            for (int c = 0; c < 3; ++c) ds.targets.at(s, c) = img.at(i, j, c);
        }
    }
    return ds;
}

// source is either a PPM path or the name of a builtin pattern ("chirp");
// size applies to builtins only.
inline Dataset make_image_task(const std::string& source, int size) {
    if (source == "chirp") {
        if (size < 1) throw ConfigError("image task: builtin size must be positive");
        return make_image_task(radial_chirp(size, size));
    }
    if (source.size() >= 4 && source.substr(source.size() - 4) == ".ppm")
        return make_image_task(read_ppm(source));
    throw ConfigError("image task: unknown source '" + source +
                      "' (expected a .ppm path or builtin 'chirp')");
}

// Inverse of make_image_task's flattening: rows back onto the pixel grid,
// values taken verbatim (quantization happens only at PPM write time).
inline Image render_to_image(const Dataset& ds, const Tensor& pred) {
    if (ds.kind != TaskKind::kImage) throw ConfigError("render: dataset is not an image task");
    if (pred.rows() != ds.size() || pred.cols() != 3)
        throw ConfigError("render: prediction shape mismatch");
    Image img(ds.width, ds.height);
    for (std::int64_t s = 0; s < pred.rows(); ++s)
        for (int c = 0; c < 3; ++c)
            img.pixels[static_cast<std::size_t>(s) * 3 + static_cast<std::size_t>(c)] =
                pred.at(s, c);
    return img;
}

// ------------------------------------------------------------------ occupancy

enum class ShapeKind { kSphere, kTorus, kBox, kUnion };

inline ShapeKind shape_from_name(const std::string& name) {
    if (name == "sphere") return ShapeKind::kSphere;
    if (name == "torus") return ShapeKind::kTorus;
    if (name == "box") return ShapeKind::kBox;
    if (name == "union") return ShapeKind::kUnion;
    throw ConfigError("occupancy: unknown shape '" + name +
                      "' (expected sphere|torus|box|union or a mesh file)");
}

namespace detail {

// Fixed shape parameters, all comfortably inside [-1,1]^3:
//   sphere: radius 0.5 at the origin
//   torus:  major radius 0.5, minor 0.18, axis z
//   box:    half-extents (0.5, 0.35, 0.25)
//   union:  sphere r=0.4 at (-0.25,0,0) with box (0.3,0.25,0.2) at (0.3,0,0)
inline constexpr double kSphereR = 0.5;
inline constexpr double kTorusR = 0.5, kTorusr = 0.18;
inline constexpr Vec3 kBoxHalf = {0.5, 0.35, 0.25};
inline constexpr Vec3 kUnionSphereC = {-0.25, 0.0, 0.0};
inline constexpr double kUnionSphereR = 0.4;
inline constexpr Vec3 kUnionBoxC = {0.3, 0.0, 0.0};
inline constexpr Vec3 kUnionBoxHalf = {0.3, 0.25, 0.2};

inline double sdf_sphere(const Vec3& p, double r) { return norm3(p) - r; }

inline double sdf_box(const Vec3& p, const Vec3& half) {
    const Vec3 q = {std::abs(p[0]) - half[0], std::abs(p[1]) - half[1], std::abs(p[2]) - half[2]};
    const Vec3 qp = {std::max(q[0], 0.0), std::max(q[1], 0.0), std::max(q[2], 0.0)};
    return norm3(qp) + std::min(std::max(q[0], std::max(q[1], q[2])), 0.0);
}

inline double sdf_torus(const Vec3& p, double major, double minor) {
    const double ring = std::sqrt(p[0] * p[0] + p[1] * p[1]) - major;
    return std::sqrt(ring * ring + p[2] * p[2]) - minor;
}

}  // namespace detail

inline double shape_sdf(ShapeKind shape, const Vec3& p) {
    using namespace detail;
    switch (shape) {
        case ShapeKind::kSphere: return sdf_sphere(p, kSphereR);
        case ShapeKind::kTorus: return sdf_torus(p, kTorusR, kTorusr);
        case ShapeKind::kBox: return sdf_box(p, kBoxHalf);
        case ShapeKind::kUnion:
            return std::min(sdf_sphere(p - kUnionSphereC, kUnionSphereR),
                            sdf_box(p - kUnionBoxC, kUnionBoxHalf));
    }
    throw ConfigError("occupancy: invalid shape");
}

namespace detail {

inline Vec3 sample_sphere_surface(Rng& rng, const Vec3& center, double r) {
    for (;;) {
        const Vec3 d = {rng.normal(), rng.normal(), rng.normal()};
        const double n = norm3(d);
        if (n > 1e-12) return center + (r / n) * d;
    }
}

// Area-uniform torus point: the area element is proportional to
// (R + r cos v), handled by rejection on the tube angle.
inline Vec3 sample_torus_surface(Rng& rng, double major, double minor) {
    const double pi = 3.14159265358979323846;
    const double u = rng.uniform(0.0, 2.0 * pi);
    double v = 0.0;
    for (;;) {
        v = rng.uniform(0.0, 2.0 * pi);
        if (rng.uniform() * (major + minor) <= major + minor * std::cos(v)) break;
    }
    const double ring = major + minor * std::cos(v);
    return {ring * std::cos(u), ring * std::sin(u), minor * std::sin(v)};
}

inline Vec3 sample_box_surface(Rng& rng, const Vec3& center, const Vec3& half) {
    const double ax = half[1] * half[2];  // x-face area / 4
    const double ay = half[0] * half[2];
    const double az = half[0] * half[1];
    const double pick = rng.uniform() * 2.0 * (ax + ay + az);
    const double sign = rng.rademacher();
    Vec3 p = {rng.uniform(-half[0], half[0]), rng.uniform(-half[1], half[1]),
              rng.uniform(-half[2], half[2])};
    if (pick < 2.0 * ax)
        p[0] = sign * half[0];
    else if (pick < 2.0 * (ax + ay))
        p[1] = sign * half[1];
    else
        p[2] = sign * half[2];
    return center + p;
}

inline Vec3 sample_shape_surface(ShapeKind shape, Rng& rng) {
    switch (shape) {
        case ShapeKind::kSphere: return sample_sphere_surface(rng, {0, 0, 0}, kSphereR);
        case ShapeKind::kTorus: return sample_torus_surface(rng, kTorusR, kTorusr);
        case ShapeKind::kBox: return sample_box_surface(rng, {0, 0, 0}, kBoxHalf);
        case ShapeKind::kUnion: {
            const double pi = 3.14159265358979323846;
            const double area_sphere = 4.0 * pi * kUnionSphereR * kUnionSphereR;
            const Vec3& h = kUnionBoxHalf;
            const double area_box = 8.0 * (h[0] * h[1] + h[1] * h[2] + h[0] * h[2]);
            // candidate from one component's surface, rejected when it lies
            // strictly inside the other (not on the union's boundary)
            for (int attempt = 0; attempt < 1000; ++attempt) {
                const bool from_sphere = rng.uniform() * (area_sphere + area_box) < area_sphere;
                const Vec3 cand = from_sphere
                                      ? sample_sphere_surface(rng, kUnionSphereC, kUnionSphereR)
                                      : sample_box_surface(rng, kUnionBoxC, kUnionBoxHalf);
                const double other = from_sphere ? sdf_box(cand - kUnionBoxC, kUnionBoxHalf)
                                                 : sdf_sphere(cand - kUnionSphereC, kUnionSphereR);
                if (other > 1e-12) return cand;
            }
            throw NumericError("occupancy: union surface sampling failed to converge");
        }
    }
    throw ConfigError("occupancy: invalid shape");
}

}  // namespace detail

// How n occupancy samples are split across the three sampling groups:
// ceil(n/3) uniform in the volume, the remainder divided evenly between the
// near-surface groups (noise sigma 0.1 and 0.01; an odd remainder gives the
// sigma=0.1 group one extra point). Exposed so tests can check composition
// without re-deriving the rounding.
struct OccupancyComposition {
    std::int64_t n_uniform = 0;
    std::int64_t n_coarse = 0;  // surface + noise(sigma=0.1)
    std::int64_t n_fine = 0;    // surface + noise(sigma=0.01)
};

inline OccupancyComposition occupancy_composition(std::int64_t n) {
    OccupancyComposition c;
    c.n_uniform = (n + 2) / 3;
    const std::int64_t rem = n - c.n_uniform;
    c.n_fine = rem / 2;
    c.n_coarse = rem - c.n_fine;
    return c;
}

namespace detail {

// Shared sampling core: `surface` draws a point on the shape boundary and
// `inside` labels a point. Noisy surface points are clamped back into the
// domain box before labelling, so labels always match the stored input.
template <class SurfaceFn, class InsideFn>
Dataset build_occupancy(std::int64_t n_points, std::uint64_t seed, SurfaceFn&& surface,
                        InsideFn&& inside) {
    if (n_points < 3) throw ConfigError("occupancy: need at least 3 points");
    const auto comp = occupancy_composition(n_points);
    Rng rng = Rng::substream(seed, 0x0CC0);
    Dataset ds;
    ds.kind = TaskKind::kOccupancy;
    ds.inputs = Tensor({n_points, 3});
    ds.targets = Tensor({n_points, 1});
    std::int64_t row = 0;
    auto emit = [&](const Vec3& p) {
        Vec3 q = p;
        for (int k = 0; k < 3; ++k) q[k] = std::clamp(q[k], -1.0, 1.0);
        for (int k = 0; k < 3; ++k) ds.inputs.at(row, k) = q[k];
        ds.targets[row] = inside(q) ? 1.0 : 0.0;
        ++row;
    };
    for (std::int64_t i = 0; i < comp.n_uniform; ++i)
        emit({rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)});
    for (std::int64_t i = 0; i < comp.n_coarse; ++i) {
        const Vec3 s = surface(rng);
        emit({s[0] + rng.normal(0.0, 0.1), s[1] + rng.normal(0.0, 0.1),
              s[2] + rng.normal(0.0, 0.1)});
    }
    for (std::int64_t i = 0; i < comp.n_fine; ++i) {
        const Vec3 s = surface(rng);
        emit({s[0] + rng.normal(0.0, 0.01), s[1] + rng.normal(0.0, 0.01),
              s[2] + rng.normal(0.0, 0.01)});
    }
    return ds;
}

}  // namespace detail

inline Dataset make_occupancy_task(ShapeKind shape, std::int64_t n_points, std::uint64_t seed) {
    return detail::build_occupancy(
        n_points, seed, [shape](Rng& rng) { return detail::sample_shape_surface(shape, rng); },
        [shape](const Vec3& p) { return shape_sdf(shape, p) <= 0.0; });
}

inline Dataset make_occupancy_task(const TriMesh& mesh, std::int64_t n_points,
                                   std::uint64_t seed) {
    if (!is_watertight(mesh))
        throw ConfigError("occupancy: mesh is not watertight, inside/outside is undefined");
    for (const auto& v : mesh.vertices)
        for (int k = 0; k < 3; ++k)
            if (!(v[k] >= -1.0 && v[k] <= 1.0))
                throw ConfigError("occupancy: mesh exceeds the [-1,1]^3 domain");
    SurfaceSampler sampler(mesh);
    return detail::build_occupancy(
        n_points, seed, [&sampler](Rng& rng) { return sampler.sample(rng); },
        [&mesh](const Vec3& p) { return point_inside(mesh, p); });
}

// ------------------------------------------------------------------ losses

inline double mse_loss(const Tensor& pred, const Tensor& target) {
    if (!pred.same_shape(target)) throw ConfigError("mse: shape mismatch");
    double acc = 0.0;
    for (std::int64_t i = 0; i < pred.numel(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.numel());
}

// Softplus-stabilized BCE on raw logits: mean of softplus(z) - y z, the
// exact negative log-likelihood of a Bernoulli with logit z.
inline double bce_loss(const Tensor& logits, const Tensor& targets) {
    if (!logits.same_shape(targets)) throw ConfigError("bce: shape mismatch");
    double acc = 0.0;
    for (std::int64_t i = 0; i < logits.numel(); ++i) {
        const double y = targets[i];
        if (y != 0.0 && y != 1.0) throw ConfigError("bce: targets must be 0 or 1");
        acc += stable_softplus(logits[i]) - y * logits[i];
    }
    return acc / static_cast<double>(logits.numel());
}

// ------------------------------------------------------------------ metrics

// Peak signal-to-noise ratio for signals in [0,1]; capped at 99 dB once the
// MSE drops below 1e-10 (identical images would otherwise be +inf).
inline double psnr(const Tensor& pred, const Tensor& gt) {
    const double mse = mse_loss(pred, gt);
    if (mse < 1e-10) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

// Intersection-over-union of thresholded predictions against hard labels;
// an empty union (no positives anywhere) counts as a perfect match.
inline double iou(const Tensor& pred_probs, const Tensor& gt_labels, double threshold = 0.5) {
    if (!pred_probs.same_shape(gt_labels)) throw ConfigError("iou: shape mismatch");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("iou: threshold outside (0,1)");
    std::int64_t inter = 0, uni = 0;
    for (std::int64_t i = 0; i < pred_probs.numel(); ++i) {
        const bool p = pred_probs[i] > threshold;
        const bool g = gt_labels[i] > 0.5;
        inter += (p && g) ? 1 : 0;
        uni += (p || g) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// ------------------------------------------------------------------ batching

struct BatchSchedule {
    std::int64_t batch_size = 1;
    std::uint64_t seed = 0;
};

// Seeded epoch-shuffled minibatch iterator. Each epoch is an independent
// Fisher-Yates permutation derived from (seed, epoch), so any position in
// the stream can be reconstructed from (epoch, cursor) alone -- which is
// exactly what checkpoint resume does via seek().
class MinibatchStream {
public:
    MinibatchStream(const Dataset& ds, const BatchSchedule& sched)
        : ds_(&ds), batch_(sched.batch_size), seed_(sched.seed) {
        if (batch_ < 1 || batch_ > ds.size())
            throw ConfigError("minibatches: batch size " + std::to_string(batch_) +
                              " outside [1, " + std::to_string(ds.size()) + "]");
        order_.resize(static_cast<std::size_t>(ds.size()));
        reshuffle();
    }

    std::int64_t batches_per_epoch() const {
        return (ds_->size() + batch_ - 1) / batch_;
    }
    std::int64_t epoch() const { return epoch_; }
    std::int64_t cursor() const { return cursor_; }

    void seek(std::int64_t epoch, std::int64_t cursor) {
        if (epoch < 0 || cursor < 0 || cursor >= batches_per_epoch())
            throw ConfigError("minibatches: seek position out of range");
        epoch_ = epoch;
        cursor_ = cursor;
        reshuffle();
    }

    std::pair<Tensor, Tensor> next() {
        const std::int64_t lo = cursor_ * batch_;
        const std::int64_t hi = std::min(lo + batch_, ds_->size());
        const std::int64_t b = hi - lo;
        Tensor x({b, ds_->inputs.cols()});
        Tensor y({b, ds_->targets.cols()});
        for (std::int64_t r = 0; r < b; ++r) {
            const std::int64_t src = order_[static_cast<std::size_t>(lo + r)];
            for (std::int64_t c = 0; c < x.cols(); ++c) x.at(r, c) = ds_->inputs.at(src, c);
            for (std::int64_t c = 0; c < y.cols(); ++c) y.at(r, c) = ds_->targets.at(src, c);
        }
        ++cursor_;
        // Roll into the next epoch eagerly: each epoch's permutation depends
        // only on (seed, epoch), so drawing it now changes nothing downstream,
        // and (epoch, cursor) stays within seek()'s domain at all times.
        if (cursor_ >= batches_per_epoch()) {
            ++epoch_;
            cursor_ = 0;
            reshuffle();
        }
        return {std::move(x), std::move(y)};
    }

private:
    void reshuffle() {
        Rng rng = Rng::substream(seed_, 0x5F1E ^ static_cast<std::uint64_t>(epoch_));
        for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = static_cast<std::int64_t>(i);
        for (std::size_t i = order_.size(); i > 1; --i)
            std::swap(order_[i - 1], order_[static_cast<std::size_t>(rng.below(i))]);
    }

    const Dataset* ds_;
    std::int64_t batch_;
    std::uint64_t seed_;
    std::vector<std::int64_t> order_;
    std::int64_t epoch_ = 0;
    std::int64_t cursor_ = 0;
};

}  // namespace nfp
