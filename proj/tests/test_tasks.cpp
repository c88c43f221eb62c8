#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "nfp/tasks.hpp"

namespace nfp {
namespace {

std::string temp_path(const std::string& name) { return ::testing::TempDir() + name; }

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

// ---------------------------------------------------------------- 1d task

TEST(Task1d, SignalValuesAtKnownPoints) {
    EXPECT_DOUBLE_EQ(signal_1d(0.0), 0.0);
    // sin(pi/2) + sin(3pi/2) = 1 - 1
    EXPECT_NEAR(signal_1d(0.25), 0.0, 1e-15);
    // sin(pi/6) + sin(pi/2) = 0.5 + 1
    EXPECT_NEAR(signal_1d(1.0 / 12.0), 1.5, 1e-15);
}

TEST(Task1d, UniformInclusiveGrid) {
    const Dataset ds = make_1d_task(5);
    ASSERT_EQ(ds.size(), 5);
    EXPECT_DOUBLE_EQ(ds.inputs[0], -1.0);
    EXPECT_DOUBLE_EQ(ds.inputs[2], 0.0);
    EXPECT_DOUBLE_EQ(ds.inputs[4], 1.0);
    for (std::int64_t i = 0; i < 5; ++i)
        EXPECT_DOUBLE_EQ(ds.targets[i], signal_1d(ds.inputs[i]));
    ds.validate();
}

TEST(Task1d, RejectsDegenerateRequests) {
    EXPECT_THROW(make_1d_task(1), ConfigError);
    EXPECT_THROW(make_1d_task(16, 0.5, 0.5), ConfigError);
    EXPECT_THROW(make_1d_task(16, -2.0, 1.0), ConfigError);
}

// ---------------------------------------------------------------- image task

TEST(ImageTask, TwoByTwoPixelCenters) {
    Image img(2, 2);
    const Dataset ds = make_image_task(img);
    ASSERT_EQ(ds.size(), 4);
    // row-major: (row 0, col 0), (row 0, col 1), (row 1, col 0), (row 1, col 1)
    EXPECT_DOUBLE_EQ(ds.inputs.at(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(0, 1), -0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(1, 1), -0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(2, 0), -0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(2, 1), 0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(3, 0), 0.5);
    EXPECT_DOUBLE_EQ(ds.inputs.at(3, 1), 0.5);
}

TEST(ImageTask, AllGrayTargets) {
    Image img(3, 2);
    for (auto& p : img.pixels) p = 128.0 / 255.0;
    const Dataset ds = make_image_task(img);
    for (std::int64_t i = 0; i < ds.targets.numel(); ++i)
        EXPECT_NEAR(ds.targets[i], 0.50196, 1e-5);
}

TEST(ImageTask, RenderRoundTripIsBitIdentical) {
    const Image img = radial_chirp(16, 16);
    const Dataset ds = make_image_task(img);
    const Image back = render_to_image(ds, ds.targets);
    ASSERT_EQ(back.pixels.size(), img.pixels.size());
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        EXPECT_EQ(back.pixels[i], img.pixels[i]);
}

TEST(ImageTask, PpmWriteReadRoundTrip) {
    const Image img = radial_chirp(9, 7);
    const std::string path = temp_path("roundtrip.ppm");
    write_ppm(path, img);
    const Image loaded = read_ppm(path);
    ASSERT_EQ(loaded.width, 9);
    ASSERT_EQ(loaded.height, 7);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        EXPECT_EQ(loaded.pixels[i], img.pixels[i]);
    std::remove(path.c_str());
}

TEST(ImageTask, PpmHeaderCommentsAndWhitespace) {
    const std::string path = temp_path("comments.ppm");
    std::ofstream out(path, std::ios::binary);
    out << "P6\n# a comment\n2 # trailing\n1\n255\n";
    const unsigned char bytes[6] = {0, 128, 255, 10, 20, 30};
    out.write(reinterpret_cast<const char*>(bytes), 6);
    out.close();
    const Image img = read_ppm(path);
    ASSERT_EQ(img.width, 2);
    ASSERT_EQ(img.height, 1);
    EXPECT_DOUBLE_EQ(img.at(0, 0, 1), 128.0 / 255.0);
    EXPECT_DOUBLE_EQ(img.at(0, 1, 0), 10.0 / 255.0);
    std::remove(path.c_str());
}

TEST(ImageTask, PpmRejectsNon8BitAndTruncated) {
    const std::string wide = temp_path("wide.ppm");
    std::ofstream out(wide, std::ios::binary);
    out << "P6\n1 1\n65535\n";
    out << std::string(6, '\0');
    out.close();
    EXPECT_THROW(read_ppm(wide), ConfigError);
    std::remove(wide.c_str());

    const std::string cut = temp_path("cut.ppm");
    std::ofstream out2(cut, std::ios::binary);
    out2 << "P6\n2 2\n255\n";
    out2 << std::string(5, '\0');  // needs 12 bytes
    out2.close();
    EXPECT_THROW(read_ppm(cut), ConfigError);
    std::remove(cut.c_str());
}

TEST(ImageTask, BuiltinChirpIsDeterministicAndQuantized) {
    const Image a = radial_chirp(32, 32);
    const Image b = radial_chirp(32, 32);
    ASSERT_EQ(a.pixels.size(), b.pixels.size());
    double lo = 1.0, hi = 0.0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i) {
        EXPECT_EQ(a.pixels[i], b.pixels[i]);
        // exact 8-bit levels, same as a loaded PPM
        EXPECT_EQ(a.pixels[i], std::lround(a.pixels[i] * 255.0) / 255.0);
        lo = std::min(lo, a.pixels[i]);
        hi = std::max(hi, a.pixels[i]);
    }
    EXPECT_LT(lo, 0.1);  // pattern actually spans the range
    EXPECT_GT(hi, 0.9);
}

TEST(ImageTask, SourceDispatch) {
    const Dataset ds = make_image_task("chirp", 8);
    EXPECT_EQ(ds.size(), 64);
    EXPECT_EQ(ds.width, 8);
    EXPECT_THROW(make_image_task("no-such-pattern", 8), ConfigError);
    EXPECT_THROW(make_image_task("/no/such/file.ppm", 8), ConfigError);
}

// ---------------------------------------------------------------- occupancy

TEST(Occupancy, SphereSdfSigns) {
    EXPECT_LT(shape_sdf(ShapeKind::kSphere, {0, 0, 0}), 0.0);
    EXPECT_GT(shape_sdf(ShapeKind::kSphere, {0.9, 0, 0}), 0.0);
    EXPECT_NEAR(shape_sdf(ShapeKind::kSphere, {0.5, 0, 0}), 0.0, 1e-15);
}

TEST(Occupancy, OtherShapeSdfSigns) {
    // torus: tube centre circle is inside, symmetry axis is not
    EXPECT_LT(shape_sdf(ShapeKind::kTorus, {0.5, 0, 0}), 0.0);
    EXPECT_GT(shape_sdf(ShapeKind::kTorus, {0, 0, 0}), 0.0);
    EXPECT_LT(shape_sdf(ShapeKind::kBox, {0, 0, 0}), 0.0);
    EXPECT_GT(shape_sdf(ShapeKind::kBox, {0.6, 0, 0}), 0.0);
    EXPECT_GT(shape_sdf(ShapeKind::kBox, {0.4, 0.35, 0.3}), 0.0);
    // union: sphere lobe, box lobe, and a point in neither
    EXPECT_LT(shape_sdf(ShapeKind::kUnion, {-0.25, 0, 0}), 0.0);
    EXPECT_LT(shape_sdf(ShapeKind::kUnion, {0.3, 0, 0}), 0.0);
    EXPECT_GT(shape_sdf(ShapeKind::kUnion, {0, 0, 0.5}), 0.0);
}

TEST(Occupancy, CompositionRoundingRule) {
    for (std::int64_t n : {3, 4, 5, 6, 7, 100, 101, 102, 4096}) {
        const auto c = occupancy_composition(n);
        EXPECT_EQ(c.n_uniform, (n + 2) / 3);
        EXPECT_EQ(c.n_uniform + c.n_coarse + c.n_fine, n);
        EXPECT_LE(std::abs(c.n_coarse - c.n_fine), 1);
        EXPECT_GE(c.n_coarse, c.n_fine);  // odd remainder goes to sigma=0.1
    }
}

TEST(Occupancy, DatasetBoundsAndLabelsAreValid) {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (ShapeKind shape :
             {ShapeKind::kSphere, ShapeKind::kTorus, ShapeKind::kBox, ShapeKind::kUnion}) {
            const Dataset ds = make_occupancy_task(shape, 500, seed);
            ds.validate();
            // labels must match the SDF sign at the stored (clamped) input
            for (std::int64_t i = 0; i < ds.size(); ++i) {
                const Vec3 p = {ds.inputs.at(i, 0), ds.inputs.at(i, 1), ds.inputs.at(i, 2)};
                EXPECT_EQ(ds.targets[i], shape_sdf(shape, p) <= 0.0 ? 1.0 : 0.0);
            }
        }
    }
}

TEST(Occupancy, UniformThirdMatchesVolumeRatio) {
    // sphere volume fraction of [-1,1]^3: (4/3) pi 0.5^3 / 8
    const std::int64_t n = 300000;
    const Dataset ds = make_occupancy_task(ShapeKind::kSphere, n, 77);
    const auto comp = occupancy_composition(n);
    ASSERT_EQ(comp.n_uniform, 100000);
    double inside = 0.0;
    for (std::int64_t i = 0; i < comp.n_uniform; ++i) inside += ds.targets[i];
    EXPECT_NEAR(inside / static_cast<double>(comp.n_uniform), 0.0654, 0.005);
}

TEST(Occupancy, FineSurfaceGroupIsHalfInsideBySymmetry) {
    // points on the sphere surface nudged by sigma=0.01 noise land inside
    // with probability ~1/2 (curvature bias is O(sigma/r))
    const std::int64_t n = 300000;
    const Dataset ds = make_occupancy_task(ShapeKind::kSphere, n, 78);
    const auto comp = occupancy_composition(n);
    double inside = 0.0;
    for (std::int64_t i = comp.n_uniform + comp.n_coarse; i < n; ++i) inside += ds.targets[i];
    EXPECT_NEAR(inside / static_cast<double>(comp.n_fine), 0.5, 0.02);
}

TEST(Occupancy, DeterministicGivenSeed) {
    const Dataset a = make_occupancy_task(ShapeKind::kUnion, 1000, 5);
    const Dataset b = make_occupancy_task(ShapeKind::kUnion, 1000, 5);
    for (std::int64_t i = 0; i < a.inputs.numel(); ++i) EXPECT_EQ(a.inputs[i], b.inputs[i]);
    const Dataset c = make_occupancy_task(ShapeKind::kUnion, 1000, 6);
    double diff = 0.0;
    for (std::int64_t i = 0; i < a.inputs.numel(); ++i)
        diff += std::abs(a.inputs[i] - c.inputs[i]);
    EXPECT_GT(diff, 1.0);
}

TEST(Occupancy, ShapeNameLookup) {
    EXPECT_EQ(shape_from_name("sphere"), ShapeKind::kSphere);
    EXPECT_EQ(shape_from_name("union"), ShapeKind::kUnion);
    EXPECT_THROW(shape_from_name("pyramid"), ConfigError);
}

// ---------------------------------------------------------------- mesh path

// cube [-h,h]^3 as 12 triangles, consistent closed surface
std::string cube_off(double h) {
    std::ostringstream os;
    os << "OFF\n# unit test cube\n8 12 0\n";
    const int sx[] = {-1, 1, 1, -1, -1, 1, 1, -1};
    const int sy[] = {-1, -1, 1, 1, -1, -1, 1, 1};
    const int sz[] = {-1, -1, -1, -1, 1, 1, 1, 1};
    for (int i = 0; i < 8; ++i) os << sx[i] * h << " " << sy[i] * h << " " << sz[i] * h << "\n";
    os << "3 0 2 1\n3 0 3 2\n3 4 5 6\n3 4 6 7\n3 0 1 5\n3 0 5 4\n"
       << "3 2 3 7\n3 2 7 6\n3 0 4 7\n3 0 7 3\n3 1 2 6\n3 1 6 5\n";
    return os.str();
}

std::string cube_obj(double h) {
    std::ostringstream os;
    os << "# unit test cube\n";
    const int sx[] = {-1, 1, 1, -1, -1, 1, 1, -1};
    const int sy[] = {-1, -1, 1, 1, -1, -1, 1, 1};
    const int sz[] = {-1, -1, -1, -1, 1, 1, 1, 1};
    for (int i = 0; i < 8; ++i)
        os << "v " << sx[i] * h << " " << sy[i] * h << " " << sz[i] * h << "\n";
    // 1-based, a few with texture/normal slashes to exercise the parser
    os << "f 1/1 3/1 2/1\nf 1 4 3\nf 5 6 7\nf 5 7 8\nf 1 2 6\nf 1 6 5\n"
       << "f 3 4 8\nf 3 8 7\nf 1/2/3 5/2/3 8/2/3\nf 1 8 4\nf 2 3 7\nf 2 7 6\n";
    return os.str();
}

TEST(Mesh, OffAndObjLoadTheSameCube) {
    const std::string off_path = temp_path("cube.off");
    const std::string obj_path = temp_path("cube.obj");
    write_text(off_path, cube_off(0.4));
    write_text(obj_path, cube_obj(0.4));
    const TriMesh a = read_mesh(off_path);
    const TriMesh b = read_mesh(obj_path);
    ASSERT_EQ(a.vertices.size(), 8u);
    ASSERT_EQ(b.vertices.size(), 8u);
    ASSERT_EQ(a.faces.size(), 12u);
    ASSERT_EQ(b.faces.size(), 12u);
    EXPECT_TRUE(is_watertight(a));
    EXPECT_TRUE(is_watertight(b));
    // same inside/outside decisions at random probes regardless of format
    Rng rng(41);
    for (int i = 0; i < 200; ++i) {
        const Vec3 p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        EXPECT_EQ(point_inside(a, p), point_inside(b, p));
    }
    std::remove(off_path.c_str());
    std::remove(obj_path.c_str());
}

TEST(Mesh, ParityInsideTestMatchesBoxOracle) {
    const std::string path = temp_path("cube_oracle.off");
    write_text(path, cube_off(0.4));
    const TriMesh m = read_mesh(path);
    Rng rng(42);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const Vec3 p = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const double margin = std::max({std::abs(p[0]), std::abs(p[1]), std::abs(p[2])}) - 0.4;
        if (std::abs(margin) < 1e-6) continue;  // skip razor-edge cases
        EXPECT_EQ(point_inside(m, p), margin < 0.0) << "at (" << p[0] << "," << p[1] << "," << p[2] << ")";
        ++checked;
    }
    EXPECT_GT(checked, 450);
    std::remove(path.c_str());
}

TEST(Mesh, RejectsNonWatertightAndMalformed) {
    // drop the last face: one open quad
    std::string holey = cube_off(0.4);
    holey = holey.substr(0, holey.rfind("3 1 6 5"));
    holey.replace(holey.find("8 12 0"), 6, "8 11 0");
    const std::string holey_path = temp_path("holey.off");
    write_text(holey_path, holey);
    const TriMesh open_mesh = read_mesh(holey_path);
    EXPECT_FALSE(is_watertight(open_mesh));
    EXPECT_THROW(make_occupancy_task(open_mesh, 100, 1), ConfigError);
    std::remove(holey_path.c_str());

    const std::string quad_path = temp_path("quad.off");
    write_text(quad_path, "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n");
    EXPECT_THROW(read_mesh(quad_path), ConfigError);
    std::remove(quad_path.c_str());

    EXPECT_THROW(read_mesh(temp_path("missing.off")), ConfigError);
    EXPECT_THROW(read_mesh(temp_path("model.stl")), ConfigError);
}

TEST(Mesh, OccupancyTaskFromMeshMatchesVolume) {
    const std::string path = temp_path("cube_task.off");
    write_text(path, cube_off(0.4));
    const TriMesh m = read_mesh(path);
    const Dataset ds = make_occupancy_task(m, 30000, 9);
    ds.validate();
    const auto comp = occupancy_composition(ds.size());
    double inside = 0.0;
    for (std::int64_t i = 0; i < comp.n_uniform; ++i) inside += ds.targets[i];
    // cube volume fraction: (0.8)^3 / 8 = 0.064
    EXPECT_NEAR(inside / static_cast<double>(comp.n_uniform), 0.064, 0.01);
    std::remove(path.c_str());
}

TEST(Mesh, RejectsOutOfDomainGeometry) {
    const std::string path = temp_path("big.off");
    write_text(path, cube_off(1.5));
    const TriMesh m = read_mesh(path);
    EXPECT_THROW(make_occupancy_task(m, 100, 1), ConfigError);
    std::remove(path.c_str());
}

// ---------------------------------------------------------------- losses

TEST(Losses, MseExamples) {
    Tensor a({2}), b({2});
    a[0] = 0.0; a[1] = 0.0;
    b[0] = 1.0; b[1] = 1.0;
    EXPECT_DOUBLE_EQ(mse_loss(a, a), 0.0);
    EXPECT_DOUBLE_EQ(mse_loss(a, b), 1.0);
    Tensor c({3});
    EXPECT_THROW(mse_loss(a, c), ConfigError);
}

TEST(Losses, BceZeroLogitIsLogTwo) {
    Tensor z({1}), y({1});
    z[0] = 0.0;
    y[0] = 1.0;
    EXPECT_NEAR(bce_loss(z, y), std::log(2.0), 1e-15);
    y[0] = 0.0;
    EXPECT_NEAR(bce_loss(z, y), std::log(2.0), 1e-15);
}

TEST(Losses, BceIsStableAtExtremeLogits) {
    Tensor z({2}), y({2});
    z[0] = 500.0; z[1] = -500.0;
    y[0] = 1.0; y[1] = 0.0;
    EXPECT_NEAR(bce_loss(z, y), 0.0, 1e-12);  // confident and correct
    y[0] = 0.0; y[1] = 1.0;
    EXPECT_NEAR(bce_loss(z, y), 500.0, 1e-9);  // confident and wrong
}

TEST(Losses, BceRejectsSoftTargets) {
    Tensor z({1}), y({1});
    z[0] = 0.3;
    y[0] = 0.5;
    EXPECT_THROW(bce_loss(z, y), ConfigError);
}

TEST(Losses, BceMidpointConvexInLogit) {
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Tensor z1({1}), z2({1}), zm({1}), y({1});
        z1[0] = rng.uniform(-20.0, 20.0);
        z2[0] = rng.uniform(-20.0, 20.0);
        zm[0] = 0.5 * (z1[0] + z2[0]);
        y[0] = rng.rademacher() > 0 ? 1.0 : 0.0;
        EXPECT_LE(bce_loss(zm, y), 0.5 * (bce_loss(z1, y) + bce_loss(z2, y)) + 1e-12);
    }
}

// ---------------------------------------------------------------- metrics

TEST(Metrics, PsnrExamples) {
    Tensor a({4}), b({4});
    for (int i = 0; i < 4; ++i) {
        a[i] = 0.5;
        b[i] = 0.6;  // diff 0.1 everywhere -> mse exactly 0.01
    }
    EXPECT_DOUBLE_EQ(psnr(a, a), 99.0);
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-12);
}

TEST(Metrics, PsnrStrictlyDecreasesWithNoise) {
    const Image img = radial_chirp(24, 24);
    const Dataset ds = make_image_task(img);
    Rng rng(11);
    Tensor noise({ds.targets.numel()});
    for (std::int64_t i = 0; i < noise.numel(); ++i) noise[i] = rng.normal();
    double prev = psnr(ds.targets, ds.targets);
    for (double sigma : {0.005, 0.01, 0.02, 0.05, 0.1}) {
        Tensor pred = ds.targets;
        for (std::int64_t i = 0; i < pred.numel(); ++i) pred[i] += sigma * noise[i];
        const double cur = psnr(pred, ds.targets);
        EXPECT_LT(cur, prev) << "sigma " << sigma;
        prev = cur;
    }
}

TEST(Metrics, IouExamples) {
    Tensor p({4}), g({4});
    p[0] = 0.9; p[1] = 0.8; p[2] = 0.1; p[3] = 0.2;
    g[0] = 1.0; g[1] = 0.0; g[2] = 1.0; g[3] = 0.0;
    // pred {0,1}, gt {0,2}: intersection 1, union 3
    EXPECT_NEAR(iou(p, g), 1.0 / 3.0, 1e-15);
    EXPECT_DOUBLE_EQ(iou(g, g), 1.0);
    Tensor zp({3}), zg({3});
    EXPECT_DOUBLE_EQ(iou(zp, zg), 1.0);  // both empty
    EXPECT_THROW(iou(p, g, 0.0), ConfigError);
    EXPECT_THROW(iou(p, g, 1.0), ConfigError);
}

// ---------------------------------------------------------------- batching

TEST(Minibatches, SizesAndShortFinalBatch) {
    const Dataset ds = make_1d_task(10);
    MinibatchStream stream(ds, {3, 123});
    EXPECT_EQ(stream.batches_per_epoch(), 4);
    std::vector<std::int64_t> sizes;
    for (int i = 0; i < 3; ++i) sizes.push_back(stream.next().first.rows());
    EXPECT_EQ(stream.epoch(), 0);  // epoch() counts fully consumed epochs
    sizes.push_back(stream.next().first.rows());
    EXPECT_EQ(sizes, (std::vector<std::int64_t>{3, 3, 3, 1}));
    EXPECT_EQ(stream.epoch(), 1);
    EXPECT_EQ(stream.cursor(), 0);
}

TEST(Minibatches, SameSeedSameOrder) {
    const Dataset ds = make_1d_task(32);
    MinibatchStream a(ds, {5, 9}), b(ds, {5, 9});
    for (int i = 0; i < 14; ++i) {  // across two epoch boundaries
        const auto [xa, ya] = a.next();
        const auto [xb, yb] = b.next();
        ASSERT_EQ(xa.numel(), xb.numel());
        for (std::int64_t k = 0; k < xa.numel(); ++k) EXPECT_EQ(xa[k], xb[k]);
    }
}

TEST(Minibatches, EpochIsExactPermutation) {
    const Dataset ds = make_1d_task(17);
    MinibatchStream stream(ds, {4, 31});
    for (int epoch = 0; epoch < 3; ++epoch) {
        std::multiset<double> seen;
        for (int i = 0; i < stream.batches_per_epoch(); ++i) {
            const auto [x, y] = stream.next();
            for (std::int64_t k = 0; k < x.rows(); ++k) seen.insert(x.at(k, 0));
        }
        std::multiset<double> want;
        for (std::int64_t i = 0; i < ds.size(); ++i) want.insert(ds.inputs[i]);
        EXPECT_EQ(seen, want) << "epoch " << epoch;
    }
}

TEST(Minibatches, EpochsAreShuffledDifferently) {
    const Dataset ds = make_1d_task(64);
    MinibatchStream stream(ds, {64, 5});
    const auto [x0, y0] = stream.next();
    const auto [x1, y1] = stream.next();
    double diff = 0.0;
    for (std::int64_t i = 0; i < x0.numel(); ++i) diff += std::abs(x0[i] - x1[i]);
    EXPECT_GT(diff, 0.0);
}

TEST(Minibatches, SeekReconstructsStreamPosition) {
    const Dataset ds = make_1d_task(23);
    MinibatchStream a(ds, {4, 77});
    for (int i = 0; i < 9; ++i) a.next();  // epoch 1, cursor 3
    MinibatchStream b(ds, {4, 77});
    b.seek(a.epoch(), a.cursor());
    for (int i = 0; i < 8; ++i) {
        const auto [xa, ya] = a.next();
        const auto [xb, yb] = b.next();
        ASSERT_EQ(xa.numel(), xb.numel());
        for (std::int64_t k = 0; k < xa.numel(); ++k) EXPECT_EQ(xa[k], xb[k]);
    }
}

TEST(Minibatches, ValidatesBatchSize) {
    const Dataset ds = make_1d_task(8);
    EXPECT_THROW(MinibatchStream(ds, {0, 1}), ConfigError);
    EXPECT_THROW(MinibatchStream(ds, {9, 1}), ConfigError);
    EXPECT_THROW(MinibatchStream(ds, {4, 1}).seek(0, 2), ConfigError);
}

}  // namespace
}  // namespace nfp
