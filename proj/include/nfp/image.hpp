#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "nfp/errors.hpp"

namespace nfp {

// 8-bit RGB raster held as doubles in [0,1]. Values are always exact
// multiples of 1/255 after I/O, which is what makes the dataset round-trip
// (pixels -> training targets -> rendered image) bit-identical.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major, 3 channels per pixel

    Image() = default;
    Image(int w, int h) : width(w), height(h) {
        if (w < 1 || h < 1) throw ConfigError("image: dimensions must be positive");
        pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 0.0);
    }

    double& at(int row, int col, int ch) {
        return pixels[(static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(col)) * 3 + static_cast<std::size_t>(ch)];
    }
    double at(int row, int col, int ch) const {
        return pixels[(static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                       static_cast<std::size_t>(col)) * 3 + static_cast<std::size_t>(ch)];
    }
};

namespace detail {

// PPM header fields are separated by whitespace and may be interleaved with
// '#' comment lines.
inline int read_ppm_int(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
        }
        c = in.get();
    }
    if (c == EOF || !std::isdigit(c)) throw ConfigError("ppm: malformed header");
    int value = 0;
    while (std::isdigit(c)) {
        value = value * 10 + (c - '0');
        if (value > 1 << 24) throw ConfigError("ppm: header value out of range");
        c = in.get();
    }
    if (c != EOF) in.unget();
    return value;
}

}  // namespace detail

// Binary PPM (P6), 8-bit channels only.
inline Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("ppm: cannot open '" + path + "'");
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '6') throw ConfigError("ppm: '" + path + "' is not binary PPM (P6)");
    const int width = detail::read_ppm_int(in);
    const int height = detail::read_ppm_int(in);
    const int maxval = detail::read_ppm_int(in);
    if (width < 1 || height < 1) throw ConfigError("ppm: non-positive dimensions");
    if (maxval != 255)
        throw ConfigError("ppm: only 8-bit channels supported (maxval 255, got " +
                          std::to_string(maxval) + ")");
    in.get();  // single whitespace byte before the raster
    Image img(width, height);
    const std::size_t n = img.pixels.size();
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw ConfigError("ppm: truncated pixel data in '" + path + "'");
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = raw[i] / 255.0;
    return img;
}

inline void write_ppm(const std::string& path, const Image& img) {
    if (img.width < 1 || img.height < 1) throw ConfigError("ppm: empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("ppm: cannot write '" + path + "'");
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        double v = img.pixels[i];
        if (!(v >= 0.0)) v = 0.0;  // also catches NaN
        if (v > 1.0) v = 1.0;
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw ConfigError("ppm: write failed for '" + path + "'");
}

// Built-in test pattern: three radial chirps (instantaneous frequency grows
// with radius), one per channel with distinct rates. Gives a dataset with
// mixed low/high frequency content and no external asset. Quantized to
// 8-bit so it behaves exactly like a loaded PPM.
inline Image radial_chirp(int width, int height) {
    Image img(width, height);
    const double pi = 3.14159265358979323846;
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            const double x = (2.0 * j + 1.0) / width - 1.0;
            const double y = (2.0 * i + 1.0) / height - 1.0;
            const double r = std::sqrt(x * x + y * y);
            // frequency at radius r is f0 + 2*k*r cycles per unit; the
            // steepest channel stays below ~0.35 cycles/pixel at 64x64.
            const double c0 = 0.5 + 0.5 * std::sin(2.0 * pi * (1.5 * r + 3.0 * r * r));
            const double c1 = 0.5 + 0.5 * std::sin(2.0 * pi * (1.0 * r + 3.5 * r * r) + 1.0);
            const double c2 = 0.5 + 0.5 * std::cos(2.0 * pi * (2.5 * r + 2.0 * r * r));
            img.at(i, j, 0) = std::lround(c0 * 255.0) / 255.0;
            img.at(i, j, 1) = std::lround(c1 * 255.0) / 255.0;
            img.at(i, j, 2) = std::lround(c2 * 255.0) / 255.0;
        }
    }
    return img;
}

}  // namespace nfp
