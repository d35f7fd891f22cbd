#include "reslab/phantom.hpp"

#include "reslab/errors.hpp"
#include "reslab/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

namespace reslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// RMS of the multiplicative tissue texture and its wavelength range in pixels.
constexpr double kTextureAmplitude = 0.2;
constexpr double kTextureMinWavelength = 2.0;
constexpr double kTextureMaxWavelength = 5.0;
// Cap below 1 so an intensity-1 anomaly never coincides with object pixels.
constexpr double kMaxObjectValue = 0.98;
// How far sulci reach below the cortex's inner boundary (head-radius units).
constexpr double kSulcusDepth = 0.08;

struct Ellipse {
    double cx, cy;  // head-frame units (fractions of the head semi-axes)
    double rx, ry;
    double angle;

    double level(double x, double y) const {
        const double c = std::cos(angle), s = std::sin(angle);
        const double dx = x - cx, dy = y - cy;
        const double u = (c * dx + s * dy) / rx;
        const double v = (-s * dx + c * dy) / ry;
        return u * u + v * v;
    }
};

struct Wave {
    double amplitude, fx, fy, phase;
};

struct Fold {
    double amplitude;
    int count;
    double phase;
};

struct Layout {
    double cx, cy;  // pixels
    double ax, ay;  // head semi-axes, pixels
    double rotation;
    std::array<double, 4> outer_wobble;  // amp2, phase2, amp3, phase3

    double rim_depth, rim_phase;
    double cortex_base;
    std::vector<Fold> folds;  // angular modulation of the cortex's inner boundary
    std::vector<double> sulci;  // angles
    double sulcus_half_width;   // pixels

    int bands;
    double rim_level, cortex_level, white_level, nuclei_level, halo_level, ventricle_level;
    std::array<Ellipse, 2> ventricles;
    std::array<Ellipse, 2> nuclei;
    std::vector<Wave> bias;
    std::vector<Wave> texture;  // band-limited tissue texture, frequencies in cycles/pixel
};

Layout draw_layout(std::uint64_t seed, std::size_t height, std::size_t width) {
    SplitMix64 rng(mix64(seed ^ 0x5048414e544f4dULL));
    const double half = 0.5 * static_cast<double>(std::min(height, width));
    Layout L{};
    L.cx = 0.5 * static_cast<double>(width) + rng.uniform(-0.004, 0.004) * half;
    L.cy = 0.5 * static_cast<double>(height) + rng.uniform(-0.004, 0.004) * half;
    L.ax = rng.uniform(0.752, 0.758) * half;
    L.ay = rng.uniform(0.862, 0.868) * half;
    L.rotation = rng.uniform(-0.01, 0.01);
    L.outer_wobble = {rng.uniform(0.0, 0.005), rng.uniform(0.0, kTwoPi), rng.uniform(0.0, 0.004),
                      rng.uniform(0.0, kTwoPi)};

    L.rim_depth = rng.uniform(0.88, 0.92);
    L.rim_phase = rng.uniform(0.0, kTwoPi);
    L.cortex_base = rng.uniform(0.66, 0.72);
    for (int k = 0; k < 4; ++k) {
        const int count = 8 + static_cast<int>(rng.below(33));
        L.folds.push_back(Fold{rng.uniform(0.03, 0.06), count, rng.uniform(0.0, kTwoPi)});
    }
    const int sulci = 8 + static_cast<int>(rng.below(7));
    for (int k = 0; k < sulci; ++k) {
        L.sulci.push_back((k + rng.uniform(-0.3, 0.3)) * kTwoPi / sulci);
    }
    L.sulcus_half_width = rng.uniform(0.6, 1.1) * half / 64.0;

    L.bands = 3 + static_cast<int>(rng.below(3));
    L.rim_level = rng.uniform(0.585, 0.625);
    L.cortex_level = rng.uniform(0.415, 0.44);
    L.white_level = rng.uniform(0.405, 0.42);
    L.nuclei_level = rng.uniform(0.39, 0.405);
    L.halo_level = rng.uniform(0.24, 0.25);
    L.ventricle_level = rng.uniform(0.16, 0.17);

    const double vspread = rng.uniform(0.10, 0.12);
    const double vlen = rng.uniform(0.21, 0.24);
    const double vwid = rng.uniform(0.06, 0.07);
    const double vtilt = rng.uniform(0.32, 0.38);
    const double vshift = rng.uniform(-0.07, -0.04);
    L.ventricles = {Ellipse{-vspread, vshift, vwid, vlen, vtilt}, Ellipse{vspread, vshift, vwid, vlen, -vtilt}};
    const double nspread = rng.uniform(0.24, 0.32);
    const double nsize = rng.uniform(0.08, 0.12);
    const double nshift = rng.uniform(0.02, 0.12);
    L.nuclei = {Ellipse{-nspread, nshift, nsize, 1.4 * nsize, 0.2},
                Ellipse{nspread, nshift, nsize, 1.4 * nsize, -0.2}};

    for (int k = 0; k < 4; ++k) {
        const double theta = rng.uniform(0.0, kTwoPi);
        const double freq = rng.uniform(0.5, 2.0);
        L.bias.push_back(Wave{rng.uniform(0.015, 0.03), freq * std::cos(theta), freq * std::sin(theta),
                              rng.uniform(0.0, kTwoPi)});
    }
    for (int k = 0; k < 24; ++k) {
        const double theta = rng.uniform(0.0, kTwoPi);
        const double freq = rng.uniform(1.0 / kTextureMaxWavelength, 1.0 / kTextureMinWavelength);
        L.texture.push_back(Wave{1.0, freq * std::cos(theta), freq * std::sin(theta), rng.uniform(0.0, kTwoPi)});
    }
    return L;
}

double angular_distance(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return d > std::numbers::pi ? kTwoPi - d : d;
}

}  // namespace

Phantom make_phantom(std::uint64_t seed, std::size_t height, std::size_t width) {
    require(height >= kMinPhantomSize && width >= kMinPhantomSize, ErrorCode::kInvalidArgument,
            "make_phantom: dimensions must be at least 64x64");
    const Layout L = draw_layout(seed, height, width);
    const double cr = std::cos(L.rotation), sr = std::sin(L.rotation);
    const double mean_radius = 0.5 * (L.ax + L.ay);

    Phantom p{Grid(height, width, 0.0f), BinaryMask(height, width)};
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double px = static_cast<double>(c) + 0.5 - L.cx;
            const double py = static_cast<double>(r) + 0.5 - L.cy;
            const double x = (cr * px + sr * py) / L.ax;
            const double y = (-sr * px + cr * py) / L.ay;
            const double rho = std::hypot(x, y);
            const double phi = std::atan2(y, x);

            const double outer = 1.0 + L.outer_wobble[0] * std::sin(2 * phi + L.outer_wobble[1]) +
                                 L.outer_wobble[2] * std::sin(3 * phi + L.outer_wobble[3]);
            if (rho > outer) continue;

            const double rim_inner = outer * (L.rim_depth + 0.01 * std::sin(5 * phi + L.rim_phase));
            double fold = L.cortex_base;
            for (const auto& f : L.folds) fold += f.amplitude * std::sin(f.count * phi + f.phase);
            const double cortex_inner = outer * fold;

            const bool in_sulcus =
                rho >= cortex_inner - kSulcusDepth &&
                std::any_of(L.sulci.begin(), L.sulci.end(), [&](double a) {
                    return angular_distance(phi, a) * rho * mean_radius < L.sulcus_half_width;
                });

            double level;
            if (rho >= rim_inner || in_sulcus) {
                level = L.rim_level;
            } else if (rho >= cortex_inner) {
                level = L.cortex_level;
            } else {
                level = L.white_level;
                if (L.bands >= 4) {
                    for (const auto& e : L.nuclei) {
                        if (e.level(x, y) <= 1.0) level = L.nuclei_level;
                    }
                }
                for (const auto& e : L.ventricles) {
                    const double v = e.level(x, y);
                    if (v <= 1.0) {
                        level = L.ventricle_level;
                        break;
                    }
                    if (L.bands >= 5 && v <= 2.2) level = L.halo_level;
                }
            }

            double bias = 1.0;
            for (const auto& w : L.bias) {
                bias += w.amplitude * std::sin(kTwoPi * (w.fx * px + w.fy * py) / (2.0 * mean_radius) + w.phase);
            }
            double grain = 0.0;
            for (const auto& w : L.texture) grain += std::sin(kTwoPi * (w.fx * px + w.fy * py) + w.phase);
            grain *= kTextureAmplitude / std::sqrt(static_cast<double>(L.texture.size()));
            p.image(r, c) = static_cast<float>(std::min(level * bias * (1.0 + grain), kMaxObjectValue));
            p.mask.set(r, c, true);
        }
    }
    return p;
}

Dataset make_phantom_set(std::uint64_t seed, DatasetRole role, std::size_t count, std::size_t size) {
    Dataset data;
    data.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Phantom p = make_phantom(derive_seed(seed, "phantom", i, to_string(role)), size, size);
        char stem[64];
        std::snprintf(stem, sizeof stem, "phantom_%s_%04zu", to_string(role), i);
        data.push_back(Sample{stem, std::move(p.image), std::move(p.mask)});
    }
    return data;
}

}  // namespace reslab
