#include "maskguide/synth.hpp"

#include <algorithm>
#include <cmath>

#include "maskguide/errors.hpp"
#include "maskguide/rng.hpp"

namespace mg {

namespace {

struct PaletteEntry {
    const char* name;
    std::array<float, 3> rgb;
};

constexpr std::array<PaletteEntry, 7> kPalette = {{
    {"red", {0.85f, 0.10f, 0.10f}},
    {"green", {0.10f, 0.75f, 0.10f}},
    {"blue", {0.10f, 0.20f, 0.85f}},
    {"yellow", {0.90f, 0.85f, 0.10f}},
    {"magenta", {0.85f, 0.10f, 0.80f}},
    {"cyan", {0.10f, 0.80f, 0.85f}},
    {"orange", {0.95f, 0.55f, 0.05f}},
}};

constexpr int kBorderMargin = 4;

float dist3(const std::array<float, 3>& a, const float* b) {
    float d0 = a[0] - b[0], d1 = a[1] - b[1], d2 = a[2] - b[2];
    return std::sqrt(d0 * d0 + d1 * d1 + d2 * d2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t h = seed * 0x9e3779b97f4a7c15ull + salt;
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    return h;
}

// exact shape support rasterizers
BinaryMask raster_disk(int s, float cx, float cy, float r) {
    BinaryMask m(s, s);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            float dx = static_cast<float>(x) - cx, dy = static_cast<float>(y) - cy;
            if (dx * dx + dy * dy <= r * r) m.at(y, x) = 1;
        }
    return m;
}

BinaryMask raster_rect(int s, int x0, int y0, int x1, int y1) {
    BinaryMask m(s, s);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m.at(y, x) = 1;
    return m;
}

BinaryMask raster_capsule(int s, float ax, float ay, float bx, float by, float r) {
    BinaryMask m(s, s);
    float vx = bx - ax, vy = by - ay;
    float len2 = vx * vx + vy * vy;
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
            float px = static_cast<float>(x) - ax, py = static_cast<float>(y) - ay;
            float t = len2 > 0.f ? std::clamp((px * vx + py * vy) / len2, 0.f, 1.f) : 0.f;
            float dx = px - t * vx, dy = py - t * vy;
            if (dx * dx + dy * dy <= r * r) m.at(y, x) = 1;
        }
    return m;
}

bool mask_ok(const BinaryMask& m, double lo, double hi, int margin) {
    double frac = static_cast<double>(m.area()) / (static_cast<double>(m.height) * m.width);
    if (frac < lo || frac > hi) return false;
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x)
            if (m.at(y, x) && (y < margin || y >= m.height - margin || x < margin || x >= m.width - margin))
                return false;
    return true;
}

}  // namespace

float min_color_separation() { return 0.35f; }

SyntheticScene gen_scene(std::uint64_t seed, int size) {
    check_arg(size >= 32, "scene size too small");
    SyntheticScene sc;
    sc.seed = seed;

    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(mix_seed(seed, attempt));
        int pi = rng.uniform_int(0, static_cast<int>(kPalette.size()) - 1);
        sc.shape_color = kPalette[static_cast<std::size_t>(pi)].rgb;
        std::string color_name = kPalette[static_cast<std::size_t>(pi)].name;

        float g = rng.uniform(0.35f, 0.65f);
        sc.bg_color = {g + rng.uniform(-0.04f, 0.04f), g + rng.uniform(-0.04f, 0.04f),
                       g + rng.uniform(-0.04f, 0.04f)};

        int kind = rng.uniform_int(0, 2);
        sc.kind = static_cast<ShapeKind>(kind);
        float s = static_cast<float>(size);
        const char* shape_name = "disk";
        if (sc.kind == ShapeKind::disk) {
            float r = rng.uniform(0.19f, 0.35f) * s;
            float cx = rng.uniform(kBorderMargin + r + 1.f, s - kBorderMargin - r - 2.f);
            float cy = rng.uniform(kBorderMargin + r + 1.f, s - kBorderMargin - r - 2.f);
            sc.instance_mask = raster_disk(size, cx, cy, r);
        } else if (sc.kind == ShapeKind::rectangle) {
            shape_name = "box";
            int w = static_cast<int>(rng.uniform(0.32f, 0.62f) * s);
            int h = static_cast<int>(rng.uniform(0.32f, 0.62f) * s);
            int x0 = rng.uniform_int(kBorderMargin, size - kBorderMargin - w - 1);
            int y0 = rng.uniform_int(kBorderMargin, size - kBorderMargin - h - 1);
            sc.instance_mask = raster_rect(size, x0, y0, x0 + w - 1, y0 + h - 1);
        } else {
            shape_name = "capsule";
            float r = rng.uniform(0.10f, 0.18f) * s;
            float len = rng.uniform(0.3f, 0.6f) * s;
            float ang = rng.uniform(0.f, 3.14159265f);
            float cx = s / 2 + rng.uniform(-0.1f, 0.1f) * s;
            float cy = s / 2 + rng.uniform(-0.1f, 0.1f) * s;
            float ax = cx - 0.5f * len * std::cos(ang), ay = cy - 0.5f * len * std::sin(ang);
            float bx = cx + 0.5f * len * std::cos(ang), by = cy + 0.5f * len * std::sin(ang);
            float pad = kBorderMargin + r + 1.f;
            if (ax < pad || ax > s - pad || ay < pad || ay > s - pad || bx < pad || bx > s - pad ||
                by < pad || by > s - pad)
                continue;
            sc.instance_mask = raster_capsule(size, ax, ay, bx, by, r);
        }
        if (!mask_ok(sc.instance_mask, 0.10, 0.40, kBorderMargin)) continue;

        // render: textured background, lightly shaded shape
        sc.image = Tensor({3, size, size});
        float fx = rng.uniform(1.f, 4.f), fy = rng.uniform(1.f, 4.f);
        float ph = rng.uniform(0.f, 6.28f);
        float shade_ph = rng.uniform(0.f, 6.28f);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                float tex = 0.05f * std::sin(6.28318f * (fx * x + fy * y) / s + ph) +
                            0.03f * std::sin(6.28318f * (fy * x - fx * y) / (0.5f * s) - ph);
                if (sc.instance_mask.at(y, x)) {
                    float shade = 0.94f + 0.06f * std::sin(0.05f * (x + y) + shade_ph);
                    for (int c = 0; c < 3; ++c)
                        sc.image.at(c, y, x) = std::clamp(sc.shape_color[static_cast<std::size_t>(c)] * shade, 0.f, 1.f);
                } else {
                    for (int c = 0; c < 3; ++c)
                        sc.image.at(c, y, x) =
                            std::clamp(sc.bg_color[static_cast<std::size_t>(c)] + tex, 0.f, 1.f);
                }
            }
        sc.prompt = std::string("a ") + color_name + " " + shape_name + " product photo";
        return sc;
    }
}

BinaryMask sample_random_mask(std::uint64_t seed, int height, int width) {
    for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(mix_seed(seed, 0x5eed + attempt));
        BinaryMask m(height, width);
        int n = rng.uniform_int(1, 4);
        float s = static_cast<float>(std::min(height, width));
        for (int i = 0; i < n; ++i) {
            int kind = rng.uniform_int(0, 2);
            BinaryMask prim(height, width);
            if (kind == 0) {
                int w = std::max(2, static_cast<int>(rng.uniform(0.15f, 0.5f) * width));
                int h = std::max(2, static_cast<int>(rng.uniform(0.15f, 0.5f) * height));
                int x0 = rng.uniform_int(0, width - w);
                int y0 = rng.uniform_int(0, height - h);
                prim = raster_rect(std::max(height, width), x0, y0, x0 + w - 1, y0 + h - 1);
            } else if (kind == 1) {
                float cx = rng.uniform(0.f, static_cast<float>(width - 1));
                float cy = rng.uniform(0.f, static_cast<float>(height - 1));
                float r = rng.uniform(0.08f, 0.3f) * s;
                prim = raster_disk(std::max(height, width), cx, cy, r);
            } else {
                float ax = rng.uniform(0.f, static_cast<float>(width - 1));
                float ay = rng.uniform(0.f, static_cast<float>(height - 1));
                float ang = rng.uniform(0.f, 6.28318f);
                float len = rng.uniform(0.3f, 0.8f) * s;
                float r = rng.uniform(0.05f, 0.15f) * s;
                prim = raster_capsule(std::max(height, width), ax, ay, ax + len * std::cos(ang),
                                      ay + len * std::sin(ang), r);
            }
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) m.at(y, x) |= prim.at(y, x);
        }
        double frac = static_cast<double>(m.area()) / (static_cast<double>(height) * width);
        if (frac >= 0.10 && frac <= 0.60) return m;
    }
}

BinaryMask sample_instance_mask(const SyntheticScene& scene, int dilate_px) {
    check_arg(dilate_px >= 0, "dilate_px must be >= 0");
    if (dilate_px == 0) return scene.instance_mask;
    return dilate(scene.instance_mask, StructuringElement::square(2 * dilate_px + 1));
}

double overcompletion_score(const Tensor& generated, const SyntheticScene& scene, int band_px) {
    check_arg(generated.same_shape(scene.image), "generated image size mismatch");
    BinaryMask band = band_px > 0
                          ? dilate(scene.instance_mask, StructuringElement::square(2 * band_px + 1))
                          : scene.instance_mask;
    std::int64_t fg = 0, escaped = 0;
    int h = generated.dim(1), w = generated.dim(2);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float px[3] = {generated.at(0, y, x), generated.at(1, y, x), generated.at(2, y, x)};
            bool is_fg = dist3(scene.shape_color, px) < dist3(scene.bg_color, px);
            if (!is_fg) continue;
            ++fg;
            if (!band.at(y, x)) ++escaped;
        }
    if (fg == 0) return 0.0;
    return static_cast<double>(escaped) / static_cast<double>(fg);
}

}  // namespace mg
