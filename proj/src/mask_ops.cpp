#include "maskguide/mask_ops.hpp"

#include <algorithm>
#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

BinaryMask::BinaryMask(int h, int w, std::uint8_t fill) : height(h), width(w) {
    check_arg(h >= 1 && w >= 1, "BinaryMask dimensions must be >= 1");
    check_arg(fill == 0 || fill == 1, "BinaryMask fill must be 0 or 1");
    values.assign(static_cast<std::size_t>(h) * w, fill);
}

BinaryMask BinaryMask::complement() const {
    BinaryMask out = *this;
    for (auto& v : out.values) v = static_cast<std::uint8_t>(1 - v);
    return out;
}

std::int64_t BinaryMask::area() const {
    std::int64_t n = 0;
    for (auto v : values) n += v;
    return n;
}

SoftMask::SoftMask(int h, int w, float fill) : height(h), width(w) {
    check_arg(h >= 1 && w >= 1, "SoftMask dimensions must be >= 1");
    values.assign(static_cast<std::size_t>(h) * w, fill);
}

SoftMask SoftMask::from_binary(const BinaryMask& m) {
    SoftMask out(m.height, m.width);
    for (std::size_t i = 0; i < m.values.size(); ++i) out.values[i] = static_cast<float>(m.values[i]);
    return out;
}

StructuringElement StructuringElement::square(int k) {
    check_arg(k >= 1 && k % 2 == 1, "structuring element size must be odd and >= 1");
    StructuringElement se;
    se.size = k;
    se.shape.assign(static_cast<std::size_t>(k) * k, 1);
    return se;
}

StructuringElement StructuringElement::cross(int k) {
    check_arg(k >= 1 && k % 2 == 1, "structuring element size must be odd and >= 1");
    StructuringElement se;
    se.size = k;
    se.shape.assign(static_cast<std::size_t>(k) * k, 0);
    int c = k / 2;
    for (int i = 0; i < k; ++i) {
        se.shape[static_cast<std::size_t>(c) * k + i] = 1;
        se.shape[static_cast<std::size_t>(i) * k + c] = 1;
    }
    return se;
}

void StructuringElement::validate() const {
    check_arg(size >= 1 && size % 2 == 1, "structuring element size must be odd and >= 1");
    check_arg(shape.size() == static_cast<std::size_t>(size) * size, "structuring element shape size mismatch");
    int c = size / 2;
    check_arg(shape[static_cast<std::size_t>(c) * size + c] == 1, "structuring element center must be 1");
}

// out[p] = 1 iff any mask pixel under the reflected se footprint at p is 1.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se) {
    se.validate();
    int c = se.size / 2;
    BinaryMask out(mask.height, mask.width);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            std::uint8_t v = 0;
            for (int i = 0; i < se.size && !v; ++i) {
                for (int j = 0; j < se.size; ++j) {
                    if (!se.shape[static_cast<std::size_t>(i) * se.size + j]) continue;
                    int yy = y + (c - i);  // reflected footprint
                    int xx = x + (c - j);
                    if (yy < 0 || yy >= mask.height || xx < 0 || xx >= mask.width) continue;
                    if (mask.at(yy, xx)) {
                        v = 1;
                        break;
                    }
                }
            }
            out.at(y, x) = v;
        }
    }
    return out;
}

// out[p] = 1 iff every se neighbor of p is 1; out-of-bounds reads as 0.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se) {
    se.validate();
    int c = se.size / 2;
    BinaryMask out(mask.height, mask.width);
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            std::uint8_t v = 1;
            for (int i = 0; i < se.size && v; ++i) {
                for (int j = 0; j < se.size; ++j) {
                    if (!se.shape[static_cast<std::size_t>(i) * se.size + j]) continue;
                    int yy = y + (i - c);
                    int xx = x + (j - c);
                    if (yy < 0 || yy >= mask.height || xx < 0 || xx >= mask.width || !mask.at(yy, xx)) {
                        v = 0;
                        break;
                    }
                }
            }
            out.at(y, x) = v;
        }
    }
    return out;
}

BinaryMask open(const BinaryMask& mask, const StructuringElement& se) {
    return dilate(erode(mask, se), se);
}

BinaryMask close(const BinaryMask& mask, const StructuringElement& se) {
    return erode(dilate(mask, se), se);
}

BinaryMask refine_mask(const BinaryMask& mask, const RefineParams& params) {
    return dilate(open(close(mask, params.se_close), params.se_open), params.se_dilate);
}

float cubic_weight(float x) {
    constexpr float a = -0.5f;  // Catmull-Rom
    x = std::fabs(x);
    if (x <= 1.f) return ((a + 2.f) * x - (a + 3.f)) * x * x + 1.f;
    if (x < 2.f) return a * (((x - 5.f) * x + 8.f) * x - 4.f);
    return 0.f;
}

namespace {

// 1-d cubic resample of each row: in is rows×in_w, out rows×out_w.
void resample_rows(const std::vector<float>& in, int rows, int in_w, int out_w, std::vector<float>& out) {
    float scale = static_cast<float>(in_w) / static_cast<float>(out_w);
    for (int r = 0; r < rows; ++r) {
        const float* src = in.data() + static_cast<std::size_t>(r) * in_w;
        float* dst = out.data() + static_cast<std::size_t>(r) * out_w;
        for (int x = 0; x < out_w; ++x) {
            float sx = (static_cast<float>(x) + 0.5f) * scale - 0.5f;
            int base = static_cast<int>(std::floor(sx));
            float acc = 0.f;
            for (int k = -1; k <= 2; ++k) {
                int ix = std::clamp(base + k, 0, in_w - 1);
                acc += cubic_weight(sx - static_cast<float>(base + k)) * src[ix];
            }
            dst[x] = acc;
        }
    }
}

void transpose(const std::vector<float>& in, int rows, int cols, std::vector<float>& out) {
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out[static_cast<std::size_t>(c) * rows + r] = in[static_cast<std::size_t>(r) * cols + c];
}

}  // namespace

SoftMask downsample_cubic(const SoftMask& mask, int target_h, int target_w) {
    check_arg(target_h >= 1 && target_w >= 1, "target dimensions must be >= 1");
    check_arg(target_h <= mask.height && target_w <= mask.width,
              "downsample_cubic target must not exceed source dimensions");

    std::vector<float> a(static_cast<std::size_t>(mask.height) * target_w);
    resample_rows(mask.values, mask.height, mask.width, target_w, a);
    std::vector<float> at(static_cast<std::size_t>(target_w) * mask.height);
    transpose(a, mask.height, target_w, at);
    std::vector<float> b(static_cast<std::size_t>(target_w) * target_h);
    resample_rows(at, target_w, mask.height, target_h, b);

    SoftMask out(target_h, target_w);
    for (int y = 0; y < target_h; ++y)
        for (int x = 0; x < target_w; ++x)
            out.at(y, x) = std::clamp(b[static_cast<std::size_t>(x) * target_h + y], 0.f, 1.f);
    return out;
}

SoftMask downsample_cubic(const BinaryMask& mask, int target_h, int target_w) {
    return downsample_cubic(SoftMask::from_binary(mask), target_h, target_w);
}

MaskPyramid build_mask_pyramid(const BinaryMask& mask, int base_latent_size) {
    check_arg(base_latent_size >= 8 && base_latent_size % 8 == 0,
              "base latent size must be divisible by 8");
    MaskPyramid pyr;
    pyr.index_map = kInjectionIndexMap;
    for (int level = 0; level < 4; ++level) {
        int side = base_latent_size >> level;
        pyr.levels[static_cast<std::size_t>(level)] = downsample_cubic(mask, side, side);
    }
    return pyr;
}

}  // namespace mg
