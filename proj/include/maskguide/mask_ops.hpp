#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace mg {

// Binary mask over {0,1}. Polarity convention: 1 = region to generate (the
// "hole"), 0 = region to preserve. The product mask is the complement.
struct BinaryMask {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> values;  // H*W, each exactly 0 or 1

    BinaryMask() = default;
    BinaryMask(int h, int w, std::uint8_t fill = 0);

    std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }

    BinaryMask complement() const;
    std::int64_t area() const;  // number of 1 pixels
    bool operator==(const BinaryMask&) const = default;
};

// Grayscale mask with values in [0,1].
struct SoftMask {
    int height = 0;
    int width = 0;
    std::vector<float> values;

    SoftMask() = default;
    SoftMask(int h, int w, float fill = 0.f);
    static SoftMask from_binary(const BinaryMask& m);

    float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
};

// k×k binary kernel, k odd, center element set.
struct StructuringElement {
    int size = 0;
    std::vector<std::uint8_t> shape;  // k*k

    static StructuringElement square(int k);
    static StructuringElement cross(int k);
    void validate() const;
};

// Refined mask resampled to the four control-injection resolutions
// (L, L/2, L/4, L/8) plus the injection-point → level assignment.
struct MaskPyramid {
    std::array<SoftMask, 4> levels;
    std::array<int, 13> index_map;
};

constexpr std::array<int, 13> kInjectionIndexMap = {0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3};

// Morphology. Out-of-bounds neighbors read as 0 for both erosion and
// dilation, so erosion shrinks masks touching the border.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask open(const BinaryMask& mask, const StructuringElement& se);
BinaryMask close(const BinaryMask& mask, const StructuringElement& se);

struct RefineParams {
    StructuringElement se_close = StructuringElement::square(3);
    StructuringElement se_open = StructuringElement::square(3);
    StructuringElement se_dilate = StructuringElement::square(5);
};

// close → open → dilate
BinaryMask refine_mask(const BinaryMask& mask, const RefineParams& params = {});

// Separable Catmull-Rom (a = -0.5) resampling with pixel-center alignment,
// clamped to [0,1]. Pure interpolation: 4 source taps per output sample.
SoftMask downsample_cubic(const SoftMask& mask, int target_h, int target_w);
SoftMask downsample_cubic(const BinaryMask& mask, int target_h, int target_w);

// Cubic kernel weight, exposed for the 1-d oracles in tests.
float cubic_weight(float x);

MaskPyramid build_mask_pyramid(const BinaryMask& mask, int base_latent_size);

}  // namespace mg
