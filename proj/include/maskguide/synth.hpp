#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "maskguide/mask_ops.hpp"
#include "maskguide/tensor.hpp"

namespace mg {

enum class ShapeKind { disk, rectangle, capsule };

// One colored geometric "product" on a textured near-gray background, with
// its exact instance mask. The shape/background palettes are separated by a
// fixed color distance so the overcompletion metric can classify pixels.
struct SyntheticScene {
    Tensor image;              // 3×S×S in [0,1]
    BinaryMask instance_mask;  // exact shape support
    std::array<float, 3> shape_color{};
    std::array<float, 3> bg_color{};  // background base color (pre-texture)
    ShapeKind kind = ShapeKind::disk;
    std::string prompt;
    std::uint64_t seed = 0;
};

// Deterministic scene from seed. Shape covers 10–40% of the frame and stays
// 4 px clear of the border.
SyntheticScene gen_scene(std::uint64_t seed, int size = 128);

// Union of 1–4 random rectangles / ellipses / thick strokes covering
// 10–60% of the frame.
BinaryMask sample_random_mask(std::uint64_t seed, int height, int width);

// dilate(instance_mask) by dilate_px; never truncates the shape.
BinaryMask sample_instance_mask(const SyntheticScene& scene, int dilate_px = 2);

// |FG \ dilate(instance_mask, band_px)| / max(|FG|, 1) with FG from
// nearest-color classification against (shape_color, bg_color).
double overcompletion_score(const Tensor& generated, const SyntheticScene& scene, int band_px = 2);

// Minimum palette separation used by gen_scene, exposed for tests.
float min_color_separation();

}  // namespace mg
