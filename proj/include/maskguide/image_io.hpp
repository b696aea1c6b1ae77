#pragma once

#include <string>

#include "maskguide/mask_ops.hpp"
#include "maskguide/tensor.hpp"

namespace mg {

// 8-bit RGB PNG ⇄ 3×H×W float in [0,1].
Tensor load_image_png(const std::string& path);
void save_image_png(const std::string& path, const Tensor& img);

// 8-bit grayscale PNG; pixel >= 128 reads as 1.
BinaryMask load_mask_png(const std::string& path);
void save_mask_png(const std::string& path, const BinaryMask& mask);

// Grayscale with round-to-nearest quantization (documented lossy).
SoftMask load_soft_mask_png(const std::string& path);
void save_soft_mask_png(const std::string& path, const SoftMask& mask);

// Single-channel condition map in [0,1].
Tensor load_condition_png(const std::string& path);
void save_condition_png(const std::string& path, const Tensor& cond);

}  // namespace mg
