#pragma once

#include <cstdint>
#include <string>

#include "maskguide/guidance.hpp"
#include "maskguide/mask_ops.hpp"
#include "maskguide/models.hpp"
#include "maskguide/schedule.hpp"

namespace mg {

// encode(img with hole pixels set to mid-gray). Hole pixels carry no content
// into the latent.
Tensor make_masked_image_latent(const ParamStore& ps, const Tensor& img, const BinaryMask& hole);

// [x_t ‖ masked latent ‖ cubic-downsampled hole] — the 9-channel (4+4+1)
// branch input.
Tensor build_branch_input(const Tensor& x_t, const Tensor& masked_latent, const BinaryMask& hole,
                          int latent_side);

// out = m_f⊙generated + (1−m_f)⊙original with m_f the hole feathered by a
// box blur of radius feather_px (clamp-to-edge).
Tensor paste_back(const Tensor& generated, const Tensor& original, const BinaryMask& hole,
                  int feather_px);

SoftMask feather_mask(const BinaryMask& hole, int feather_px);

struct InpaintConfig {
    int steps = 20;
    SamplerMode mode = SamplerMode::ddim;
    std::uint64_t seed = 0;
    NoiseSchedule sched;

    bool use_branch = true;
    float branch_scale = 1.f;

    bool use_control = false;
    const Tensor* control_cond = nullptr;  // 1×H×W; null derives an edge map from img
    bool guidance_product_mask = true;     // mask-guide control residuals with the product pyramid
    float control_scale = 1.f;
    RefineParams refine;                   // refinement of the product mask before the pyramid

    bool do_paste_back = true;
    int feather_px = 2;
};

// Full reverse loop of the dual-branch inpainting model.
Tensor inpaint_sample(const ParamStore& ps, const Tensor& img, const BinaryMask& hole,
                      const std::string& prompt, const InpaintConfig& cfg);

}  // namespace mg
