#pragma once

#include "maskguide/mask_ops.hpp"
#include "maskguide/models.hpp"
#include "maskguide/schedule.hpp"

namespace mg {

// Sobel gradient magnitude of the luma channel, normalized to [0,1] and
// soft-thresholded: values below the threshold are zeroed ("pure black as
// empty space" carries no control).
Tensor make_edge_condition(const Tensor& img, float threshold = 0.2f);

// residual_i ← residual_i ⊙ pyramid.levels[index_map[i]], the mask broadcast
// across channels. Inputs are not mutated.
std::vector<Tensor> apply_mask_guidance(const std::vector<Tensor>& residuals, const MaskPyramid& pyr);

// control_forward → apply_mask_guidance → denoiser_forward → sample_step.
// pyr == nullptr runs the unguided control step.
Tensor guided_denoise_step(const Tensor& x_t, int t, int t_prev, const Tensor& text, const Tensor& cond,
                           const MaskPyramid* pyr, const ParamStore& ps, const NoiseSchedule& sched,
                           SamplerMode mode, Rng& rng, float control_scale = 1.f);

}  // namespace mg
