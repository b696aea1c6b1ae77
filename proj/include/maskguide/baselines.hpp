#pragma once

#include <cstdint>
#include <string>

#include "maskguide/mask_ops.hpp"
#include "maskguide/models.hpp"
#include "maskguide/schedule.hpp"

namespace mg {

enum class BlendMode { hard, soft };

struct BlendConfig {
    SoftMask mask;  // latent resolution; 1 = generate, 0 = reconstruct
    float denoise_strength = 1.f;
    BlendMode mode = BlendMode::hard;
    int steps = 20;
    SamplerMode sampler = SamplerMode::ddim;
    std::uint64_t seed = 0;
    NoiseSchedule sched;
};

// mask ⊙ x_t_gen + (1−mask) ⊙ add_noise(x0, eps, t) with eps drawn fresh
// from rng. t = -1 blends against x0 itself (the final, clean step).
Tensor blended_step(const Tensor& x_t_gen, const Tensor& x0, const SoftMask& mask, int t,
                    const NoiseSchedule& sched, Rng& rng);

// Reverse loop with blended_step applied after every sample_step.
Tensor blended_sample(const ParamStore& ps, const Tensor& img, const std::string& prompt,
                      const BlendConfig& cfg);

}  // namespace mg
