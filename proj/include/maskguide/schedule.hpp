#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskguide/rng.hpp"
#include "maskguide/tensor.hpp"

namespace mg {

struct NoiseSchedule {
    int T = 0;
    std::vector<float> betas;
    std::vector<float> alphas;
    std::vector<float> alpha_bars;
};

// Linear beta schedule; alpha_bars is the cumulative product of (1 - beta).
NoiseSchedule make_schedule(int T, float beta_start, float beta_end);

// sqrt(ab_t)·x0 + sqrt(1−ab_t)·eps
Tensor add_noise(const Tensor& x0, const Tensor& eps, int t, const NoiseSchedule& sched);

enum class SamplerMode { ddpm, ddim };

// One reverse step from timestep t to t_prev (t_prev = -1 means the final
// step to the clean sample). DDIM (eta=0) is deterministic; DDPM draws the
// posterior noise from rng.
Tensor sample_step(const Tensor& x_t, int t, int t_prev, const Tensor& eps_pred,
                   const NoiseSchedule& sched, SamplerMode mode, Rng& rng);

// Decreasing timestep subsequence for a sampling run of `steps` steps,
// ending at 0.
std::vector<int> sampling_timesteps(int T, int steps);

constexpr int kTextEmbedDim = 64;
constexpr int kTimeEmbedDim = 32;

// Deterministic hash-bucketed bag-of-tokens embedding. Token order does not
// matter; the empty string maps to the zero vector.
Tensor embed_prompt(const std::string& text);

// Sinusoidal timestep features fed to the per-block FiLM projections.
Tensor time_embedding(int t);

}  // namespace mg
