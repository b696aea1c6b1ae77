#include "maskguide/baselines.hpp"

#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

Tensor blended_step(const Tensor& x_t_gen, const Tensor& x0, const SoftMask& mask, int t,
                    const NoiseSchedule& sched, Rng& rng) {
    check_arg(x_t_gen.same_shape(x0), "blended_step shape mismatch");
    check_arg(x_t_gen.shape.size() == 3 && x_t_gen.dim(1) == mask.height && x_t_gen.dim(2) == mask.width,
              "blended_step mask must be at latent resolution");
    check_arg(t >= -1 && t < sched.T, "blended_step: t out of range");

    Tensor ref;
    if (t >= 0) {
        Tensor eps = rng.normal_tensor(x0.shape);
        ref = add_noise(x0, eps, t, sched);
    } else {
        ref = x0;
    }
    Tensor out(x_t_gen.shape);
    for (int c = 0; c < x_t_gen.dim(0); ++c)
        for (int y = 0; y < mask.height; ++y)
            for (int x = 0; x < mask.width; ++x) {
                float m = mask.at(y, x);
                out.at(c, y, x) = m * x_t_gen.at(c, y, x) + (1.f - m) * ref.at(c, y, x);
            }
    return out;
}

Tensor blended_sample(const ParamStore& ps, const Tensor& img, const std::string& prompt,
                      const BlendConfig& cfg) {
    check_arg(cfg.sched.T >= 1, "blended_sample needs a noise schedule");
    check_arg(cfg.denoise_strength >= 0.f && cfg.denoise_strength <= 1.f,
              "denoise_strength must be in [0,1]");
    int latent_side = img.dim(1) / kAutoencoderFactor;
    check_arg(cfg.mask.height == latent_side && cfg.mask.width == latent_side,
              "blend mask must be at latent resolution");
    if (cfg.mode == BlendMode::hard)
        for (float v : cfg.mask.values)
            check_arg(v == 0.f || v == 1.f, "hard blend mode requires a binary mask");

    Tensor x0 = encode_image(ps, img);
    int t_start = static_cast<int>(std::lround(cfg.denoise_strength * cfg.sched.T)) - 1;
    if (t_start < 0) return decode_latent(ps, x0);

    std::vector<int> all = sampling_timesteps(cfg.sched.T, cfg.steps);
    std::vector<int> ts;
    for (int t : all)
        if (t <= t_start) ts.push_back(t);
    if (ts.empty()) ts.push_back(t_start);

    Rng rng(cfg.seed);
    Tensor text = embed_prompt(prompt);
    Tensor eps0 = rng.normal_tensor(x0.shape);
    Tensor x = add_noise(x0, eps0, ts.front(), cfg.sched);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        int t = ts[i];
        int t_prev = (i + 1 < ts.size()) ? ts[i + 1] : -1;
        DenoiserOutput out = denoiser_forward(ps, x, t, text);
        if (!out.eps_pred.all_finite()) throw NumericError("non-finite denoiser output during sampling");
        x = sample_step(x, t, t_prev, out.eps_pred, cfg.sched, cfg.sampler, rng);
        x = blended_step(x, x0, cfg.mask, t_prev, cfg.sched, rng);
    }
    return decode_latent(ps, x);
}

}  // namespace mg
