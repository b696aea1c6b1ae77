#include "maskguide/inpaint.hpp"

#include <algorithm>
#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

Tensor make_masked_image_latent(const ParamStore& ps, const Tensor& img, const BinaryMask& hole) {
    check_arg(img.shape.size() == 3 && img.dim(0) == 3, "expected 3×H×W image");
    check_arg(hole.height == img.dim(1) && hole.width == img.dim(2),
              "hole mask must be at image resolution");
    Tensor masked = img;
    for (int y = 0; y < hole.height; ++y)
        for (int x = 0; x < hole.width; ++x)
            if (hole.at(y, x))
                for (int c = 0; c < 3; ++c) masked.at(c, y, x) = 0.5f;  // mid-gray = 0 after norm
    return encode_image(ps, masked);
}

Tensor build_branch_input(const Tensor& x_t, const Tensor& masked_latent, const BinaryMask& hole,
                          int latent_side) {
    check_arg(x_t.shape.size() == 3 && x_t.dim(0) == kLatentChannels && x_t.dim(1) == latent_side &&
                  x_t.dim(2) == latent_side,
              "x_t must be 4×L×L");
    check_arg(masked_latent.same_shape(x_t), "masked latent must match x_t shape");
    SoftMask m = downsample_cubic(hole, latent_side, latent_side);
    Tensor out({9, latent_side, latent_side});
    std::copy(x_t.data.begin(), x_t.data.end(), out.data.begin());
    std::copy(masked_latent.data.begin(), masked_latent.data.end(), out.data.begin() + x_t.numel());
    std::copy(m.values.begin(), m.values.end(), out.data.begin() + 2 * x_t.numel());
    return out;
}

SoftMask feather_mask(const BinaryMask& hole, int feather_px) {
    check_arg(feather_px >= 0, "feather radius must be >= 0");
    SoftMask m = SoftMask::from_binary(hole);
    if (feather_px == 0) return m;
    int win = 2 * feather_px + 1;
    // separable box blur, clamp-to-edge
    SoftMask tmp(m.height, m.width);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            float acc = 0.f;
            for (int k = -feather_px; k <= feather_px; ++k)
                acc += m.at(y, std::clamp(x + k, 0, m.width - 1));
            tmp.at(y, x) = acc / static_cast<float>(win);
        }
    SoftMask out(m.height, m.width);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            float acc = 0.f;
            for (int k = -feather_px; k <= feather_px; ++k)
                acc += tmp.at(std::clamp(y + k, 0, m.height - 1), x);
            out.at(y, x) = acc / static_cast<float>(win);
        }
    return out;
}

Tensor paste_back(const Tensor& generated, const Tensor& original, const BinaryMask& hole,
                  int feather_px) {
    check_arg(generated.same_shape(original), "paste_back size mismatch");
    check_arg(hole.height == generated.dim(1) && hole.width == generated.dim(2),
              "hole mask must match image size");
    SoftMask m = feather_mask(hole, feather_px);
    Tensor out(generated.shape);
    for (int c = 0; c < generated.dim(0); ++c)
        for (int y = 0; y < hole.height; ++y)
            for (int x = 0; x < hole.width; ++x) {
                float w = m.at(y, x);
                out.at(c, y, x) = w * generated.at(c, y, x) + (1.f - w) * original.at(c, y, x);
            }
    return out;
}

Tensor inpaint_sample(const ParamStore& ps, const Tensor& img, const BinaryMask& hole,
                      const std::string& prompt, const InpaintConfig& cfg) {
    check_arg(img.shape.size() == 3 && img.dim(0) == 3, "expected 3×H×W image");
    check_arg(cfg.sched.T >= 1, "inpaint_sample needs a noise schedule");
    int image_side = img.dim(1);
    check_arg(img.dim(2) == image_side, "expected a square image");
    int latent_side = image_side / kAutoencoderFactor;
    check_arg(hole.height == image_side && hole.width == image_side,
              "hole mask must be at image resolution");

    Tensor text = embed_prompt(prompt);
    Tensor mlat = make_masked_image_latent(ps, img, hole);

    Tensor cond;
    MaskPyramid pyr;
    if (cfg.use_control) {
        cond = cfg.control_cond ? *cfg.control_cond : make_edge_condition(img);
        if (cfg.guidance_product_mask) {
            BinaryMask product = refine_mask(hole.complement(), cfg.refine);
            pyr = build_mask_pyramid(product, latent_side);
        }
    }

    Rng rng(cfg.seed);
    Tensor x = rng.normal_tensor({kLatentChannels, latent_side, latent_side});
    std::vector<int> ts = sampling_timesteps(cfg.sched.T, cfg.steps);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        int t = ts[i];
        int t_prev = (i + 1 < ts.size()) ? ts[i + 1] : -1;

        std::vector<Tensor> branch_res;
        if (cfg.use_branch) {
            Tensor bi = build_branch_input(x, mlat, hole, latent_side);
            branch_res = branch_forward(ps, bi, t);
            if (cfg.branch_scale != 1.f)
                for (auto& r : branch_res)
                    for (auto& v : r.data) v *= cfg.branch_scale;
        }
        std::vector<Tensor> ctrl_res;
        if (cfg.use_control) {
            ctrl_res = control_forward(ps, cond, x, t, text);
            if (cfg.guidance_product_mask) ctrl_res = apply_mask_guidance(ctrl_res, pyr);
            if (cfg.control_scale != 1.f)
                for (auto& r : ctrl_res)
                    for (auto& v : r.data) v *= cfg.control_scale;
        }
        DenoiserOutput out = denoiser_forward(ps, x, t, text, cfg.use_control ? &ctrl_res : nullptr,
                                              cfg.use_branch ? &branch_res : nullptr);
        if (!out.eps_pred.all_finite()) throw NumericError("non-finite denoiser output during sampling");
        x = sample_step(x, t, t_prev, out.eps_pred, cfg.sched, cfg.mode, rng);
    }

    Tensor decoded = decode_latent(ps, x);
    if (cfg.do_paste_back) return paste_back(decoded, img, hole, cfg.feather_px);
    return decoded;
}

}  // namespace mg
