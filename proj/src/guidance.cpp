#include "maskguide/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

Tensor make_edge_condition(const Tensor& img, float threshold) {
    check_arg(img.shape.size() == 3 && img.dim(0) == 3, "expected 3×H×W image");
    check_arg(threshold >= 0.f && threshold < 1.f, "edge threshold must be in [0,1)");
    int h = img.dim(1), w = img.dim(2);
    std::vector<float> luma(static_cast<std::size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            luma[static_cast<std::size_t>(y) * w + x] =
                0.299f * img.at(0, y, x) + 0.587f * img.at(1, y, x) + 0.114f * img.at(2, y, x);

    auto lu = [&](int y, int x) {
        y = std::clamp(y, 0, h - 1);
        x = std::clamp(x, 0, w - 1);
        return luma[static_cast<std::size_t>(y) * w + x];
    };
    Tensor out({1, h, w});
    float maxg = 0.f;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float gx = (lu(y - 1, x + 1) + 2.f * lu(y, x + 1) + lu(y + 1, x + 1)) -
                       (lu(y - 1, x - 1) + 2.f * lu(y, x - 1) + lu(y + 1, x - 1));
            float gy = (lu(y + 1, x - 1) + 2.f * lu(y + 1, x) + lu(y + 1, x + 1)) -
                       (lu(y - 1, x - 1) + 2.f * lu(y - 1, x) + lu(y - 1, x + 1));
            float g = std::sqrt(gx * gx + gy * gy);
            out.at(0, y, x) = g;
            maxg = std::max(maxg, g);
        }
    }
    if (maxg > 0.f)
        for (auto& v : out.data) v /= maxg;
    for (auto& v : out.data)
        if (v < threshold) v = 0.f;
    return out;
}

std::vector<Tensor> apply_mask_guidance(const std::vector<Tensor>& residuals, const MaskPyramid& pyr) {
    check_arg(residuals.size() == kNumControlTaps, "expected 13 control residuals");
    std::vector<Tensor> out;
    out.reserve(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const Tensor& r = residuals[i];
        const SoftMask& m = pyr.levels[static_cast<std::size_t>(pyr.index_map[i])];
        if (r.shape.size() != 3 || r.dim(1) != m.height || r.dim(2) != m.width)
            throw std::invalid_argument(
                "mask guidance size mismatch at injection point " + std::to_string(i) + ": residual " +
                shape_str(r.shape) + " vs mask level " + std::to_string(pyr.index_map[i]) + " (" +
                std::to_string(m.height) + "x" + std::to_string(m.width) + ")");
        Tensor g(r.shape);
        int c = r.dim(0), h = r.dim(1), w = r.dim(2);
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) g.at(ch, y, x) = r.at(ch, y, x) * m.at(y, x);
        out.push_back(std::move(g));
    }
    return out;
}

Tensor guided_denoise_step(const Tensor& x_t, int t, int t_prev, const Tensor& text, const Tensor& cond,
                           const MaskPyramid* pyr, const ParamStore& ps, const NoiseSchedule& sched,
                           SamplerMode mode, Rng& rng, float control_scale) {
    std::vector<Tensor> res = control_forward(ps, cond, x_t, t, text);
    if (pyr) res = apply_mask_guidance(res, *pyr);
    if (control_scale != 1.f)
        for (auto& r : res)
            for (auto& v : r.data) v *= control_scale;
    DenoiserOutput out = denoiser_forward(ps, x_t, t, text, &res, nullptr);
    return sample_step(x_t, t, t_prev, out.eps_pred, sched, mode, rng);
}

}  // namespace mg
