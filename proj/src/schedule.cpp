#include "maskguide/schedule.hpp"

#include <cmath>

#include "maskguide/errors.hpp"

namespace mg {

NoiseSchedule make_schedule(int T, float beta_start, float beta_end) {
    check_arg(T >= 1, "schedule needs T >= 1");
    check_arg(beta_start > 0.f && beta_start <= beta_end && beta_end < 1.f,
              "betas must satisfy 0 < beta_start <= beta_end < 1");
    NoiseSchedule s;
    s.T = T;
    s.betas.resize(static_cast<std::size_t>(T));
    s.alphas.resize(static_cast<std::size_t>(T));
    s.alpha_bars.resize(static_cast<std::size_t>(T));
    float prod = 1.f;
    for (int t = 0; t < T; ++t) {
        float b = (T == 1) ? beta_start
                           : beta_start + (beta_end - beta_start) * static_cast<float>(t) /
                                              static_cast<float>(T - 1);
        s.betas[static_cast<std::size_t>(t)] = b;
        s.alphas[static_cast<std::size_t>(t)] = 1.f - b;
        prod *= 1.f - b;
        s.alpha_bars[static_cast<std::size_t>(t)] = prod;
    }
    return s;
}

Tensor add_noise(const Tensor& x0, const Tensor& eps, int t, const NoiseSchedule& sched) {
    check_arg(x0.same_shape(eps), "add_noise shape mismatch");
    check_arg(t >= 0 && t < sched.T, "add_noise: t out of range");
    float ab = sched.alpha_bars[static_cast<std::size_t>(t)];
    float a = std::sqrt(ab);
    float b = std::sqrt(1.f - ab);
    Tensor out(x0.shape);
    for (std::int64_t i = 0; i < x0.numel(); ++i) out[i] = a * x0[i] + b * eps[i];
    return out;
}

Tensor sample_step(const Tensor& x_t, int t, int t_prev, const Tensor& eps_pred,
                   const NoiseSchedule& sched, SamplerMode mode, Rng& rng) {
    check_arg(x_t.same_shape(eps_pred), "sample_step shape mismatch");
    check_arg(t >= 0 && t < sched.T, "sample_step: t out of range");
    check_arg(t_prev < t, "sample_step: t_prev must be < t");
    float ab_t = sched.alpha_bars[static_cast<std::size_t>(t)];
    float ab_prev = (t_prev >= 0) ? sched.alpha_bars[static_cast<std::size_t>(t_prev)] : 1.f;

    float sa = std::sqrt(ab_t);
    float sb = std::sqrt(1.f - ab_t);
    float sigma = 0.f;
    if (mode == SamplerMode::ddpm && t_prev >= 0) {
        sigma = std::sqrt((1.f - ab_prev) / (1.f - ab_t) * (1.f - ab_t / ab_prev));
    }
    float dir = std::sqrt(std::max(0.f, 1.f - ab_prev - sigma * sigma));
    float sap = std::sqrt(ab_prev);

    Tensor out(x_t.shape);
    for (std::int64_t i = 0; i < x_t.numel(); ++i) {
        float x0 = (x_t[i] - sb * eps_pred[i]) / sa;
        float v = sap * x0 + dir * eps_pred[i];
        if (sigma > 0.f) v += sigma * rng.normal();
        out[i] = v;
    }
    return out;
}

std::vector<int> sampling_timesteps(int T, int steps) {
    check_arg(steps >= 1 && steps <= T, "sampling steps must be in [1, T]");
    std::vector<int> ts;
    ts.reserve(static_cast<std::size_t>(steps));
    if (steps == 1) {
        ts.push_back(T - 1);
        return ts;
    }
    for (int i = 0; i < steps; ++i) {
        double u = static_cast<double>(steps - 1 - i) / static_cast<double>(steps - 1);
        int t = static_cast<int>(std::lround(u * (T - 1)));
        if (!ts.empty() && t >= ts.back()) t = ts.back() - 1;
        check_arg(t >= 0, "degenerate timestep subsequence");
        ts.push_back(t);
    }
    return ts;
}

namespace {
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
}  // namespace

Tensor embed_prompt(const std::string& text) {
    Tensor v({kTextEmbedDim});
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::uint64_t h = fnv1a(tok);
        int bucket = static_cast<int>(h % kTextEmbedDim);
        // second hash picks a sign so buckets do not only accumulate
        float sign = ((h >> 32) & 1) ? 1.f : -1.f;
        v[bucket] += sign;
        tok.clear();
    };
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r')
            flush();
        else
            tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    flush();
    return v;
}

Tensor time_embedding(int t) {
    Tensor v({kTimeEmbedDim});
    for (int i = 0; i < kTimeEmbedDim / 2; ++i) {
        float freq = std::pow(10000.f, -2.f * static_cast<float>(i) / static_cast<float>(kTimeEmbedDim));
        v[2 * i] = std::sin(static_cast<float>(t) * freq);
        v[2 * i + 1] = std::cos(static_cast<float>(t) * freq);
    }
    return v;
}

}  // namespace mg
