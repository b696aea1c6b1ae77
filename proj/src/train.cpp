#include "maskguide/train.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "maskguide/errors.hpp"
#include "maskguide/guidance.hpp"

namespace mg {

std::string branch_prefix(TrainBranch b) {
    switch (b) {
        case TrainBranch::autoencoder: return "ae.";
        case TrainBranch::base: return "base.";
        case TrainBranch::control: return "ctrl.";
        case TrainBranch::inpaint: return "brush.";
    }
    return "";
}

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = a * 0x9e3779b97f4a7c15ull + b;
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ull;
    h ^= h >> 27;
    return h;
}

void require_prefix(const ParamStore& ps, const std::string& prefix, const std::string& why) {
    if (!ps.has_prefix(prefix))
        throw CheckpointError("missing prerequisite parameters '" + prefix + "' (" + why + ")");
}

}  // namespace

TrainResult train(ParamStore& ps, const TrainConfig& cfg) {
    check_arg(cfg.steps > 0 && cfg.batch > 0 && cfg.lr > 0.f, "steps, batch and lr must be positive");
    std::string prefix = branch_prefix(cfg.branch);
    require_prefix(ps, prefix, "initialize the branch before training");
    if (cfg.branch != TrainBranch::autoencoder) require_prefix(ps, "ae.", "autoencoder trains first");
    if (cfg.branch == TrainBranch::control || cfg.branch == TrainBranch::inpaint)
        require_prefix(ps, "base.", "base denoiser trains before the branches");

    NoiseSchedule sched = make_schedule(cfg.schedule_T, cfg.beta_start, cfg.beta_end);
    std::vector<std::string> trained = ps.names_with_prefix(prefix);
    GradMap grads;
    GradMap velocity;

    TrainResult result;
    result.loss_log.reserve(static_cast<std::size_t>(cfg.steps));

    for (int step = 0; step < cfg.steps; ++step) {
        for (auto& [k, g] : grads) g.fill(0.f);
        Rng rng(mix(cfg.seed, static_cast<std::uint64_t>(step)));
        double loss_acc = 0.0;

        for (int bi = 0; bi < cfg.batch; ++bi) {
            std::uint64_t scene_seed =
                cfg.corpus_seed + static_cast<std::uint64_t>(step) * cfg.batch + bi;
            SyntheticScene scene = gen_scene(scene_seed, cfg.geometry.image);
            Tape tp;
            int loss_id;
            if (cfg.branch == TrainBranch::autoencoder) {
                int z = ae_encode_t(tp, ps, &grads, scene.image);
                int d = ae_decode_t(tp, ps, &grads, z);
                Tensor target(scene.image.shape);
                for (std::int64_t i = 0; i < target.numel(); ++i) target[i] = 2.f * scene.image[i] - 1.f;
                loss_id = tp.mse(d, std::move(target));
            } else {
                Tensor x0 = encode_image(ps, scene.image);
                Tensor eps = rng.normal_tensor(x0.shape);
                int t = rng.uniform_int(0, sched.T - 1);
                Tensor x_t = add_noise(x0, eps, t, sched);
                Tensor text = embed_prompt(scene.prompt);
                int x = tp.input(x_t);
                if (cfg.branch == TrainBranch::base) {
                    auto out = base_forward_t(tp, ps, &grads, x, t, text, nullptr, nullptr);
                    loss_id = tp.mse(out.eps, std::move(eps));
                } else if (cfg.branch == TrainBranch::control) {
                    Tensor cond = make_edge_condition(scene.image);
                    auto res = control_forward_t(tp, ps, &grads, cond, x, t, text);
                    auto out = base_forward_t(tp, ps, nullptr, x, t, text, &res, nullptr);
                    loss_id = tp.mse(out.eps, std::move(eps));
                } else {
                    BinaryMask hole = cfg.mask_sampler == MaskSamplerKind::instance
                                          ? sample_instance_mask(scene, 2)
                                          : sample_random_mask(scene_seed, cfg.geometry.image,
                                                               cfg.geometry.image);
                    Tensor mlat = make_masked_image_latent(ps, scene.image, hole);
                    Tensor binput = build_branch_input(x_t, mlat, hole, cfg.geometry.latent);
                    auto res = branch_forward_t(tp, ps, &grads, binput, t);
                    auto out = base_forward_t(tp, ps, nullptr, x, t, text, nullptr, &res);
                    loss_id = tp.mse(out.eps, std::move(eps));
                }
            }
            float loss = tp.val(loss_id)[0];
            if (!std::isfinite(loss))
                throw NumericError("NaN/inf loss at step " + std::to_string(step) + " (branch " +
                                   prefix + ")");
            loss_acc += loss;
            tp.backward(loss_id);
        }

        float inv_batch = 1.f / static_cast<float>(cfg.batch);
        float scale = inv_batch;
        if (cfg.grad_clip > 0.f) {
            double sq = 0.0;
            for (const auto& name : trained) {
                auto git = grads.find(name);
                if (git == grads.end()) continue;
                for (std::int64_t i = 0; i < git->second.numel(); ++i) {
                    double g = static_cast<double>(git->second[i]) * inv_batch;
                    sq += g * g;
                }
            }
            double norm = std::sqrt(sq);
            if (!std::isfinite(norm))
                throw NumericError("NaN/inf gradient at step " + std::to_string(step) + " (branch " +
                                   prefix + ")");
            if (norm > cfg.grad_clip) scale = inv_batch * cfg.grad_clip / static_cast<float>(norm);
        }
        for (const auto& name : trained) {
            auto git = grads.find(name);
            if (git == grads.end()) continue;  // zero convs on untouched paths, etc.
            Tensor& g = git->second;
            Tensor& v = velocity[name];
            if (v.shape != g.shape) v = Tensor(g.shape);
            Tensor& p = ps.t.at(name);
            for (std::int64_t i = 0; i < g.numel(); ++i) {
                v[i] = cfg.momentum * v[i] - cfg.lr * scale * g[i];
                p[i] += v[i];
            }
        }

        result.loss_log.push_back(static_cast<float>(loss_acc / cfg.batch));
        if (cfg.verbose && (step % cfg.log_every == 0 || step == cfg.steps - 1))
            std::fprintf(stderr, "[train %s] step %d loss %.6f\n", prefix.c_str(), step,
                         result.loss_log.back());
    }
    return result;
}

MetricReport eval_overcompletion(const ParamStore& ps, const EvalConfig& cfg) {
    check_arg(cfg.num_scenes > 0, "need at least one evaluation scene");
    require_prefix(ps, "brush.", "evaluation needs a trained inpaint branch");

    Geometry geo = test_geometry();

    InpaintConfig icfg;
    icfg.steps = cfg.steps;
    icfg.mode = SamplerMode::ddim;
    icfg.sched = make_schedule(cfg.schedule_T, cfg.beta_start, cfg.beta_end);
    icfg.use_branch = true;
    icfg.use_control = false;
    icfg.do_paste_back = false;  // paste-back would hide overcompletion

    MetricReport rep;
    rep.count = cfg.num_scenes;
    rep.scores.reserve(static_cast<std::size_t>(cfg.num_scenes));
    double acc = 0.0;
    for (int i = 0; i < cfg.num_scenes; ++i) {
        SyntheticScene scene = gen_scene(cfg.scene_seed_base + static_cast<std::uint64_t>(i), geo.image);
        BinaryMask hole = sample_instance_mask(scene, 2);
        icfg.seed = cfg.sample_seed + static_cast<std::uint64_t>(i);
        Tensor gen = inpaint_sample(ps, scene.image, hole, scene.prompt, icfg);
        double s = overcompletion_score(gen, scene, cfg.band_px);
        rep.scores.push_back(s);
        acc += s;
        if (cfg.verbose && (i + 1) % 10 == 0)
            std::fprintf(stderr, "[eval] %d/%d scenes, running mean %.4f\n", i + 1, cfg.num_scenes,
                         acc / (i + 1));
    }
    rep.mean = acc / cfg.num_scenes;
    rep.config_fingerprint = "scenes=" + std::to_string(cfg.num_scenes) +
                             ";seed_base=" + std::to_string(cfg.scene_seed_base) +
                             ";steps=" + std::to_string(cfg.steps) +
                             ";sample_seed=" + std::to_string(cfg.sample_seed) +
                             ";band_px=" + std::to_string(cfg.band_px) +
                             ";T=" + std::to_string(cfg.schedule_T);
    return rep;
}

ComparisonReport eval_compare(const ParamStore& ps_a, const ParamStore& ps_b, const EvalConfig& cfg) {
    ComparisonReport out;
    out.first = eval_overcompletion(ps_a, cfg);
    out.second = eval_overcompletion(ps_b, cfg);
    out.mean_difference = out.first.mean - out.second.mean;
    return out;
}

double paired_sign_test_pvalue(const std::vector<double>& a, const std::vector<double>& b) {
    check_arg(a.size() == b.size(), "paired test needs equal-length score lists");
    int n = 0, k = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == b[i]) continue;
        ++n;
        if (a[i] < b[i]) ++k;
    }
    if (n == 0) return 1.0;
    int m = std::min(k, n - k);
    // two-sided: 2 * P(X <= m), X ~ Bin(n, 1/2), via log binomials
    double tail = 0.0;
    for (int i = 0; i <= m; ++i) {
        double logc = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
        tail += std::exp(logc - n * std::log(2.0));
    }
    return std::min(1.0, 2.0 * tail);
}

std::string metric_report_json(const MetricReport& r) {
    nlohmann::json j;
    j["scores"] = r.scores;
    j["mean"] = r.mean;
    j["count"] = r.count;
    j["config_fingerprint"] = r.config_fingerprint;
    return j.dump(2);
}

}  // namespace mg
