// maskguide: mask-guided latent-diffusion inpainting toolkit CLI.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "maskguide/baselines.hpp"
#include "maskguide/checkpoint.hpp"
#include "maskguide/errors.hpp"
#include "maskguide/guidance.hpp"
#include "maskguide/image_io.hpp"
#include "maskguide/inpaint.hpp"
#include "maskguide/train.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace mg;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfig = 2;
constexpr int kExitCheckpoint = 3;
constexpr int kExitGeometry = 4;
constexpr int kExitNumeric = 5;

std::string default_checkpoint_dir() {
    const char* env = std::getenv("MASKGUIDE_CHECKPOINT_DIR");
    return env ? env : "";
}

void require_file(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError(what + " is required");
    if (!fs::exists(path)) throw ConfigError(what + " not found: " + path);
}

LoadedCheckpoint load_ckpt(const std::string& dir) {
    if (dir.empty())
        throw ConfigError("no checkpoint directory given (flag or MASKGUIDE_CHECKPOINT_DIR)");
    return load_checkpoint(dir);
}

void require_prefixes(const ParamStore& ps, const std::vector<std::string>& prefixes) {
    for (const auto& p : prefixes)
        if (!ps.has_prefix(p)) throw CheckpointError("checkpoint lacks '" + p + "' parameters");
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void write_run_record(const std::string& out_path, const std::string& subcommand, json config,
                      json input_hashes, const Timer& timer) {
    json rec;
    rec["tool_version"] = kVersion;
    rec["subcommand"] = subcommand;
    rec["config"] = std::move(config);
    rec["inputs"] = std::move(input_hashes);
    rec["output"] = {{"path", out_path}, {"sha256", sha256_file(out_path)}};
    rec["wall_time_s"] = timer.seconds();
    std::ofstream f(out_path + ".runrecord.json");
    f << rec.dump(2) << "\n";
    if (!f) throw ConfigError("cannot write run record next to " + out_path);
}

SamplerMode parse_sampler(const std::string& s) {
    if (s == "ddim") return SamplerMode::ddim;
    if (s == "ddpm") return SamplerMode::ddpm;
    throw ConfigError("unknown sampler: " + s);
}

// ---- generate ----

struct GenerateArgs {
    std::string image, mask, prompt, checkpoint = default_checkpoint_dir(), out;
    std::string method = "dualbranch", sampler = "ddim";
    std::string control_mode = "edge", control_image, guidance_mask = "product";
    std::string config_file;
    int steps = 20, feather = 2, schedule_T = 50;
    int se_close = 3, se_open = 3, se_dilate = 5;
    std::uint64_t seed = 0;
    float denoise = 1.f, control_scale = 1.f, branch_scale = 1.f;
    bool use_control = false, no_paste_back = false, upscale = false;
};

void apply_config_file(GenerateArgs& a, const CLI::App* cmd) {
    if (a.config_file.empty()) return;
    require_file(a.config_file, "--config");
    json j;
    try {
        std::ifstream f(a.config_file);
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    // flags given on the command line win over file values
    auto unset = [&](const std::string& flag) { return cmd->get_option(flag)->count() == 0; };
    auto s = [&](const char* key, const char* flag, std::string& dst) {
        if (j.contains(key) && unset(flag)) dst = j.at(key).get<std::string>();
    };
    auto i = [&](const char* key, const char* flag, int& dst) {
        if (j.contains(key) && unset(flag)) dst = j.at(key).get<int>();
    };
    auto f_ = [&](const char* key, const char* flag, float& dst) {
        if (j.contains(key) && unset(flag)) dst = j.at(key).get<float>();
    };
    auto b = [&](const char* key, const char* flag, bool& dst) {
        if (j.contains(key) && unset(flag)) dst = j.at(key).get<bool>();
    };
    try {
        s("image", "--image", a.image);
        s("mask", "--mask", a.mask);
        s("prompt", "--prompt", a.prompt);
        s("checkpoint", "--checkpoint", a.checkpoint);
        s("out", "--out", a.out);
        s("method", "--method", a.method);
        s("sampler", "--sampler", a.sampler);
        s("control_mode", "--control-mode", a.control_mode);
        s("control_image", "--control-image", a.control_image);
        s("guidance_mask", "--guidance-mask", a.guidance_mask);
        i("steps", "--steps", a.steps);
        i("feather", "--feather", a.feather);
        i("schedule_T", "--schedule-T", a.schedule_T);
        i("se_close", "--se-close", a.se_close);
        i("se_open", "--se-open", a.se_open);
        i("se_dilate", "--se-dilate", a.se_dilate);
        if (j.contains("seed") && unset("--seed")) a.seed = j.at("seed").get<std::uint64_t>();
        f_("denoise", "--denoise", a.denoise);
        f_("control_scale", "--control-scale", a.control_scale);
        f_("branch_scale", "--branch-scale", a.branch_scale);
        b("control", "--control", a.use_control);
        b("no_paste_back", "--no-paste-back", a.no_paste_back);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
}

json resolved_generate_config(const GenerateArgs& a) {
    return json{{"image", a.image},
                {"mask", a.mask},
                {"prompt", a.prompt},
                {"checkpoint", a.checkpoint},
                {"out", a.out},
                {"method", a.method},
                {"sampler", a.sampler},
                {"steps", a.steps},
                {"seed", a.seed},
                {"denoise", a.denoise},
                {"control", a.use_control},
                {"control_mode", a.control_mode},
                {"control_image", a.control_image},
                {"guidance_mask", a.guidance_mask},
                {"control_scale", a.control_scale},
                {"branch_scale", a.branch_scale},
                {"no_paste_back", a.no_paste_back},
                {"feather", a.feather},
                {"se_close", a.se_close},
                {"se_open", a.se_open},
                {"se_dilate", a.se_dilate},
                {"schedule_T", a.schedule_T}};
}

int run_generate(GenerateArgs& a, const CLI::App* cmd) {
    Timer timer;
    apply_config_file(a, cmd);

    if (a.upscale) throw ConfigError("--upscale is reserved for a future release and not implemented");
    if (a.out.empty()) throw ConfigError("--out is required");
    require_file(a.image, "--image");
    require_file(a.mask, "--mask");
    if (a.method != "dualbranch" && a.method != "blended" && a.method != "soft")
        throw ConfigError("unknown method: " + a.method);
    if (a.guidance_mask != "product" && a.guidance_mask != "none")
        throw ConfigError("--guidance-mask must be 'product' or 'none'");
    if (a.control_mode != "edge" && a.control_mode != "file")
        throw ConfigError("--control-mode must be 'edge' or 'file'");
    if (a.use_control && a.control_mode == "file") require_file(a.control_image, "--control-image");
    if (a.steps < 1) throw ConfigError("--steps must be >= 1");

    Tensor img = load_image_png(a.image);
    int side = img.dim(1);
    if (img.dim(2) != side) throw GeometryError("input image must be square");
    if (side % kAutoencoderFactor != 0)
        throw GeometryError("image side must be divisible by " + std::to_string(kAutoencoderFactor));

    LoadedCheckpoint ck = load_ckpt(a.checkpoint);
    if (ck.geometry.image != side)
        throw GeometryError("checkpoint geometry " + std::to_string(ck.geometry.image) +
                            " does not match image side " + std::to_string(side));

    SamplerMode sampler = parse_sampler(a.sampler);
    NoiseSchedule sched = make_schedule(a.schedule_T, 1e-4f, 0.02f);

    json inputs;
    inputs["image"] = sha256_file(a.image);
    inputs["mask"] = sha256_file(a.mask);
    inputs["checkpoint_manifest"] = sha256_file((fs::path(a.checkpoint) / "manifest.json").string());

    Tensor result;
    if (a.method == "dualbranch") {
        require_prefixes(ck.params, {"ae.", "base.", "brush."});
        if (a.use_control) require_prefixes(ck.params, {"ctrl."});

        BinaryMask hole = load_mask_png(a.mask);
        if (hole.height != side || hole.width != side)
            throw GeometryError("mask size does not match image size");

        InpaintConfig cfg;
        cfg.steps = a.steps;
        cfg.mode = sampler;
        cfg.seed = a.seed;
        cfg.sched = sched;
        cfg.branch_scale = a.branch_scale;
        cfg.use_control = a.use_control;
        cfg.control_scale = a.control_scale;
        cfg.guidance_product_mask = a.guidance_mask == "product";
        cfg.refine = {StructuringElement::square(a.se_close), StructuringElement::square(a.se_open),
                      StructuringElement::square(a.se_dilate)};
        cfg.do_paste_back = !a.no_paste_back;
        cfg.feather_px = a.feather;

        Tensor cond;
        if (a.use_control && a.control_mode == "file") {
            cond = load_condition_png(a.control_image);
            if (cond.dim(1) != side || cond.dim(2) != side)
                throw GeometryError("control image size does not match input image");
            cfg.control_cond = &cond;
            inputs["control_image"] = sha256_file(a.control_image);
        }
        result = inpaint_sample(ck.params, img, hole, a.prompt, cfg);
    } else {
        require_prefixes(ck.params, {"ae.", "base."});
        int latent = side / kAutoencoderFactor;

        BlendConfig cfg;
        cfg.denoise_strength = a.denoise;
        cfg.steps = a.steps;
        cfg.sampler = sampler;
        cfg.seed = a.seed;
        cfg.sched = sched;

        BinaryMask hole;
        if (a.method == "soft") {
            SoftMask sm = load_soft_mask_png(a.mask);
            if (sm.height != side || sm.width != side)
                throw GeometryError("mask size does not match image size");
            cfg.mask = downsample_cubic(sm, latent, latent);
            cfg.mode = BlendMode::soft;
            hole = BinaryMask(side, side);
            for (int y = 0; y < side; ++y)
                for (int x = 0; x < side; ++x) hole.at(y, x) = sm.at(y, x) >= 0.5f ? 1 : 0;
        } else {
            hole = load_mask_png(a.mask);
            if (hole.height != side || hole.width != side)
                throw GeometryError("mask size does not match image size");
            SoftMask down = downsample_cubic(hole, latent, latent);
            cfg.mask = SoftMask(latent, latent);
            for (std::size_t i = 0; i < down.values.size(); ++i)
                cfg.mask.values[i] = down.values[i] >= 0.5f ? 1.f : 0.f;
            cfg.mode = BlendMode::hard;
        }
        result = blended_sample(ck.params, img, a.prompt, cfg);
        if (!a.no_paste_back) result = paste_back(result, img, hole, a.feather);
    }

    save_image_png(a.out, result);
    write_run_record(a.out, "generate", resolved_generate_config(a), inputs, timer);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

// ---- refine-mask ----

struct RefineArgs {
    std::string in, out;
    int se_close = 3, se_open = 3, se_dilate = 5;
};

int run_refine_mask(const RefineArgs& a) {
    Timer timer;
    require_file(a.in, "--in");
    if (a.out.empty()) throw ConfigError("--out is required");
    BinaryMask m = load_mask_png(a.in);
    RefineParams p{StructuringElement::square(a.se_close), StructuringElement::square(a.se_open),
                   StructuringElement::square(a.se_dilate)};
    save_mask_png(a.out, refine_mask(m, p));
    write_run_record(a.out, "refine-mask",
                     json{{"in", a.in},
                          {"out", a.out},
                          {"se_close", a.se_close},
                          {"se_open", a.se_open},
                          {"se_dilate", a.se_dilate}},
                     json{{"mask", sha256_file(a.in)}}, timer);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

// ---- make-pyramid ----

struct PyramidArgs {
    std::string mask, out_dir;
    bool refine = false;
};

int run_make_pyramid(const PyramidArgs& a) {
    Timer timer;
    require_file(a.mask, "--mask");
    if (a.out_dir.empty()) throw ConfigError("--out is required");
    BinaryMask m = load_mask_png(a.mask);
    if (m.height != m.width) throw GeometryError("pyramid input mask must be square");
    if (m.height % kAutoencoderFactor != 0)
        throw GeometryError("mask side must be divisible by " + std::to_string(kAutoencoderFactor));
    if (a.refine) m = refine_mask(m);

    MaskPyramid pyr = build_mask_pyramid(m, m.height / kAutoencoderFactor);
    fs::create_directories(a.out_dir);
    json meta;
    meta["index_map"] = pyr.index_map;
    for (int l = 0; l < 4; ++l) {
        std::string path = (fs::path(a.out_dir) / ("level" + std::to_string(l) + ".png")).string();
        save_soft_mask_png(path, pyr.levels[static_cast<std::size_t>(l)]);
        meta["levels"].push_back({{"file", "level" + std::to_string(l) + ".png"},
                                  {"size", pyr.levels[static_cast<std::size_t>(l)].height}});
    }
    std::string meta_path = (fs::path(a.out_dir) / "index_map.json").string();
    std::ofstream f(meta_path);
    f << meta.dump(2) << "\n";
    if (!f) throw ConfigError("cannot write " + meta_path);
    write_run_record(meta_path, "make-pyramid",
                     json{{"mask", a.mask}, {"out", a.out_dir}, {"refine", a.refine}},
                     json{{"mask", sha256_file(a.mask)}}, timer);
    std::cout << "wrote " << a.out_dir << "\n";
    return 0;
}

// ---- train ----

struct TrainArgs {
    std::string branch = "inpaint", mask_sampler = "random", geometry = "test";
    std::string init_from, out;
    int steps = 200, batch = 4;
    float lr = 0.02f;
    std::uint64_t seed = 0, corpus_seed = 1;
    bool verbose = false;
};

TrainBranch parse_branch(const std::string& s) {
    if (s == "autoencoder" || s == "ae") return TrainBranch::autoencoder;
    if (s == "base") return TrainBranch::base;
    if (s == "control") return TrainBranch::control;
    if (s == "inpaint" || s == "brush") return TrainBranch::inpaint;
    throw ConfigError("unknown branch: " + s);
}

int run_train(const TrainArgs& a) {
    Timer timer;
    if (a.out.empty()) throw ConfigError("--out is required");
    Geometry geo;
    if (a.geometry == "test")
        geo = test_geometry();
    else if (a.geometry == "paper")
        geo = paper_geometry();
    else
        throw ConfigError("unknown geometry: " + a.geometry);

    ParamStore ps;
    if (!a.init_from.empty()) {
        LoadedCheckpoint ck = load_ckpt(a.init_from);
        if (!(ck.geometry == geo))
            throw GeometryError("checkpoint geometry does not match --geometry " + a.geometry);
        ps = std::move(ck.params);
    } else {
        Rng rng(a.seed);
        init_autoencoder(ps, rng);
        init_base(ps, rng);
        init_control_from_base(ps, rng);
        init_brush_from_base(ps);
    }

    TrainConfig cfg;
    cfg.branch = parse_branch(a.branch);
    cfg.steps = a.steps;
    cfg.batch = a.batch;
    cfg.lr = a.lr;
    cfg.seed = a.seed;
    cfg.corpus_seed = a.corpus_seed;
    cfg.geometry = geo;
    cfg.mask_sampler =
        a.mask_sampler == "instance" ? MaskSamplerKind::instance : MaskSamplerKind::random;
    if (a.mask_sampler != "instance" && a.mask_sampler != "random")
        throw ConfigError("--mask-sampler must be 'instance' or 'random'");
    cfg.verbose = a.verbose;

    TrainResult r = train(ps, cfg);
    save_checkpoint(a.out, ps, geo);

    json log;
    log["tool_version"] = kVersion;
    log["config"] = {{"branch", a.branch},   {"mask_sampler", a.mask_sampler},
                     {"geometry", a.geometry}, {"steps", a.steps},
                     {"batch", a.batch},     {"lr", a.lr},
                     {"seed", a.seed},       {"corpus_seed", a.corpus_seed},
                     {"init_from", a.init_from}};
    log["loss_log"] = r.loss_log;
    log["final_loss"] = r.loss_log.empty() ? 0.f : r.loss_log.back();
    log["wall_time_s"] = timer.seconds();
    std::string log_path = (fs::path(a.out) / "train_log.json").string();
    std::ofstream f(log_path);
    f << log.dump(2) << "\n";
    if (!f) throw ConfigError("cannot write " + log_path);
    std::cout << "trained " << a.branch << " for " << a.steps << " steps, final loss "
              << (r.loss_log.empty() ? 0.f : r.loss_log.back()) << ", saved to " << a.out << "\n";
    return 0;
}

// ---- eval-overcompletion ----

struct EvalArgs {
    std::string ckpt_a, ckpt_b, report;
    int scenes = 100, steps = 10, band = 2;
    std::uint64_t seed_base = 1'000'000, sample_seed = 7;
    bool verbose = false;
};

int run_eval(const EvalArgs& a) {
    Timer timer;
    if (a.report.empty()) throw ConfigError("--report is required");

    EvalConfig cfg;
    cfg.num_scenes = a.scenes;
    cfg.steps = a.steps;
    cfg.band_px = a.band;
    cfg.scene_seed_base = a.seed_base;
    cfg.sample_seed = a.sample_seed;
    cfg.verbose = a.verbose;

    LoadedCheckpoint ca = load_ckpt(a.ckpt_a);
    json out;
    out["tool_version"] = kVersion;
    if (a.ckpt_b.empty()) {
        MetricReport r = eval_overcompletion(ca.params, cfg);
        out["report"] = json::parse(metric_report_json(r));
        std::cout << "mean overcompletion " << r.mean << " over " << r.count << " scenes\n";
    } else {
        LoadedCheckpoint cb = load_ckpt(a.ckpt_b);
        ComparisonReport r = eval_compare(ca.params, cb.params, cfg);
        out["first"] = json::parse(metric_report_json(r.first));
        out["second"] = json::parse(metric_report_json(r.second));
        out["mean_difference"] = r.mean_difference;
        out["p_value"] = paired_sign_test_pvalue(r.first.scores, r.second.scores);
        std::cout << "mean overcompletion: a=" << r.first.mean << " b=" << r.second.mean
                  << " diff=" << r.mean_difference << " p=" << out["p_value"].get<double>() << "\n";
    }
    out["wall_time_s"] = timer.seconds();
    std::ofstream f(a.report);
    f << out.dump(2) << "\n";
    if (!f) throw ConfigError("cannot write " + a.report);
    std::cout << "wrote " << a.report << "\n";
    return 0;
}

// ---- selfcheck ----

std::string tensor_sha(const Tensor& t) {
    return sha256_hex(t.data.data(), t.data.size() * sizeof(float));
}

int run_selfcheck(const std::string& ckpt_dir) {
    LoadedCheckpoint ck = load_ckpt(ckpt_dir);
    require_prefixes(ck.params, {"ae.", "base."});
    const Geometry geo = ck.geometry;
    const int L = geo.latent, S = geo.image;

    NoiseSchedule sched = make_schedule(50, 1e-4f, 0.02f);
    Tensor text = embed_prompt("a red disk product photo");
    Tensor cond = Tensor::full({1, S, S}, 0.4f);
    for (int y = S / 4; y < S / 2; ++y)
        for (int x = S / 4; x < S / 2; ++x) cond.at(0, y, x) = 0.9f;

    // zero-conv branches rebuilt from this checkpoint's base, so the check
    // holds even for already-trained checkpoints
    ParamStore fresh = ck.params;
    {
        Rng r(1);
        init_control_from_base(fresh, r);
        init_brush_from_base(fresh);
    }

    auto sample_loop = [&](const MaskPyramid* pyr, bool use_control) {
        Rng rng(99);
        Tensor x = rng.normal_tensor({kLatentChannels, L, L});
        auto ts = sampling_timesteps(sched.T, 20);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            int t = ts[i];
            int tp = (i + 1 < ts.size()) ? ts[i + 1] : -1;
            if (use_control) {
                x = guided_denoise_step(x, t, tp, text, cond, pyr, fresh, sched, SamplerMode::ddim, rng);
            } else {
                DenoiserOutput out = denoiser_forward(fresh, x, t, text);
                x = sample_step(x, t, tp, out.eps_pred, sched, SamplerMode::ddim, rng);
            }
        }
        return x;
    };

    int failures = 0;
    auto report = [&](const std::string& name, bool ok, int code) {
        std::cout << "[selfcheck] " << name << ": " << (ok ? "PASS" : "FAIL") << "\n";
        if (!ok && failures == 0) failures = code;
    };

    MaskPyramid ones = build_mask_pyramid(BinaryMask(S, S, 1), L);
    Tensor with_ones = sample_loop(&ones, true);
    Tensor unguided = sample_loop(nullptr, true);
    std::cout << "[selfcheck] identity-mask hashes: " << tensor_sha(with_ones) << " vs "
              << tensor_sha(unguided) << "\n";
    report("identity-mask equivalence", tensor_sha(with_ones) == tensor_sha(unguided), 10);

    MaskPyramid zeros = build_mask_pyramid(BinaryMask(S, S, 0), L);
    Tensor with_zeros = sample_loop(&zeros, true);
    Tensor detached = sample_loop(nullptr, false);
    report("annihilation equivalence", tensor_sha(with_zeros) == tensor_sha(detached), 11);

    // fresh zero convs: base sampling unchanged by either attached branch
    report("zero-init control neutrality", tensor_sha(unguided) == tensor_sha(detached), 12);
    {
        Rng rng(99);
        Tensor x = rng.normal_tensor({kLatentChannels, L, L});
        Tensor img = Tensor::full({3, S, S}, 0.5f);
        BinaryMask hole(S, S);
        for (int y = S / 3; y < 2 * S / 3; ++y)
            for (int x2 = S / 3; x2 < 2 * S / 3; ++x2) hole.at(y, x2) = 1;
        Tensor mlat = make_masked_image_latent(fresh, img, hole);
        auto ts = sampling_timesteps(sched.T, 20);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            int t = ts[i];
            int tp = (i + 1 < ts.size()) ? ts[i + 1] : -1;
            Tensor bi = build_branch_input(x, mlat, hole, L);
            auto res = branch_forward(fresh, bi, t);
            DenoiserOutput out = denoiser_forward(fresh, x, t, text, nullptr, &res);
            x = sample_step(x, t, tp, out.eps_pred, sched, SamplerMode::ddim, rng);
        }
        report("zero-init inpaint-branch neutrality", tensor_sha(x) == tensor_sha(detached), 13);
    }

    {
        Rng rng(7);
        Tensor gen = rng.normal_tensor({3, S, S});
        Tensor orig = rng.normal_tensor({3, S, S});
        BinaryMask hole(S, S);
        for (int y = 10; y < S - 10; ++y)
            for (int x = 10; x < S / 2; ++x) hole.at(y, x) = 1;
        Tensor pasted = paste_back(gen, orig, hole, 0);
        bool ok = true;
        for (int c = 0; c < 3 && ok; ++c)
            for (int y = 0; y < S && ok; ++y)
                for (int x = 0; x < S; ++x)
                    if (pasted.at(c, y, x) !=
                        (hole.at(y, x) ? gen.at(c, y, x) : orig.at(c, y, x))) {
                        ok = false;
                        break;
                    }
        report("paste-back preservation", ok, 14);
    }

    if (failures == 0) std::cout << "[selfcheck] all suites passed\n";
    return failures;
}

// ---- make-fixtures ----

struct FixtureArgs {
    std::string out;
    std::uint64_t seed = 1;
    int ae_steps = 0;
};

int run_make_fixtures(const FixtureArgs& a) {
    if (a.out.empty()) throw ConfigError("--out is required");
    Rng rng(a.seed);
    ParamStore ps;
    init_autoencoder(ps, rng);
    init_base(ps, rng);
    init_control_from_base(ps, rng);
    init_brush_from_base(ps);
    if (a.ae_steps > 0) {
        TrainConfig cfg;
        cfg.branch = TrainBranch::autoencoder;
        cfg.steps = a.ae_steps;
        cfg.batch = 2;
        cfg.lr = 0.05f;
        cfg.seed = a.seed;
        train(ps, cfg);
    }
    save_checkpoint(a.out, ps, test_geometry());
    // a matching sample scene, handy as generate/refine-mask input
    SyntheticScene scene = gen_scene(a.seed, test_geometry().image);
    save_image_png((fs::path(a.out) / "scene.png").string(), scene.image);
    save_mask_png((fs::path(a.out) / "hole.png").string(), sample_instance_mask(scene, 2));
    std::cout << "wrote fixture checkpoint to " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mask-guided latent-diffusion inpainting toolkit"};
    app.set_version_flag("--version", std::string("maskguide ") + kVersion);
    app.require_subcommand(1);

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "inpaint an image");
    gen->add_option("--image", ga.image, "input RGB PNG");
    gen->add_option("--mask", ga.mask, "hole mask PNG (>=128 = generate)");
    gen->add_option("--prompt", ga.prompt, "text prompt");
    gen->add_option("--steps", ga.steps, "sampling steps");
    gen->add_option("--seed", ga.seed, "sampling seed");
    gen->add_option("--checkpoint", ga.checkpoint, "checkpoint directory");
    gen->add_option("--out", ga.out, "output PNG path");
    gen->add_option("--method", ga.method, "dualbranch|blended|soft");
    gen->add_option("--sampler", ga.sampler, "ddim|ddpm");
    gen->add_option("--denoise", ga.denoise, "denoise strength (blended/soft)");
    gen->add_flag("--control", ga.use_control, "enable the control branch");
    gen->add_option("--control-mode", ga.control_mode, "edge|file");
    gen->add_option("--control-image", ga.control_image, "condition PNG (control-mode file)");
    gen->add_option("--guidance-mask", ga.guidance_mask, "product|none");
    gen->add_option("--control-scale", ga.control_scale, "control residual scale");
    gen->add_option("--branch-scale", ga.branch_scale, "inpaint branch residual scale");
    gen->add_flag("--no-paste-back", ga.no_paste_back, "skip final paste-back");
    gen->add_option("--feather", ga.feather, "paste-back feather radius (px)");
    gen->add_option("--se-close", ga.se_close, "closing kernel size");
    gen->add_option("--se-open", ga.se_open, "opening kernel size");
    gen->add_option("--se-dilate", ga.se_dilate, "dilation kernel size");
    gen->add_option("--schedule-T", ga.schedule_T, "diffusion schedule length");
    gen->add_option("--config", ga.config_file, "JSON config file (flags override)");
    gen->add_flag("--upscale", ga.upscale, "reserved");

    RefineArgs ra;
    auto* ref = app.add_subcommand("refine-mask", "close/open/dilate a binary mask");
    ref->add_option("--in", ra.in, "input mask PNG");
    ref->add_option("--out", ra.out, "output mask PNG");
    ref->add_option("--se-close", ra.se_close, "closing kernel size");
    ref->add_option("--se-open", ra.se_open, "opening kernel size");
    ref->add_option("--se-dilate", ra.se_dilate, "dilation kernel size");

    PyramidArgs pa;
    auto* pyr = app.add_subcommand("make-pyramid", "resample a mask to the injection resolutions");
    pyr->add_option("--mask", pa.mask, "input mask PNG");
    pyr->add_option("--out", pa.out_dir, "output directory");
    pyr->add_flag("--refine", pa.refine, "refine the mask first");

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "train one model branch");
    tr->add_option("--branch", ta.branch, "autoencoder|base|control|inpaint");
    tr->add_option("--mask-sampler", ta.mask_sampler, "instance|random");
    tr->add_option("--steps", ta.steps, "optimizer steps");
    tr->add_option("--batch", ta.batch, "batch size");
    tr->add_option("--lr", ta.lr, "learning rate");
    tr->add_option("--seed", ta.seed, "training seed");
    tr->add_option("--corpus-seed", ta.corpus_seed, "scene corpus base seed");
    tr->add_option("--geometry", ta.geometry, "test|paper");
    tr->add_option("--init-from", ta.init_from, "checkpoint to continue from");
    tr->add_option("--out", ta.out, "output checkpoint directory");
    tr->add_flag("--verbose", ta.verbose, "log progress");

    EvalArgs ea;
    auto* ev = app.add_subcommand("eval-overcompletion", "score overcompletion on held-out scenes");
    ev->add_option("--ckpt-a", ea.ckpt_a, "first checkpoint");
    ev->add_option("--ckpt-b", ea.ckpt_b, "second checkpoint (optional, enables comparison)");
    ev->add_option("--scenes", ea.scenes, "number of held-out scenes");
    ev->add_option("--steps", ea.steps, "sampling steps per scene");
    ev->add_option("--band", ea.band, "tolerance band (px)");
    ev->add_option("--seed-base", ea.seed_base, "held-out scene seed base");
    ev->add_option("--sample-seed", ea.sample_seed, "per-scene sampling seed base");
    ev->add_option("--report", ea.report, "JSON report path");
    ev->add_flag("--verbose", ea.verbose, "log progress");

    std::string sc_ckpt = default_checkpoint_dir();
    auto* sc = app.add_subcommand("selfcheck", "run the invariant suites on a checkpoint");
    sc->add_option("--checkpoint", sc_ckpt, "checkpoint directory");

    FixtureArgs fa;
    auto* fx = app.add_subcommand("make-fixtures", "write a fresh test-geometry checkpoint");
    fx->add_option("--out", fa.out, "output checkpoint directory");
    fx->add_option("--seed", fa.seed, "init seed");
    fx->add_option("--ae-steps", fa.ae_steps, "optional autoencoder warmup steps");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_generate(ga, gen);
        if (ref->parsed()) return run_refine_mask(ra);
        if (pyr->parsed()) return run_make_pyramid(pa);
        if (tr->parsed()) return run_train(ta);
        if (ev->parsed()) return run_eval(ea);
        if (sc->parsed()) return run_selfcheck(sc_ckpt);
        if (fx->parsed()) return run_make_fixtures(fa);
        return kExitConfig;
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitCheckpoint;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitGeometry;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
