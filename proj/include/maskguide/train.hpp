#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskguide/inpaint.hpp"
#include "maskguide/models.hpp"
#include "maskguide/synth.hpp"

namespace mg {

enum class TrainBranch { autoencoder, base, control, inpaint };
enum class MaskSamplerKind { instance, random };

struct TrainConfig {
    TrainBranch branch = TrainBranch::inpaint;
    int steps = 200;
    int batch = 4;
    float lr = 0.02f;
    float momentum = 0.9f;
    float grad_clip = 1.f;  // global-norm clip per step, <= 0 disables
    std::uint64_t seed = 0;
    std::uint64_t corpus_seed = 1;
    Geometry geometry = test_geometry();
    MaskSamplerKind mask_sampler = MaskSamplerKind::random;
    int schedule_T = 50;
    float beta_start = 1e-4f;
    float beta_end = 0.02f;
    int log_every = 25;
    bool verbose = false;
};

struct TrainResult {
    std::vector<float> loss_log;  // one entry per step
};

// Optimizes only the selected branch's tensors with SGD + momentum. Throws
// CheckpointError when prerequisite tensors are missing (autoencoder before
// base, base before the branches) and NumericError on NaN loss.
TrainResult train(ParamStore& ps, const TrainConfig& cfg);

std::string branch_prefix(TrainBranch b);

struct MetricReport {
    std::vector<double> scores;
    double mean = 0.0;
    int count = 0;
    std::string config_fingerprint;
};

struct EvalConfig {
    int num_scenes = 100;
    std::uint64_t scene_seed_base = 1'000'000;  // held out from training corpora
    int steps = 10;
    std::uint64_t sample_seed = 7;
    int band_px = 2;
    int schedule_T = 50;
    float beta_start = 1e-4f;
    float beta_end = 0.02f;
    bool verbose = false;
};

// Paste-back stays off so the raw generation is judged.
MetricReport eval_overcompletion(const ParamStore& ps, const EvalConfig& cfg);

struct ComparisonReport {
    MetricReport first;
    MetricReport second;
    double mean_difference = 0.0;  // first - second
};

ComparisonReport eval_compare(const ParamStore& ps_a, const ParamStore& ps_b, const EvalConfig& cfg);

// Two-sided sign test p-value for paired scores (ties dropped).
double paired_sign_test_pvalue(const std::vector<double>& a, const std::vector<double>& b);

std::string metric_report_json(const MetricReport& r);

}  // namespace mg
