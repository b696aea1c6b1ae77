#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maskguide/rng.hpp"
#include "maskguide/schedule.hpp"
#include "maskguide/tape.hpp"
#include "maskguide/tensor.hpp"

namespace mg {

// image side = 8 × latent side for both supported geometries
// (128→16 "test", 512→64 "paper").
struct Geometry {
    int image = 128;
    int latent = 16;
    bool operator==(const Geometry&) const = default;
};
inline Geometry test_geometry() { return {128, 16}; }
inline Geometry paper_geometry() { return {512, 64}; }

constexpr int kLatentChannels = 4;
constexpr int kAutoencoderFactor = 8;
constexpr std::array<int, 4> kLevelChannels = {32, 64, 96, 128};
constexpr int kNumControlTaps = 13;   // encoder taps + mid
constexpr int kNumDecoderTaps = 12;
constexpr int kNumBranchTaps = kNumControlTaps + kNumDecoderTaps;

// Channels of the 13 encoder/mid injection points. Spatial sides follow the
// 4/3/3/3 level split: tap i lives at L / 2^index_map[i].
std::array<int, kNumControlTaps> control_tap_channels();
std::array<int, kNumDecoderTaps> decoder_tap_channels();

// Named-tensor bundle. All model families share one store with prefixes
// "base.", "ctrl.", "brush.", "ae.".
struct ParamStore {
    std::map<std::string, Tensor> t;

    bool has(const std::string& name) const { return t.count(name) != 0; }
    const Tensor& at(const std::string& name) const;
    std::vector<std::string> names_with_prefix(const std::string& prefix) const;
    bool has_prefix(const std::string& prefix) const;
};

using GradMap = std::map<std::string, Tensor>;

void init_base(ParamStore& ps, Rng& rng);
void init_autoencoder(ParamStore& ps, Rng& rng);
// Trainable encoder copy + condition stem + 13 zero convs.
void init_control_from_base(ParamStore& ps, Rng& rng);
// Text-free denoiser copy + 9-channel stem + 25 zero convs.
void init_brush_from_base(ParamStore& ps);

// ---- tape-level forwards (used by training and sampling loops) ----

struct BaseForwardT {
    int eps;                                  // tape id
    std::array<int, kNumControlTaps> taps;    // pre-injection encoder features
};

// ctrl_res (13) and branch_res (25) are tape ids of already-scaled
// residuals; either may be null.
BaseForwardT base_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm, int x_t, int t,
                            const Tensor& text, const std::vector<int>* ctrl_res,
                            const std::vector<int>* branch_res);

std::vector<int> control_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm, const Tensor& cond,
                                   int x_t, int t, const Tensor& text);

std::vector<int> branch_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm,
                                  const Tensor& branch_input, int t);

int ae_encode_t(Tape& tp, const ParamStore& ps, GradMap* gm, const Tensor& img);
// Returns the decoded map in [-1,1] space (no clamp); use latent_to_image.
int ae_decode_t(Tape& tp, const ParamStore& ps, GradMap* gm, int z);

Tensor image_from_decoded(const Tensor& decoded);  // (x+1)/2, clamp [0,1]

// ---- tensor-level wrappers (the module contracts) ----

struct DenoiserOutput {
    Tensor eps_pred;
    std::vector<Tensor> features;  // the 13 encoder/mid features
};

DenoiserOutput denoiser_forward(const ParamStore& ps, const Tensor& x_t, int t, const Tensor& text,
                                const std::vector<Tensor>* control_residuals = nullptr,
                                const std::vector<Tensor>* branch_residuals = nullptr);

std::vector<Tensor> control_forward(const ParamStore& ps, const Tensor& cond, const Tensor& x_t, int t,
                                    const Tensor& text);

std::vector<Tensor> branch_forward(const ParamStore& ps, const Tensor& branch_input, int t);

Tensor encode_image(const ParamStore& ps, const Tensor& img);
Tensor decode_latent(const ParamStore& ps, const Tensor& z);

void validate_control_residuals(const std::vector<Tensor>& res, int latent_side);
void validate_branch_residuals(const std::vector<Tensor>& res, int latent_side);

}  // namespace mg
