#include "maskguide/models.hpp"

#include <cmath>

#include "maskguide/errors.hpp"
#include "maskguide/mask_ops.hpp"

namespace mg {

std::array<int, kNumControlTaps> control_tap_channels() {
    return {32, 32, 32, 64, 64, 64, 96, 96, 96, 128, 128, 128, 128};
}

std::array<int, kNumDecoderTaps> decoder_tap_channels() {
    return {128, 128, 96, 96, 96, 64, 64, 64, 32, 32, 32, 32};
}

const Tensor& ParamStore::at(const std::string& name) const {
    auto it = t.find(name);
    if (it == t.end()) throw std::invalid_argument("missing parameter tensor: " + name);
    return it->second;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : t)
        if (k.rfind(prefix, 0) == 0) out.push_back(k);
    return out;
}

bool ParamStore::has_prefix(const std::string& prefix) const {
    auto it = t.lower_bound(prefix);
    return it != t.end() && it->first.rfind(prefix, 0) == 0;
}

namespace {

struct Net {
    Tape& tp;
    const ParamStore& ps;
    GradMap* gm;

    int P(const std::string& name) {
        const Tensor& v = ps.at(name);
        Tensor* sink = nullptr;
        if (gm) {
            Tensor& g = (*gm)[name];
            if (g.shape != v.shape) g = Tensor(v.shape);
            sink = &g;
        }
        return tp.param(v, sink);
    }
};

void add_conv(ParamStore& ps, Rng& rng, const std::string& name, int cout, int cin, int k,
              bool zero = false) {
    Tensor w({cout, cin, k, k});
    Tensor b({cout});
    if (!zero) {
        float std = std::sqrt(2.f / static_cast<float>(cin * k * k));
        for (auto& x : w.data) x = std * rng.normal();
        for (auto& x : b.data) x = 0.01f * rng.normal();
    }
    ps.t[name + ".w"] = std::move(w);
    ps.t[name + ".b"] = std::move(b);
}

void add_linear(ParamStore& ps, Rng& rng, const std::string& name, int out, int in, float gain = 1.f) {
    Tensor w({out, in});
    Tensor b({out});
    float std = gain * std::sqrt(1.f / static_cast<float>(in));
    for (auto& x : w.data) x = std * rng.normal();
    for (auto& x : b.data) x = 0.01f * rng.normal();
    ps.t[name + ".w"] = std::move(w);
    ps.t[name + ".b"] = std::move(b);
}

void add_res_block(ParamStore& ps, Rng& rng, const std::string& pre, int in_c, int out_c, bool with_text) {
    add_conv(ps, rng, pre + ".conv1", out_c, in_c, 3);
    add_conv(ps, rng, pre + ".conv2", out_c, out_c, 3);
    add_linear(ps, rng, pre + ".film_t", 2 * out_c, kTimeEmbedDim, 0.5f);
    if (with_text) add_linear(ps, rng, pre + ".film_x", 2 * out_c, kTextEmbedDim, 0.5f);
    if (in_c != out_c) add_conv(ps, rng, pre + ".skip", out_c, in_c, 1);
}

int res_block(Net& n, const std::string& pre, int x, int temb, int text) {
    int h = n.tp.conv2d(x, n.P(pre + ".conv1.w"), n.P(pre + ".conv1.b"), 1, 1);
    int fv = n.tp.linear(temb, n.P(pre + ".film_t.w"), n.P(pre + ".film_t.b"));
    if (text >= 0 && n.ps.has(pre + ".film_x.w"))
        fv = n.tp.add(fv, n.tp.linear(text, n.P(pre + ".film_x.w"), n.P(pre + ".film_x.b")));
    h = n.tp.film(h, fv);
    h = n.tp.silu(h);
    h = n.tp.conv2d(h, n.P(pre + ".conv2.w"), n.P(pre + ".conv2.b"), 1, 1);
    int sk = x;
    if (n.ps.has(pre + ".skip.w")) sk = n.tp.conv2d(x, n.P(pre + ".skip.w"), n.P(pre + ".skip.b"), 1, 0);
    return n.tp.add(h, sk);
}

struct EncT {
    int mid;
    std::array<int, kNumControlTaps> taps;
};

// Shared encoder body. Tap layout (4/3/3/3): stem, {rb,rb,down-conv} per
// level 0..2 (down-conv tap taken before pooling, at the level's own
// resolution), rb,rb at level 3, mid output.
EncT encoder_body(Net& n, const std::string& px, int h0, int temb, int text) {
    EncT e;
    int ti = 0;
    e.taps[ti++] = h0;
    int h = h0;
    for (int l = 0; l < 3; ++l) {
        std::string lp = px + ".enc.l" + std::to_string(l);
        h = res_block(n, lp + ".rb0", h, temb, text);
        e.taps[ti++] = h;
        h = res_block(n, lp + ".rb1", h, temb, text);
        e.taps[ti++] = h;
        h = n.tp.conv2d(h, n.P(lp + ".down.w"), n.P(lp + ".down.b"), 1, 1);
        e.taps[ti++] = h;
        h = n.tp.avgpool2(h);
    }
    h = res_block(n, px + ".enc.l3.rb0", h, temb, text);
    e.taps[ti++] = h;
    h = res_block(n, px + ".enc.l3.rb1", h, temb, text);
    e.taps[ti++] = h;
    h = res_block(n, px + ".mid.rb0", h, temb, text);
    h = res_block(n, px + ".mid.rb1", h, temb, text);
    e.taps[ti++] = h;
    e.mid = h;
    return e;
}

int up_block(Net& n, const std::string& pre, int h) {
    h = n.tp.upsample_nearest2(h);
    return n.tp.conv2d(h, n.P(pre + ".w"), n.P(pre + ".b"), 1, 1);
}

struct DecT {
    int head;  // feature entering the output conv (or last rb out)
    std::array<int, kNumDecoderTaps> rb_outs;
};

// Decoder: 2 blocks at L/8, 3 at L/4, 3 at L/2, 4 at L, each consuming one
// encoder skip (reverse tap order). `extra` holds 12 residual ids added to
// the block outputs on the main path (dense branch injection).
DecT decoder_body(Net& n, const std::string& px, int mid, const std::array<int, 13>& sk, int temb,
                  int text, const std::vector<int>* extra) {
    DecT d;
    int h = mid;
    int dj = 0;
    auto block = [&](const std::string& pre, int skip_idx) {
        int in = n.tp.concat_ch(h, sk[static_cast<std::size_t>(skip_idx)]);
        h = res_block(n, pre, in, temb, text);
        if (extra) h = n.tp.add(h, (*extra)[static_cast<std::size_t>(dj)]);
        d.rb_outs[static_cast<std::size_t>(dj)] = h;
        ++dj;
    };
    block(px + ".dec.l3.rb0", 11);
    block(px + ".dec.l3.rb1", 10);
    h = up_block(n, px + ".dec.up3", h);
    block(px + ".dec.l2.rb0", 9);
    block(px + ".dec.l2.rb1", 8);
    block(px + ".dec.l2.rb2", 7);
    h = up_block(n, px + ".dec.up2", h);
    block(px + ".dec.l1.rb0", 6);
    block(px + ".dec.l1.rb1", 5);
    block(px + ".dec.l1.rb2", 4);
    h = up_block(n, px + ".dec.up1", h);
    block(px + ".dec.l0.rb0", 3);
    block(px + ".dec.l0.rb1", 2);
    block(px + ".dec.l0.rb2", 1);
    block(px + ".dec.l0.rb3", 0);
    d.head = h;
    return d;
}

void add_denoiser_params(ParamStore& ps, Rng& rng, const std::string& px, bool with_text) {
    const auto& c = kLevelChannels;
    add_conv(ps, rng, px + ".stem", c[0], kLatentChannels, 3);
    for (int l = 0; l < 3; ++l) {
        std::string lp = px + ".enc.l" + std::to_string(l);
        add_res_block(ps, rng, lp + ".rb0", c[l], c[l], with_text);
        add_res_block(ps, rng, lp + ".rb1", c[l], c[l], with_text);
        add_conv(ps, rng, lp + ".down", c[l + 1], c[l], 3);
    }
    add_res_block(ps, rng, px + ".enc.l3.rb0", c[3], c[3], with_text);
    add_res_block(ps, rng, px + ".enc.l3.rb1", c[3], c[3], with_text);
    add_res_block(ps, rng, px + ".mid.rb0", c[3], c[3], with_text);
    add_res_block(ps, rng, px + ".mid.rb1", c[3], c[3], with_text);
    // decoder: skip channels follow the reverse tap order
    auto tapc = control_tap_channels();
    add_res_block(ps, rng, px + ".dec.l3.rb0", c[3] + tapc[11], c[3], with_text);
    add_res_block(ps, rng, px + ".dec.l3.rb1", c[3] + tapc[10], c[3], with_text);
    add_conv(ps, rng, px + ".dec.up3", c[2], c[3], 3);
    add_res_block(ps, rng, px + ".dec.l2.rb0", c[2] + tapc[9], c[2], with_text);
    add_res_block(ps, rng, px + ".dec.l2.rb1", c[2] + tapc[8], c[2], with_text);
    add_res_block(ps, rng, px + ".dec.l2.rb2", c[2] + tapc[7], c[2], with_text);
    add_conv(ps, rng, px + ".dec.up2", c[1], c[2], 3);
    add_res_block(ps, rng, px + ".dec.l1.rb0", c[1] + tapc[6], c[1], with_text);
    add_res_block(ps, rng, px + ".dec.l1.rb1", c[1] + tapc[5], c[1], with_text);
    add_res_block(ps, rng, px + ".dec.l1.rb2", c[1] + tapc[4], c[1], with_text);
    add_conv(ps, rng, px + ".dec.up1", c[0], c[1], 3);
    add_res_block(ps, rng, px + ".dec.l0.rb0", c[0] + tapc[3], c[0], with_text);
    add_res_block(ps, rng, px + ".dec.l0.rb1", c[0] + tapc[2], c[0], with_text);
    add_res_block(ps, rng, px + ".dec.l0.rb2", c[0] + tapc[1], c[0], with_text);
    add_res_block(ps, rng, px + ".dec.l0.rb3", c[0] + tapc[0], c[0], with_text);
}

void copy_prefix(ParamStore& ps, const std::string& from, const std::string& to, bool drop_text) {
    for (const auto& name : ps.names_with_prefix(from + ".")) {
        if (drop_text && name.find(".film_x.") != std::string::npos) continue;
        ps.t[to + name.substr(from.size())] = ps.t.at(name);
    }
}

}  // namespace

void init_base(ParamStore& ps, Rng& rng) {
    add_denoiser_params(ps, rng, "base", /*with_text=*/true);
    add_conv(ps, rng, "base.out", kLatentChannels, kLevelChannels[0], 3);
    // small-scale output head: keeps the untrained predictor near zero so
    // early training losses and sampling trajectories stay finite
    for (auto& v : ps.t.at("base.out.w").data) v *= 1e-3f;
    for (auto& v : ps.t.at("base.out.b").data) v *= 1e-3f;
}

void init_autoencoder(ParamStore& ps, Rng& rng) {
    add_conv(ps, rng, "ae.enc.c0", 16, 3, 3);
    add_conv(ps, rng, "ae.enc.c1", 32, 16, 3);
    add_conv(ps, rng, "ae.enc.c2", 32, 32, 3);
    add_conv(ps, rng, "ae.enc.c3", kLatentChannels, 32, 3);
    add_conv(ps, rng, "ae.dec.c0", 32, kLatentChannels, 3);
    add_conv(ps, rng, "ae.dec.u0", 32, 32, 3);
    add_conv(ps, rng, "ae.dec.u1", 32, 32, 3);
    add_conv(ps, rng, "ae.dec.u2", 32, 32, 3);
    add_conv(ps, rng, "ae.dec.out", 3, 32, 3);
}

void init_control_from_base(ParamStore& ps, Rng& rng) {
    check_arg(ps.has("base.stem.w"), "control init requires base parameters");
    // trainable copy of the base encoder + mid
    for (const auto& name : ps.names_with_prefix("base.")) {
        auto rel = name.substr(5);
        if (rel.rfind("stem", 0) == 0 || rel.rfind("enc.", 0) == 0 || rel.rfind("mid.", 0) == 0)
            ps.t["ctrl." + rel] = ps.t.at(name);
    }
    add_conv(ps, rng, "ctrl.cstem.c0", 8, 1, 3);
    add_conv(ps, rng, "ctrl.cstem.c1", 16, 8, 3);
    add_conv(ps, rng, "ctrl.cstem.c2", kLevelChannels[0], 16, 3);
    auto tapc = control_tap_channels();
    Rng zero_rng(0);
    for (int i = 0; i < kNumControlTaps; ++i)
        add_conv(ps, zero_rng, "ctrl.zc" + std::to_string(i), tapc[static_cast<std::size_t>(i)],
                 tapc[static_cast<std::size_t>(i)], 1, /*zero=*/true);
}

void init_brush_from_base(ParamStore& ps) {
    check_arg(ps.has("base.stem.w"), "inpaint-branch init requires base parameters");
    copy_prefix(ps, "base", "brush", /*drop_text=*/true);
    ps.t.erase("brush.out.w");
    ps.t.erase("brush.out.b");
    // 9-channel stem: base weights on the noisy-latent channels, zeros on
    // the masked-latent and mask channels
    const Tensor& bw = ps.at("base.stem.w");
    Tensor w({kLevelChannels[0], 9, 3, 3});
    for (int oc = 0; oc < kLevelChannels[0]; ++oc)
        for (int ic = 0; ic < kLatentChannels; ++ic)
            for (int k = 0; k < 9; ++k)
                w.data[(static_cast<std::size_t>(oc) * 9 + ic) * 9 + k] =
                    bw.data[(static_cast<std::size_t>(oc) * kLatentChannels + ic) * 9 + k];
    ps.t["brush.stem.w"] = std::move(w);
    ps.t["brush.stem.b"] = ps.at("base.stem.b");
    auto tapc = control_tap_channels();
    auto decc = decoder_tap_channels();
    Rng zero_rng(0);
    for (int i = 0; i < kNumBranchTaps; ++i) {
        int c = i < kNumControlTaps ? tapc[static_cast<std::size_t>(i)]
                                    : decc[static_cast<std::size_t>(i - kNumControlTaps)];
        add_conv(ps, zero_rng, "brush.zc" + std::to_string(i), c, c, 1, /*zero=*/true);
    }
}

BaseForwardT base_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm, int x_t, int t,
                            const Tensor& text, const std::vector<int>* ctrl_res,
                            const std::vector<int>* branch_res) {
    Net n{tp, ps, gm};
    int temb = tp.input(time_embedding(t));
    int text_id = tp.input(text);
    int h0 = tp.conv2d(x_t, n.P("base.stem.w"), n.P("base.stem.b"), 1, 1);
    EncT enc = encoder_body(n, "base", h0, temb, text_id);

    std::array<int, 13> sk = enc.taps;
    int mid = enc.mid;
    auto inject13 = [&](const std::vector<int>& r) {
        check_arg(r.size() == kNumControlTaps, "expected 13 encoder/mid residuals");
        for (int i = 0; i < 12; ++i)
            sk[static_cast<std::size_t>(i)] = tp.add(sk[static_cast<std::size_t>(i)], r[static_cast<std::size_t>(i)]);
        mid = tp.add(mid, r[12]);
    };
    if (ctrl_res) inject13(*ctrl_res);
    std::vector<int> dec_extra;
    if (branch_res) {
        check_arg(branch_res->size() == kNumBranchTaps, "expected 25 branch residuals");
        std::vector<int> first13(branch_res->begin(), branch_res->begin() + kNumControlTaps);
        inject13(first13);
        dec_extra.assign(branch_res->begin() + kNumControlTaps, branch_res->end());
    }

    DecT dec = decoder_body(n, "base", mid, sk, temb, text_id, branch_res ? &dec_extra : nullptr);
    int eps = tp.conv2d(dec.head, n.P("base.out.w"), n.P("base.out.b"), 1, 1);
    return {eps, enc.taps};
}

std::vector<int> control_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm, const Tensor& cond,
                                   int x_t, int t, const Tensor& text) {
    check_arg(cond.shape.size() == 3 && cond.dim(0) == 1, "condition must be 1×H×W");
    check_arg(cond.dim(1) == tp.val(x_t).dim(1) * kAutoencoderFactor,
              "condition must be at image resolution");
    Net n{tp, ps, gm};
    int temb = tp.input(time_embedding(t));
    int text_id = tp.input(text);
    int c = tp.conv2d(tp.input(cond), n.P("ctrl.cstem.c0.w"), n.P("ctrl.cstem.c0.b"), 2, 1);
    c = tp.silu(c);
    c = tp.conv2d(c, n.P("ctrl.cstem.c1.w"), n.P("ctrl.cstem.c1.b"), 2, 1);
    c = tp.silu(c);
    c = tp.conv2d(c, n.P("ctrl.cstem.c2.w"), n.P("ctrl.cstem.c2.b"), 2, 1);
    int h0 = tp.conv2d(x_t, n.P("ctrl.stem.w"), n.P("ctrl.stem.b"), 1, 1);
    h0 = tp.add(h0, c);
    EncT enc = encoder_body(n, "ctrl", h0, temb, text_id);
    std::vector<int> res(kNumControlTaps);
    for (int i = 0; i < kNumControlTaps; ++i) {
        std::string zc = "ctrl.zc" + std::to_string(i);
        res[static_cast<std::size_t>(i)] =
            tp.conv2d(enc.taps[static_cast<std::size_t>(i)], n.P(zc + ".w"), n.P(zc + ".b"), 1, 0);
    }
    return res;
}

std::vector<int> branch_forward_t(Tape& tp, const ParamStore& ps, GradMap* gm,
                                  const Tensor& branch_input, int t) {
    check_arg(branch_input.shape.size() == 3 && branch_input.dim(0) == 9,
              "branch input must have 9 channels");
    Net n{tp, ps, gm};
    int temb = tp.input(time_embedding(t));
    int bi = tp.input(branch_input);
    int h0 = tp.conv2d(bi, n.P("brush.stem.w"), n.P("brush.stem.b"), 1, 1);
    EncT enc = encoder_body(n, "brush", h0, temb, /*text=*/-1);
    DecT dec = decoder_body(n, "brush", enc.mid, enc.taps, temb, /*text=*/-1, nullptr);
    std::vector<int> res(kNumBranchTaps);
    for (int i = 0; i < kNumBranchTaps; ++i) {
        std::string zc = "brush.zc" + std::to_string(i);
        int tap = i < kNumControlTaps ? enc.taps[static_cast<std::size_t>(i)]
                                      : dec.rb_outs[static_cast<std::size_t>(i - kNumControlTaps)];
        res[static_cast<std::size_t>(i)] = tp.conv2d(tap, n.P(zc + ".w"), n.P(zc + ".b"), 1, 0);
    }
    return res;
}

int ae_encode_t(Tape& tp, const ParamStore& ps, GradMap* gm, const Tensor& img) {
    check_arg(img.shape.size() == 3 && img.dim(0) == 3, "image must be 3×H×W");
    check_arg(img.dim(1) % kAutoencoderFactor == 0 && img.dim(2) % kAutoencoderFactor == 0,
              "image dims must be divisible by " + std::to_string(kAutoencoderFactor));
    Net n{tp, ps, gm};
    Tensor normed(img.shape);
    for (std::int64_t i = 0; i < img.numel(); ++i) normed[i] = 2.f * img[i] - 1.f;
    int h = tp.conv2d(tp.input(std::move(normed)), n.P("ae.enc.c0.w"), n.P("ae.enc.c0.b"), 2, 1);
    h = tp.silu(h);
    h = tp.conv2d(h, n.P("ae.enc.c1.w"), n.P("ae.enc.c1.b"), 2, 1);
    h = tp.silu(h);
    h = tp.conv2d(h, n.P("ae.enc.c2.w"), n.P("ae.enc.c2.b"), 2, 1);
    h = tp.silu(h);
    return tp.conv2d(h, n.P("ae.enc.c3.w"), n.P("ae.enc.c3.b"), 1, 1);
}

int ae_decode_t(Tape& tp, const ParamStore& ps, GradMap* gm, int z) {
    Net n{tp, ps, gm};
    int h = tp.conv2d(z, n.P("ae.dec.c0.w"), n.P("ae.dec.c0.b"), 1, 1);
    h = tp.silu(h);
    for (int i = 0; i < 3; ++i) {
        std::string name = "ae.dec.u" + std::to_string(i);
        h = tp.upsample_nearest2(h);
        h = tp.conv2d(h, n.P(name + ".w"), n.P(name + ".b"), 1, 1);
        h = tp.silu(h);
    }
    return tp.conv2d(h, n.P("ae.dec.out.w"), n.P("ae.dec.out.b"), 1, 1);
}

Tensor image_from_decoded(const Tensor& decoded) {
    Tensor out(decoded.shape);
    for (std::int64_t i = 0; i < decoded.numel(); ++i) {
        float v = (decoded[i] + 1.f) * 0.5f;
        out[i] = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
    }
    return out;
}

void validate_control_residuals(const std::vector<Tensor>& res, int latent_side) {
    check_arg(res.size() == kNumControlTaps,
              "control residual list has " + std::to_string(res.size()) + " entries, expected 13");
    auto tapc = control_tap_channels();
    for (int i = 0; i < kNumControlTaps; ++i) {
        int side = latent_side >> kInjectionIndexMap[static_cast<std::size_t>(i)];
        const Tensor& r = res[static_cast<std::size_t>(i)];
        check_arg(r.shape.size() == 3 && r.dim(0) == tapc[static_cast<std::size_t>(i)] &&
                      r.dim(1) == side && r.dim(2) == side,
                  "control residual " + std::to_string(i) + " has shape " + shape_str(r.shape));
    }
}

void validate_branch_residuals(const std::vector<Tensor>& res, int latent_side) {
    check_arg(res.size() == kNumBranchTaps,
              "branch residual list has " + std::to_string(res.size()) + " entries, expected 25");
    std::vector<Tensor> first13(res.begin(), res.begin() + kNumControlTaps);
    validate_control_residuals(first13, latent_side);
    auto decc = decoder_tap_channels();
    constexpr std::array<int, kNumDecoderTaps> dec_levels = {3, 3, 2, 2, 2, 1, 1, 1, 0, 0, 0, 0};
    for (int j = 0; j < kNumDecoderTaps; ++j) {
        int side = latent_side >> dec_levels[static_cast<std::size_t>(j)];
        const Tensor& r = res[static_cast<std::size_t>(kNumControlTaps + j)];
        check_arg(r.shape.size() == 3 && r.dim(0) == decc[static_cast<std::size_t>(j)] &&
                      r.dim(1) == side && r.dim(2) == side,
                  "branch decoder residual " + std::to_string(j) + " has shape " + shape_str(r.shape));
    }
}

DenoiserOutput denoiser_forward(const ParamStore& ps, const Tensor& x_t, int t, const Tensor& text,
                                const std::vector<Tensor>* control_residuals,
                                const std::vector<Tensor>* branch_residuals) {
    check_arg(x_t.shape.size() == 3 && x_t.dim(0) == kLatentChannels, "x_t must be 4×L×L");
    if (control_residuals) validate_control_residuals(*control_residuals, x_t.dim(1));
    if (branch_residuals) validate_branch_residuals(*branch_residuals, x_t.dim(1));
    Tape tp;
    int x = tp.input(x_t);
    std::vector<int> cr, br;
    if (control_residuals)
        for (const auto& r : *control_residuals) cr.push_back(tp.input(r));
    if (branch_residuals)
        for (const auto& r : *branch_residuals) br.push_back(tp.input(r));
    BaseForwardT out = base_forward_t(tp, ps, nullptr, x, t, text, control_residuals ? &cr : nullptr,
                                      branch_residuals ? &br : nullptr);
    DenoiserOutput result;
    result.eps_pred = tp.val(out.eps);
    for (int id : out.taps) result.features.push_back(tp.val(id));
    return result;
}

std::vector<Tensor> control_forward(const ParamStore& ps, const Tensor& cond, const Tensor& x_t, int t,
                                    const Tensor& text) {
    Tape tp;
    int x = tp.input(x_t);
    auto ids = control_forward_t(tp, ps, nullptr, cond, x, t, text);
    std::vector<Tensor> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(tp.val(id));
    return out;
}

std::vector<Tensor> branch_forward(const ParamStore& ps, const Tensor& branch_input, int t) {
    Tape tp;
    auto ids = branch_forward_t(tp, ps, nullptr, branch_input, t);
    std::vector<Tensor> out;
    out.reserve(ids.size());
    for (int id : ids) out.push_back(tp.val(id));
    return out;
}

Tensor encode_image(const ParamStore& ps, const Tensor& img) {
    Tape tp;
    return tp.val(ae_encode_t(tp, ps, nullptr, img));
}

Tensor decode_latent(const ParamStore& ps, const Tensor& z) {
    check_arg(z.shape.size() == 3 && z.dim(0) == kLatentChannels, "latent must be 4×L×L");
    Tape tp;
    int d = ae_decode_t(tp, ps, nullptr, tp.input(z));
    return image_from_decoded(tp.val(d));
}

}  // namespace mg
