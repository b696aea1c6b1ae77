#include "maskguide/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "maskguide/errors.hpp"

namespace mg {

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor v) {
    Node n;
    n.val = std::move(v);
    return push(std::move(n));
}

int Tape::param(const Tensor& v, Tensor* grad_sink) {
    Node n;
    n.val = v;
    n.needs_grad = grad_sink != nullptr;
    n.sink = grad_sink;
    return push(std::move(n));
}

int Tape::conv2d(int x, int w, int b, int stride, int pad) {
    const Tensor& xv = val(x);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    check_arg(xv.shape.size() == 3 && wv.shape.size() == 4 && bv.shape.size() == 1, "conv2d rank mismatch");
    int cin = xv.dim(0), h = xv.dim(1), wd = xv.dim(2);
    int cout = wv.dim(0), k = wv.dim(2);
    check_arg(wv.dim(1) == cin, "conv2d: weight Cin " + std::to_string(wv.dim(1)) +
                                    " != input Cin " + std::to_string(cin));
    check_arg(bv.dim(0) == cout, "conv2d: bias size mismatch");
    int ho = (h + 2 * pad - k) / stride + 1;
    int wo = (wd + 2 * pad - k) / stride + 1;
    check_arg(ho >= 1 && wo >= 1, "conv2d: empty output");

    Tensor out({cout, ho, wo});
#pragma omp parallel for schedule(static)
    for (int oc = 0; oc < cout; ++oc) {
        float* op = out.data.data() + static_cast<std::size_t>(oc) * ho * wo;
        float bias = bv[oc];
        for (int i = 0; i < ho * wo; ++i) op[i] = bias;
        for (int ic = 0; ic < cin; ++ic) {
            const float* xp = xv.data.data() + static_cast<std::size_t>(ic) * h * wd;
            const float* wp = wv.data.data() + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
            for (int ky = 0; ky < k; ++ky) {
                for (int kx = 0; kx < k; ++kx) {
                    float wgt = wp[ky * k + kx];
                    if (wgt == 0.f) continue;
                    for (int oy = 0; oy < ho; ++oy) {
                        int iy = oy * stride + ky - pad;
                        if (iy < 0 || iy >= h) continue;
                        const float* xrow = xp + static_cast<std::size_t>(iy) * wd;
                        float* orow = op + static_cast<std::size_t>(oy) * wo;
                        for (int ox = 0; ox < wo; ++ox) {
                            int ix = ox * stride + kx - pad;
                            if (ix < 0 || ix >= wd) continue;
                            orow[ox] += wgt * xrow[ix];
                        }
                    }
                }
            }
        }
    }

    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x) || needs(w) || needs(b);
    int id = push(std::move(n));
    if (nodes_[static_cast<std::size_t>(id)].needs_grad) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x, w, b, stride, pad, cin, cout, h, wd, k, ho,
                                                     wo](Tape& t) {
            const Tensor& gy = t.grad(id);
            const Tensor& xv = t.val(x);
            const Tensor& wv = t.val(w);
            if (t.needs(x)) {
                Tensor& gx = t.g(x);
#pragma omp parallel for schedule(static)
                for (int ic = 0; ic < cin; ++ic) {
                    float* gxp = gx.data.data() + static_cast<std::size_t>(ic) * h * wd;
                    for (int oc = 0; oc < cout; ++oc) {
                        const float* gyp = gy.data.data() + static_cast<std::size_t>(oc) * ho * wo;
                        const float* wp =
                            wv.data.data() + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
                        for (int ky = 0; ky < k; ++ky) {
                            for (int kx = 0; kx < k; ++kx) {
                                float wgt = wp[ky * k + kx];
                                if (wgt == 0.f) continue;
                                for (int oy = 0; oy < ho; ++oy) {
                                    int iy = oy * stride + ky - pad;
                                    if (iy < 0 || iy >= h) continue;
                                    const float* gyrow = gyp + static_cast<std::size_t>(oy) * wo;
                                    float* gxrow = gxp + static_cast<std::size_t>(iy) * wd;
                                    for (int ox = 0; ox < wo; ++ox) {
                                        int ix = ox * stride + kx - pad;
                                        if (ix < 0 || ix >= wd) continue;
                                        gxrow[ix] += wgt * gyrow[ox];
                                    }
                                }
                            }
                        }
                    }
                }
            }
            if (t.needs(w)) {
                Tensor& gw = t.g(w);
#pragma omp parallel for schedule(static)
                for (int oc = 0; oc < cout; ++oc) {
                    const float* gyp = gy.data.data() + static_cast<std::size_t>(oc) * ho * wo;
                    for (int ic = 0; ic < cin; ++ic) {
                        const float* xp = xv.data.data() + static_cast<std::size_t>(ic) * h * wd;
                        float* gwp = gw.data.data() + ((static_cast<std::size_t>(oc) * cin + ic) * k) * k;
                        for (int ky = 0; ky < k; ++ky) {
                            for (int kx = 0; kx < k; ++kx) {
                                float acc = 0.f;
                                for (int oy = 0; oy < ho; ++oy) {
                                    int iy = oy * stride + ky - pad;
                                    if (iy < 0 || iy >= h) continue;
                                    const float* gyrow = gyp + static_cast<std::size_t>(oy) * wo;
                                    const float* xrow = xp + static_cast<std::size_t>(iy) * wd;
                                    for (int ox = 0; ox < wo; ++ox) {
                                        int ix = ox * stride + kx - pad;
                                        if (ix < 0 || ix >= wd) continue;
                                        acc += gyrow[ox] * xrow[ix];
                                    }
                                }
                                gwp[ky * k + kx] += acc;
                            }
                        }
                    }
                }
            }
            if (t.needs(b)) {
                Tensor& gb = t.g(b);
                for (int oc = 0; oc < cout; ++oc) {
                    const float* gyp = gy.data.data() + static_cast<std::size_t>(oc) * ho * wo;
                    float acc = 0.f;
                    for (int i = 0; i < ho * wo; ++i) acc += gyp[i];
                    gb[oc] += acc;
                }
            }
        };
    }
    return id;
}

int Tape::avgpool2(int x) {
    const Tensor& xv = val(x);
    check_arg(xv.shape.size() == 3, "avgpool2 expects CHW");
    int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    check_arg(h % 2 == 0 && w % 2 == 0, "avgpool2 expects even dims");
    Tensor out({c, h / 2, w / 2});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h / 2; ++y)
            for (int xx = 0; xx < w / 2; ++xx)
                out.at(ch, y, xx) = 0.25f * (xv.at(ch, 2 * y, 2 * xx) + xv.at(ch, 2 * y, 2 * xx + 1) +
                                             xv.at(ch, 2 * y + 1, 2 * xx) + xv.at(ch, 2 * y + 1, 2 * xx + 1));
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x, c, h, w](Tape& t) {
            const Tensor& gy = t.grad(id);
            Tensor& gx = t.g(x);
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < h / 2; ++y)
                    for (int xx = 0; xx < w / 2; ++xx) {
                        float gv = 0.25f * gy.at(ch, y, xx);
                        gx.at(ch, 2 * y, 2 * xx) += gv;
                        gx.at(ch, 2 * y, 2 * xx + 1) += gv;
                        gx.at(ch, 2 * y + 1, 2 * xx) += gv;
                        gx.at(ch, 2 * y + 1, 2 * xx + 1) += gv;
                    }
        };
    }
    return id;
}

int Tape::upsample_nearest2(int x) {
    const Tensor& xv = val(x);
    check_arg(xv.shape.size() == 3, "upsample expects CHW");
    int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < 2 * h; ++y)
            for (int xx = 0; xx < 2 * w; ++xx) out.at(ch, y, xx) = xv.at(ch, y / 2, xx / 2);
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x, c, h, w](Tape& t) {
            const Tensor& gy = t.grad(id);
            Tensor& gx = t.g(x);
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < 2 * h; ++y)
                    for (int xx = 0; xx < 2 * w; ++xx) gx.at(ch, y / 2, xx / 2) += gy.at(ch, y, xx);
        };
    }
    return id;
}

int Tape::silu(int x) {
    const Tensor& xv = val(x);
    Tensor out(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) {
        float v = xv[i];
        out[i] = v / (1.f + std::exp(-v));
    }
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x](Tape& t) {
            const Tensor& gy = t.grad(id);
            const Tensor& xv = t.val(x);
            Tensor& gx = t.g(x);
            for (std::int64_t i = 0; i < xv.numel(); ++i) {
                float v = xv[i];
                float s = 1.f / (1.f + std::exp(-v));
                gx[i] += gy[i] * s * (1.f + v * (1.f - s));
            }
        };
    }
    return id;
}

int Tape::add(int a, int b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    check_arg(av.same_shape(bv), "add shape mismatch: " + shape_str(av.shape) + " vs " + shape_str(bv.shape));
    Tensor out(av.shape);
    for (std::int64_t i = 0; i < av.numel(); ++i) out[i] = av[i] + bv[i];
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(a) || needs(b);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, a, b](Tape& t) {
            const Tensor& gy = t.grad(id);
            if (t.needs(a)) {
                Tensor& ga = t.g(a);
                for (std::int64_t i = 0; i < gy.numel(); ++i) ga[i] += gy[i];
            }
            if (t.needs(b)) {
                Tensor& gb = t.g(b);
                for (std::int64_t i = 0; i < gy.numel(); ++i) gb[i] += gy[i];
            }
        };
    }
    return id;
}

int Tape::scale(int x, float s) {
    const Tensor& xv = val(x);
    Tensor out(xv.shape);
    for (std::int64_t i = 0; i < xv.numel(); ++i) out[i] = s * xv[i];
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x, s](Tape& t) {
            const Tensor& gy = t.grad(id);
            Tensor& gx = t.g(x);
            for (std::int64_t i = 0; i < gy.numel(); ++i) gx[i] += s * gy[i];
        };
    }
    return id;
}

int Tape::mul_hw(int x, Tensor m) {
    const Tensor& xv = val(x);
    check_arg(xv.shape.size() == 3 && m.shape.size() == 2, "mul_hw expects CHW × HW");
    check_arg(xv.dim(1) == m.dim(0) && xv.dim(2) == m.dim(1),
              "mul_hw spatial mismatch: " + shape_str(xv.shape) + " vs " + shape_str(m.shape));
    int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor out(xv.shape);
    for (int ch = 0; ch < c; ++ch)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                out.at(ch, y, xx) = xv.at(ch, y, xx) * m.data[static_cast<std::size_t>(y) * w + xx];
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        auto mp = std::make_shared<Tensor>(std::move(m));
        nodes_[static_cast<std::size_t>(id)].back = [id, x, c, h, w, mp](Tape& t) {
            const Tensor& gy = t.grad(id);
            Tensor& gx = t.g(x);
            for (int ch = 0; ch < c; ++ch)
                for (int y = 0; y < h; ++y)
                    for (int xx = 0; xx < w; ++xx)
                        gx.at(ch, y, xx) +=
                            gy.at(ch, y, xx) * mp->data[static_cast<std::size_t>(y) * w + xx];
        };
    }
    return id;
}

int Tape::concat_ch(int a, int b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    check_arg(av.shape.size() == 3 && bv.shape.size() == 3 && av.dim(1) == bv.dim(1) && av.dim(2) == bv.dim(2),
              "concat_ch spatial mismatch");
    int ca = av.dim(0), cb = bv.dim(0), h = av.dim(1), w = av.dim(2);
    Tensor out({ca + cb, h, w});
    std::copy(av.data.begin(), av.data.end(), out.data.begin());
    std::copy(bv.data.begin(), bv.data.end(), out.data.begin() + av.numel());
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(a) || needs(b);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, a, b, ca, cb, h, w](Tape& t) {
            const Tensor& gy = t.grad(id);
            std::int64_t na = static_cast<std::int64_t>(ca) * h * w;
            std::int64_t nb = static_cast<std::int64_t>(cb) * h * w;
            if (t.needs(a)) {
                Tensor& ga = t.g(a);
                for (std::int64_t i = 0; i < na; ++i) ga[i] += gy[i];
            }
            if (t.needs(b)) {
                Tensor& gb = t.g(b);
                for (std::int64_t i = 0; i < nb; ++i) gb[i] += gy[na + i];
            }
        };
    }
    return id;
}

int Tape::film(int x, int scaleshift) {
    const Tensor& xv = val(x);
    const Tensor& sv = val(scaleshift);
    check_arg(xv.shape.size() == 3 && sv.shape.size() == 1 && sv.dim(0) == 2 * xv.dim(0),
              "film expects CHW and [2C]");
    int c = xv.dim(0), h = xv.dim(1), w = xv.dim(2);
    Tensor out(xv.shape);
    for (int ch = 0; ch < c; ++ch) {
        float sc = 1.f + sv[ch];
        float sh = sv[c + ch];
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx) out.at(ch, y, xx) = xv.at(ch, y, xx) * sc + sh;
    }
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x) || needs(scaleshift);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, x, scaleshift, c, h, w](Tape& t) {
            const Tensor& gy = t.grad(id);
            const Tensor& xv = t.val(x);
            const Tensor& sv = t.val(scaleshift);
            if (t.needs(x)) {
                Tensor& gx = t.g(x);
                for (int ch = 0; ch < c; ++ch) {
                    float sc = 1.f + sv[ch];
                    for (int y = 0; y < h; ++y)
                        for (int xx = 0; xx < w; ++xx) gx.at(ch, y, xx) += gy.at(ch, y, xx) * sc;
                }
            }
            if (t.needs(scaleshift)) {
                Tensor& gs = t.g(scaleshift);
                for (int ch = 0; ch < c; ++ch) {
                    float gsc = 0.f, gsh = 0.f;
                    for (int y = 0; y < h; ++y)
                        for (int xx = 0; xx < w; ++xx) {
                            gsc += gy.at(ch, y, xx) * xv.at(ch, y, xx);
                            gsh += gy.at(ch, y, xx);
                        }
                    gs[ch] += gsc;
                    gs[c + ch] += gsh;
                }
            }
        };
    }
    return id;
}

int Tape::linear(int v, int w, int b) {
    const Tensor& vv = val(v);
    const Tensor& wv = val(w);
    const Tensor& bv = val(b);
    check_arg(vv.shape.size() == 1 && wv.shape.size() == 2 && bv.shape.size() == 1, "linear rank mismatch");
    int in = vv.dim(0), out_d = wv.dim(0);
    check_arg(wv.dim(1) == in && bv.dim(0) == out_d, "linear shape mismatch");
    Tensor out({out_d});
    for (int o = 0; o < out_d; ++o) {
        float acc = bv[o];
        const float* wp = wv.data.data() + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) acc += wp[i] * vv[i];
        out[o] = acc;
    }
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(v) || needs(w) || needs(b);
    int id = push(std::move(n));
    if (needs(id)) {
        nodes_[static_cast<std::size_t>(id)].back = [id, v, w, b, in, out_d](Tape& t) {
            const Tensor& gy = t.grad(id);
            const Tensor& vv = t.val(v);
            const Tensor& wv = t.val(w);
            if (t.needs(v)) {
                Tensor& gv = t.g(v);
                for (int o = 0; o < out_d; ++o) {
                    const float* wp = wv.data.data() + static_cast<std::size_t>(o) * in;
                    for (int i = 0; i < in; ++i) gv[i] += gy[o] * wp[i];
                }
            }
            if (t.needs(w)) {
                Tensor& gw = t.g(w);
                for (int o = 0; o < out_d; ++o) {
                    float* gwp = gw.data.data() + static_cast<std::size_t>(o) * in;
                    for (int i = 0; i < in; ++i) gwp[i] += gy[o] * vv[i];
                }
            }
            if (t.needs(b)) {
                Tensor& gb = t.g(b);
                for (int o = 0; o < out_d; ++o) gb[o] += gy[o];
            }
        };
    }
    return id;
}

int Tape::mse(int x, Tensor target) {
    const Tensor& xv = val(x);
    check_arg(xv.same_shape(target), "mse shape mismatch");
    double acc = 0.0;
    for (std::int64_t i = 0; i < xv.numel(); ++i) {
        double d = static_cast<double>(xv[i]) - target[i];
        acc += d * d;
    }
    Tensor out({1});
    out[0] = static_cast<float>(acc / static_cast<double>(xv.numel()));
    Node n;
    n.val = std::move(out);
    n.needs_grad = needs(x);
    int id = push(std::move(n));
    if (needs(id)) {
        auto tp = std::make_shared<Tensor>(std::move(target));
        nodes_[static_cast<std::size_t>(id)].back = [id, x, tp](Tape& t) {
            const Tensor& gy = t.grad(id);
            const Tensor& xv = t.val(x);
            Tensor& gx = t.g(x);
            float c = 2.f * gy[0] / static_cast<float>(xv.numel());
            for (std::int64_t i = 0; i < xv.numel(); ++i) gx[i] += c * (xv[i] - (*tp)[i]);
        };
    }
    return id;
}

void Tape::backward(int loss_id) {
    for (auto& n : nodes_)
        if (n.needs_grad) n.grad = Tensor(n.val.shape);
    auto& ln = nodes_[static_cast<std::size_t>(loss_id)];
    check_arg(ln.needs_grad, "backward on a node with no grad path");
    check_arg(ln.val.numel() == 1, "backward expects a scalar loss");
    ln.grad[0] = 1.f;
    for (int i = loss_id; i >= 0; --i) {
        auto& n = nodes_[static_cast<std::size_t>(i)];
        if (n.needs_grad && n.back) n.back(*this);
    }
    for (auto& n : nodes_) {
        if (n.sink != nullptr && n.needs_grad) {
            for (std::int64_t i = 0; i < n.grad.numel(); ++i) (*n.sink)[i] += n.grad[i];
        }
    }
}

}  // namespace mg
