#pragma once

#include <functional>
#include <vector>

#include "maskguide/tensor.hpp"

namespace mg {

// Reverse-mode autodiff tape over Tensor. A fresh tape is built per forward
// pass; node ids are indices in creation order, which is also a topological
// order, so backward() is a single reverse sweep.
//
// Gradients of trainable parameters accumulate into external sink tensors
// (owned by the optimizer), so one tape per sample with shared sinks
// implements mini-batch accumulation. Frozen parameters pass a null sink:
// gradients still flow *through* them (needed when training a branch behind
// a frozen denoiser) but are not collected.
class Tape {
public:
    int input(Tensor v);
    int param(const Tensor& v, Tensor* grad_sink);

    const Tensor& val(int id) const { return nodes_[static_cast<std::size_t>(id)].val; }
    const Tensor& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

    // w: [Cout,Cin,k,k], b: [Cout], x: [Cin,H,W]; pad is symmetric zero pad.
    int conv2d(int x, int w, int b, int stride, int pad);
    int avgpool2(int x);
    int upsample_nearest2(int x);
    int silu(int x);
    int add(int a, int b);
    int scale(int x, float s);
    int mul_hw(int x, Tensor m);              // broadcast H×W map over channels
    int concat_ch(int a, int b);
    int film(int x, int scaleshift);          // scaleshift: [2C] -> x*(1+s)+t
    int linear(int v, int w, int b);          // w: [out,in], v: [in], b: [out]
    int mse(int x, Tensor target);            // mean over elements, scalar

    void backward(int loss_id);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor val;
        Tensor grad;
        bool needs_grad = false;
        Tensor* sink = nullptr;
        std::function<void(Tape&)> back;
    };

    int push(Node n);
    bool needs(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
    Tensor& g(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

    std::vector<Node> nodes_;
};

}  // namespace mg
