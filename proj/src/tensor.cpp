#include "maskguide/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace mg {

std::int64_t numel_of(const std::vector<int>& shape) {
    std::int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(numel_of(shape)), 0.f);
}

Tensor Tensor::full(std::vector<int> s, float v) {
    Tensor t(std::move(s));
    t.fill(v);
    return t;
}

void Tensor::fill(float v) {
    for (auto& x : data) x = v;
}

bool Tensor::all_finite() const {
    for (float x : data)
        if (!std::isfinite(x)) return false;
    return true;
}

bool Tensor::bit_equal(const Tensor& o) const {
    if (shape != o.shape) return false;
    return std::memcmp(data.data(), o.data.data(), data.size() * sizeof(float)) == 0;
}

}  // namespace mg
