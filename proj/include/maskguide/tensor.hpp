#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mg {

// Dense float tensor, row-major. Most of the code uses the C×H×W layout;
// vectors are 1-d tensors.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int> s, float v);

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    float& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    float operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    // 3-d accessors (C,H,W)
    float& at(int c, int y, int x) {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    float at(int c, int y, int x) const {
        return data[(static_cast<std::size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    void fill(float v);
    bool all_finite() const;
    bool bit_equal(const Tensor& o) const;
};

std::int64_t numel_of(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

}  // namespace mg
