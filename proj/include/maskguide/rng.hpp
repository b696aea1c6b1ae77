#pragma once

#include <cstdint>
#include <random>

#include "maskguide/tensor.hpp"

namespace mg {

// Seeded RNG wrapper. All randomness in the toolkit flows through explicit
// Rng instances so runs are reproducible from their seeds.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    float normal() { return norm_(eng_); }
    float uniform() { return unif_(eng_); }
    float uniform(float lo, float hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        std::uniform_int_distribution<int> d(lo, hi);
        return d(eng_);
    }
    std::uint64_t next_seed() {
        std::uniform_int_distribution<std::uint64_t> d;
        return d(eng_);
    }

    Tensor normal_tensor(std::vector<int> shape, float stddev = 1.f) {
        Tensor t(std::move(shape));
        for (auto& x : t.data) x = stddev * normal();
        return t;
    }

private:
    std::mt19937_64 eng_;
    std::normal_distribution<float> norm_{0.f, 1.f};
    std::uniform_real_distribution<float> unif_{0.f, 1.f};
};

}  // namespace mg
