// synth.hpp — deterministic synthetic fixtures
//
// std::normal_distribution is implementation-defined, so normal samples
// come from an in-house Box-Muller over mt19937_64; identical seeds give
// identical tensors for a given build.
#pragma once

#include <cstdint>
#include <random>

#include "xbarmap/tensor.hpp"

namespace xbarmap {

class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : rng_(seed) {}

    double uniform01(); // in [0, 1)
    double normal(double mean, double stddev);

private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

WeightTensor synth_normal_tensor(std::size_t rows, std::size_t cols, double mean, double stddev,
                                 std::uint64_t seed);

WeightTensor synth_uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi,
                                  std::uint64_t seed);

} // namespace xbarmap
