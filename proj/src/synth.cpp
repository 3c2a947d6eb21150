#include "xbarmap/synth.hpp"

#include <cmath>
#include <numbers>

namespace xbarmap {

double NormalSampler::uniform01() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double NormalSampler::normal(double mean, double stddev) {
    if (have_spare_) {
        have_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return mean + stddev * radius * std::cos(angle);
}

WeightTensor synth_normal_tensor(std::size_t rows, std::size_t cols, double mean, double stddev,
                                 std::uint64_t seed) {
    NormalSampler sampler(seed);
    WeightTensor t;
    t.rows = rows;
    t.cols = cols;
    t.name = "normal";
    t.data.resize(rows * cols);
    for (double& v : t.data) v = sampler.normal(mean, stddev);
    return t;
}

WeightTensor synth_uniform_tensor(std::size_t rows, std::size_t cols, double lo, double hi,
                                  std::uint64_t seed) {
    NormalSampler sampler(seed);
    WeightTensor t;
    t.rows = rows;
    t.cols = cols;
    t.name = "uniform";
    t.data.resize(rows * cols);
    for (double& v : t.data) v = lo + (hi - lo) * sampler.uniform01();
    return t;
}

} // namespace xbarmap
