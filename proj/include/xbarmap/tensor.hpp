// tensor.hpp — weight/activation containers and the SMET binary format
//
// SMET layout (all little-endian):
//   bytes 0..3   magic "SMET"
//   bytes 4..5   u16 version (1)
//   byte  6      u8  dtype code (0 = 64-bit float)
//   byte  7      u8  ndim
//   then         ndim x u32 dims
//   then         payload, row-major
//
// CSV is accepted for 2-D data only: comma-separated, one matrix row per
// line, no header.
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace xbarmap {

// Real-valued weight matrix. Rows run along word-lines (input dimension H),
// columns along bit-lines (output dimension W).
struct WeightTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data; // row-major, rows*cols entries
    std::string name;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    std::size_t size() const { return rows * cols; }

    // Enforces rows,cols >= 1, data length, and finiteness.
    void validate() const;
};

// Non-negative activation values (post-ReLU assumption).
struct ActivationVector {
    std::vector<double> data;

    std::size_t size() const { return data.size(); }
    void validate() const; // finite and >= 0
};

WeightTensor load_tensor(const std::string& path);
void save_tensor(const WeightTensor& tensor, const std::string& path);

ActivationVector load_activations(const std::string& path);
void save_activations(const ActivationVector& act, const std::string& path);

// CSV parser used by load_tensor when the file does not start with the
// SMET magic. Exposed for tests.
WeightTensor parse_csv(const std::string& text, const std::string& origin);

} // namespace xbarmap
