// quantizer.hpp — sign-magnitude quantization with a consecutive-1 window
//
// A codeword has bits b_1..b_{n_q}, b_1 the MSB with value 2^-1. All set
// bits must lie in a window of size s starting at the most significant set
// bit k: positions k .. min(n_q, k+s-1). The representable magnitudes are
//
//   R(n_q, s) = {0} U { sum_{i=k}^{min(n_q,k+s-1)} b_i 2^-i : b_k = 1 }
//
// with maximum 1 - 2^-s. Tensors are scaled down by a power of two so every
// magnitude fits that bound; the exponent is never negative (small tensors
// are not scaled up).
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbarmap/tensor.hpp"

namespace xbarmap {

enum class Rounding : std::uint8_t {
    HalfAwayFromZero = 0,
    HalfToEven = 1,
};

struct QuantConfig {
    int n_q = 8;                                     // codeword bit-width
    int s = 3;                                       // consecutive-1 window size
    Rounding rounding = Rounding::HalfAwayFromZero;

    void validate() const; // 1 <= s <= n_q <= 16
};

// One quantized weight. The magnitude is kept as an integer in units of
// 2^-n_q, so bit i (1-based from the MSB) is (mag >> (n_q - i)) & 1.
struct Codeword {
    std::int8_t sign = 1;    // +1 or -1; zero magnitudes carry +1
    std::uint32_t mag = 0;   // in [0, 2^n_q)

    bool bit(int i, int n_q) const { return (mag >> (n_q - i)) & 1u; }
    // Index of the first set bit (1 = MSB), or 0 if the magnitude is zero.
    int msb_pos(int n_q) const;
    double magnitude(int n_q) const; // mag * 2^-n_q, exact
};

// True when all set bits of mag fit a window of size s anchored at the MSB.
bool window_ok(std::uint32_t mag, int s);

struct QuantizedTensor {
    std::size_t rows = 0;
    std::size_t cols = 0;
    QuantConfig config;
    int scale_exp = 0; // dequantized weight = sign * magnitude * 2^scale_exp
    std::vector<Codeword> codewords; // row-major

    const Codeword& at(std::size_t r, std::size_t c) const { return codewords[r * cols + c]; }
    std::size_t size() const { return rows * cols; }
    double dequantize_at(std::size_t idx) const;
};

// Smallest e >= 0 such that max|w| / 2^e <= 1 - 2^-s. All-zero tensors
// return 0.
int compute_scale(const WeightTensor& tensor, const QuantConfig& config);

// Integer magnitude of the nearest element of R(n_q, s) to |w_scaled|,
// ties broken by the configured rule. A carry that promotes the MSB
// position is accepted. Throws RangeError when |w_scaled| > 1 - 2^-s.
std::uint32_t quantize_magnitude(double abs_scaled, const QuantConfig& config);

Codeword quantize_value(double w_scaled, const QuantConfig& config);

QuantizedTensor quantize_tensor(const WeightTensor& tensor, const QuantConfig& config);

WeightTensor dequantize(const QuantizedTensor& qt);

// Fraction of codewords with b_i = 1 for each position, plus totals.
struct BitSparsityStats {
    std::vector<double> bit_density; // index 0 -> b_1
    double overall_density = 0.0;    // set bits / (n_q * codewords)
    std::uint64_t total_ones = 0;
};

BitSparsityStats bit_sparsity_stats(const QuantizedTensor& qt);

// Mean over elements of (w - dequantized)^2.
double quantization_mse(const WeightTensor& tensor, const QuantizedTensor& qt);

struct SweepRow {
    int s = 0;
    int scale_exp = 0;
    double mse = 0.0;
    double overall_sparsity = 0.0;      // zero bits / total bits
    std::vector<double> bit_sparsity;   // 1 - density per position
    std::uint64_t total_ones = 0;
};

// One row per window size, computed via quantize_tensor + stats.
std::vector<SweepRow> sweep_window(const WeightTensor& tensor, int n_q,
                                   const std::vector<int>& s_values,
                                   Rounding rounding = Rounding::HalfAwayFromZero);

// Binary container for quantized tensors (SMEQ). Header mirrors SMET:
// magic "SMEQ", u16 version, u8 n_q, u8 s, u8 rounding, u8 reserved,
// i32 scale_exp, u32 rows, u32 cols; then rows*cols sign bytes (0 = +,
// 1 = -); then n_q bit-position planes of rows*cols bytes each (0/1),
// most significant position first. Little-endian throughout.
void save_quantized(const QuantizedTensor& qt, const std::string& path);
QuantizedTensor load_quantized(const std::string& path);

const char* rounding_name(Rounding r);
Rounding rounding_from_name(const std::string& name);

} // namespace xbarmap
