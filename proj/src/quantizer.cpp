#include "xbarmap/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "xbarmap/errors.hpp"

namespace xbarmap {

namespace {

// Round non-negative x to an integer under the given tie rule. The
// fractional part x - floor(x) is exact for the magnitudes seen here
// (x < 2^17), so tie detection is exact.
std::uint64_t round_ties(double x, Rounding r) {
    double f = std::floor(x);
    double frac = x - f;
    auto m = static_cast<std::uint64_t>(f);
    if (frac > 0.5) return m + 1;
    if (frac < 0.5) return m;
    if (r == Rounding::HalfAwayFromZero) return m + 1;
    return (m % 2 == 0) ? m : m + 1;
}

} // namespace

void QuantConfig::validate() const {
    if (n_q < 1 || n_q > 16)
        throw ConfigError("n_q must be in [1, 16], got " + std::to_string(n_q));
    if (s < 1 || s > n_q)
        throw ConfigError("s must be in [1, n_q], got s=" + std::to_string(s) +
                          " n_q=" + std::to_string(n_q));
}

int Codeword::msb_pos(int n_q) const {
    if (mag == 0) return 0;
    return n_q - std::bit_width(mag) + 1;
}

double Codeword::magnitude(int n_q) const {
    return std::ldexp(static_cast<double>(mag), -n_q);
}

bool window_ok(std::uint32_t mag, int s) {
    if (mag == 0) return true;
    return static_cast<int>(std::bit_width(mag >> std::countr_zero(mag))) <= s;
}

double QuantizedTensor::dequantize_at(std::size_t idx) const {
    const Codeword& c = codewords[idx];
    return c.sign * std::ldexp(static_cast<double>(c.mag), scale_exp - config.n_q);
}

int compute_scale(const WeightTensor& tensor, const QuantConfig& config) {
    config.validate();
    tensor.validate();
    double max_abs = 0.0;
    for (double v : tensor.data) max_abs = std::max(max_abs, std::fabs(v));
    if (max_abs == 0.0) return 0;
    const double bound = 1.0 - std::ldexp(1.0, -config.s);
    int e = 0;
    while (std::ldexp(max_abs, -e) > bound) ++e;
    return e;
}

std::uint32_t quantize_magnitude(double abs_scaled, const QuantConfig& config) {
    const double bound = 1.0 - std::ldexp(1.0, -config.s);
    if (!(abs_scaled >= 0.0) || abs_scaled > bound) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "value " << abs_scaled << " outside [0, " << bound << "]";
        throw RangeError(msg.str());
    }
    if (abs_scaled == 0.0) return 0;

    // Octave of the value: 2^-k <= a < 2^-(k-1). Below the LSB the window
    // clamps and the grid degenerates to {0, 2^-n_q}.
    int k = 1;
    while (abs_scaled < std::ldexp(1.0, -k)) ++k;
    k = std::min(k, config.n_q);

    const int j = std::min(config.n_q, k + config.s - 1); // LSB position of the window
    const double on_grid = std::ldexp(abs_scaled, j);     // exact scaling
    const std::uint64_t m = round_ties(on_grid, config.rounding);
    return static_cast<std::uint32_t>(m << (config.n_q - j));
}

Codeword quantize_value(double w_scaled, const QuantConfig& config) {
    config.validate();
    Codeword c;
    c.mag = quantize_magnitude(std::fabs(w_scaled), config);
    c.sign = (w_scaled < 0.0 && c.mag != 0) ? -1 : 1;
    return c;
}

QuantizedTensor quantize_tensor(const WeightTensor& tensor, const QuantConfig& config) {
    config.validate();
    tensor.validate();
    QuantizedTensor qt;
    qt.rows = tensor.rows;
    qt.cols = tensor.cols;
    qt.config = config;
    qt.scale_exp = compute_scale(tensor, config);
    qt.codewords.reserve(tensor.size());
    for (double w : tensor.data)
        qt.codewords.push_back(quantize_value(std::ldexp(w, -qt.scale_exp), config));
    return qt;
}

WeightTensor dequantize(const QuantizedTensor& qt) {
    WeightTensor t;
    t.rows = qt.rows;
    t.cols = qt.cols;
    t.data.resize(qt.size());
    for (std::size_t i = 0; i < qt.size(); ++i) t.data[i] = qt.dequantize_at(i);
    return t;
}

BitSparsityStats bit_sparsity_stats(const QuantizedTensor& qt) {
    const int n_q = qt.config.n_q;
    BitSparsityStats stats;
    stats.bit_density.assign(n_q, 0.0);
    std::vector<std::uint64_t> counts(n_q, 0);
    for (const Codeword& c : qt.codewords) {
        std::uint32_t mag = c.mag;
        while (mag != 0) {
            int low = std::countr_zero(mag);
            ++counts[n_q - 1 - low]; // bit position i has weight 2^-(i)
            mag &= mag - 1;
        }
    }
    const double total = static_cast<double>(qt.size());
    for (int i = 0; i < n_q; ++i) {
        stats.bit_density[i] = total > 0 ? counts[i] / total : 0.0;
        stats.total_ones += counts[i];
    }
    stats.overall_density =
        total > 0 ? static_cast<double>(stats.total_ones) / (total * n_q) : 0.0;
    return stats;
}

double quantization_mse(const WeightTensor& tensor, const QuantizedTensor& qt) {
    if (tensor.rows != qt.rows || tensor.cols != qt.cols)
        throw DimensionError("mse: shape mismatch " + std::to_string(tensor.rows) + "x" +
                             std::to_string(tensor.cols) + " vs " + std::to_string(qt.rows) + "x" +
                             std::to_string(qt.cols));
    double acc = 0.0;
    for (std::size_t i = 0; i < tensor.data.size(); ++i) {
        double diff = tensor.data[i] - qt.dequantize_at(i);
        acc += diff * diff;
    }
    return acc / static_cast<double>(tensor.size());
}

std::vector<SweepRow> sweep_window(const WeightTensor& tensor, int n_q,
                                   const std::vector<int>& s_values, Rounding rounding) {
    std::vector<SweepRow> rows;
    rows.reserve(s_values.size());
    for (int s : s_values) {
        QuantConfig cfg{n_q, s, rounding};
        QuantizedTensor qt = quantize_tensor(tensor, cfg);
        BitSparsityStats stats = bit_sparsity_stats(qt);
        SweepRow row;
        row.s = s;
        row.scale_exp = qt.scale_exp;
        row.mse = quantization_mse(tensor, qt);
        row.overall_sparsity = 1.0 - stats.overall_density;
        row.bit_sparsity.resize(stats.bit_density.size());
        for (std::size_t i = 0; i < stats.bit_density.size(); ++i)
            row.bit_sparsity[i] = 1.0 - stats.bit_density[i];
        row.total_ones = stats.total_ones;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

constexpr char kMagicQ[4] = {'S', 'M', 'E', 'Q'};
constexpr std::uint16_t kVersionQ = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

void save_quantized(const QuantizedTensor& qt, const std::string& path) {
    qt.config.validate();
    if (qt.rows > std::numeric_limits<std::uint32_t>::max() ||
        qt.cols > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError(path + ": dimensions exceed u32");
    const int n_q = qt.config.n_q;
    std::string out;
    const std::size_t n = qt.size();
    out.reserve(22 + n * (1 + n_q));
    out.append(kMagicQ, 4);
    put_u16(out, kVersionQ);
    out.push_back(static_cast<char>(n_q));
    out.push_back(static_cast<char>(qt.config.s));
    out.push_back(static_cast<char>(qt.config.rounding));
    out.push_back(0); // reserved
    put_u32(out, static_cast<std::uint32_t>(qt.scale_exp));
    put_u32(out, static_cast<std::uint32_t>(qt.rows));
    put_u32(out, static_cast<std::uint32_t>(qt.cols));
    for (const Codeword& c : qt.codewords) out.push_back(c.sign < 0 ? 1 : 0);
    for (int i = 1; i <= n_q; ++i)
        for (const Codeword& c : qt.codewords) out.push_back(c.bit(i, n_q) ? 1 : 0);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

QuantizedTensor load_quantized(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    std::string bytes = buf.str();
    if (bytes.size() < 22 || std::memcmp(bytes.data(), kMagicQ, 4) != 0)
        throw FormatError(path + ": not a quantized-tensor file (bad magic at byte 0)");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (get_u16(p + 4) != kVersionQ)
        throw FormatError(path + ": unsupported version at byte 4");
    QuantizedTensor qt;
    qt.config.n_q = p[6];
    qt.config.s = p[7];
    qt.config.rounding = static_cast<Rounding>(p[8]);
    qt.scale_exp = static_cast<std::int32_t>(get_u32(p + 10));
    qt.rows = get_u32(p + 14);
    qt.cols = get_u32(p + 18);
    qt.config.validate();
    if (qt.rows == 0 || qt.cols == 0) throw FormatError(path + ": zero dimension");
    if (qt.rows > std::numeric_limits<std::size_t>::max() / qt.cols)
        throw CapacityError(path + ": dimension product overflows");
    const std::size_t n = qt.rows * qt.cols;
    const int n_q = qt.config.n_q;
    const std::size_t expected = 22 + n * (1 + static_cast<std::size_t>(n_q));
    if (bytes.size() != expected)
        throw FormatError(path + ": payload size mismatch, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
    qt.codewords.assign(n, Codeword{});
    const unsigned char* signs = p + 22;
    for (std::size_t i = 0; i < n; ++i) qt.codewords[i].sign = signs[i] ? -1 : 1;
    for (int i = 1; i <= n_q; ++i) {
        const unsigned char* plane = p + 22 + n * static_cast<std::size_t>(i);
        for (std::size_t idx = 0; idx < n; ++idx)
            if (plane[idx]) qt.codewords[idx].mag |= 1u << (n_q - i);
    }
    for (const Codeword& c : qt.codewords)
        if (!window_ok(c.mag, qt.config.s))
            throw FormatError(path + ": codeword violates the consecutive-1 window");
    return qt;
}

const char* rounding_name(Rounding r) {
    return r == Rounding::HalfAwayFromZero ? "half-away" : "half-even";
}

Rounding rounding_from_name(const std::string& name) {
    if (name == "half-away" || name == "half-away-from-zero") return Rounding::HalfAwayFromZero;
    if (name == "half-even" || name == "half-to-even") return Rounding::HalfToEven;
    throw ConfigError("unknown rounding rule: " + name);
}

} // namespace xbarmap
