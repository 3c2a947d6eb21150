// test_util.hpp — shared oracles and fixture builders for the test suites
//
// The quantizer oracle enumerates the representable set R(n_q, s) and does
// a brute-force nearest search; it never calls the production rounding
// path, so the two routes check each other.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xbarmap/mapper.hpp"
#include "xbarmap/quantizer.hpp"
#include "xbarmap/tensor.hpp"

namespace testutil {

// All representable magnitudes of R(n_q, s) in integer units of 2^-n_q,
// sorted ascending, including 0.
inline std::vector<std::uint32_t> enumerate_representable(int n_q, int s) {
    std::vector<std::uint32_t> values{0};
    for (int k = 1; k <= n_q; ++k) {
        const int j = std::min(n_q, k + s - 1);
        const int width = j - k + 1;
        for (std::uint32_t v = 1u << (width - 1); v < (1u << width); ++v)
            values.push_back(v << (n_q - j));
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

// Brute-force nearest element of R(n_q, s) to a >= 0, ties resolved on the
// local grid (adjacent representables are multiples of their gap).
inline std::uint32_t nearest_representable(double a, int n_q, int s, xbarmap::Rounding rounding) {
    const auto values = enumerate_representable(n_q, s);
    std::uint32_t best = values[0];
    double best_dist = std::fabs(a - std::ldexp(double(values[0]), -n_q));
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double dist = std::fabs(a - std::ldexp(double(values[i]), -n_q));
        if (dist < best_dist) {
            best = values[i];
            best_dist = dist;
        } else if (dist == best_dist) {
            // Tie between adjacent points values[i-1] (= best) and values[i].
            const std::uint32_t gap = values[i] - best;
            const std::uint32_t multiple = best / gap;
            if (rounding == xbarmap::Rounding::HalfAwayFromZero)
                best = values[i];
            else if (multiple % 2 != 0)
                best = values[i]; // half-to-even keeps the even multiple
        }
    }
    return best;
}

// Builds a quantized tensor directly from signed integer magnitudes (units
// of 2^-n_q), bypassing the quantizer.
inline xbarmap::QuantizedTensor make_qt(std::size_t rows, std::size_t cols, int n_q, int s,
                                        const std::vector<int>& units, int scale_exp = 0) {
    xbarmap::QuantizedTensor qt;
    qt.rows = rows;
    qt.cols = cols;
    qt.config = {n_q, s, xbarmap::Rounding::HalfAwayFromZero};
    qt.scale_exp = scale_exp;
    for (int u : units) {
        xbarmap::Codeword c;
        c.sign = u < 0 ? -1 : 1;
        c.mag = static_cast<std::uint32_t>(u < 0 ? -u : u);
        qt.codewords.push_back(c);
    }
    return qt;
}

// Random quantized tensor whose codewords are drawn uniformly from
// R(n_q, s), with optional negative signs.
inline xbarmap::QuantizedTensor random_qt(std::size_t rows, std::size_t cols, int n_q, int s,
                                          bool negatives, std::mt19937_64& rng,
                                          int scale_exp = 0) {
    const auto values = enumerate_representable(n_q, s);
    std::vector<int> units;
    units.reserve(rows * cols);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        int u = static_cast<int>(values[rng() % values.size()]);
        if (negatives && (rng() & 1)) u = -u;
        units.push_back(u);
    }
    return make_qt(rows, cols, n_q, s, units, scale_exp);
}

inline std::vector<std::uint32_t> random_codes(std::size_t n, int n_a, std::mt19937_64& rng) {
    std::vector<std::uint32_t> codes(n);
    for (auto& c : codes) c = static_cast<std::uint32_t>(rng() % (1u << n_a));
    return codes;
}

// Weight matrix reassembled from a layout's cell planes, in signed integer
// units of 2^-n_q. Verifies nothing itself; callers compare against the
// quantized tensor.
inline std::vector<std::int64_t> reassemble_units(const xbarmap::CrossbarLayout& layout) {
    std::vector<std::int64_t> units(layout.weight_rows * layout.weight_cols, 0);
    for (const xbarmap::CrossbarGroup& g : layout.groups)
        for (const xbarmap::CellPlane& p : g.planes)
            for (std::size_t r = 0; r < g.used_rows; ++r)
                for (std::size_t c = 0; c < g.used_cols; ++c) {
                    const std::size_t idx =
                        (g.row_offset + r) * layout.weight_cols + (g.col_offset + c);
                    units[idx] += static_cast<std::int64_t>(g.sign) *
                                  (std::int64_t{p.cells[r * g.used_cols + c]} << p.sig_exp);
                }
    return units;
}

} // namespace testutil
