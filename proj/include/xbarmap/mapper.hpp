// mapper.hpp — bit-plane slicing and crossbar-group layout
//
// A quantized H x W tensor is sliced into n_q bit planes (one H x W binary
// matrix per bit position), split by sign into a positive and, when any
// weight is negative, a negative plane set. Each plane set is tiled into
// xb_rows x xb_cols crossbars; the stack of crossbars covering one tile is
// a crossbar group. With cell_bits = m > 1, m consecutive bit planes are
// packed MSB-first into one cell plane, so a group holds ceil(n_q / m)
// crossbars. All-zero crossbars are tracked in a positional empty index
// (one bit per group-plane) and need no physical allocation.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbarmap/quantizer.hpp"

namespace xbarmap {

struct BitPlaneSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    int n_q = 0;
    bool has_negative = false;
    // planes[j-1][r*cols + c] = bit b_j of the codeword at (r, c); a weight
    // contributes to pos_planes or neg_planes according to its sign, zeros
    // to neither.
    std::vector<std::vector<std::uint8_t>> pos_planes;
    std::vector<std::vector<std::uint8_t>> neg_planes;
};

// One crossbar worth of cells at a single bit significance.
struct CellPlane {
    int sig_exp = 0; // a cell value v contributes v * 2^sig_exp in 2^-n_q units
    int width = 1;   // bits packed per cell (cell values in [0, 2^width))
    std::vector<std::uint8_t> cells; // used_rows * used_cols; padding is implicit zeros

    bool empty() const;
};

struct CrossbarGroup {
    int sign = 1;               // +1 or -1
    std::size_t row_tile = 0;   // tile indices within the plane
    std::size_t col_tile = 0;
    std::size_t row_offset = 0; // element offsets into the weight matrix
    std::size_t col_offset = 0;
    std::size_t used_rows = 0;  // actual extent (<= crossbar dims)
    std::size_t used_cols = 0;
    std::vector<CellPlane> planes; // XB^1..XB^P, most significant first

    std::uint8_t cell(std::size_t plane, std::size_t r, std::size_t c) const {
        return planes[plane].cells[r * used_cols + c];
    }
};

struct CrossbarCounts {
    std::size_t allocated = 0;
    std::size_t empty = 0;
    std::size_t occupied = 0;
};

struct CrossbarLayout {
    std::size_t xb_rows = 128;
    std::size_t xb_cols = 128;
    int cell_bits = 1;
    int n_q = 0;          // original codeword width (plane significances stay in these units)
    int scale_exp = 0;
    std::size_t weight_rows = 0; // H
    std::size_t weight_cols = 0; // W
    bool has_negative = false;
    int squeezed_bits = 0;
    std::vector<CrossbarGroup> groups;

    std::size_t row_tiles() const { return (weight_rows + xb_rows - 1) / xb_rows; }
    std::size_t col_tiles() const { return (weight_cols + xb_cols - 1) / xb_cols; }
    std::size_t planes_per_group() const {
        return groups.empty() ? 0 : groups.front().planes.size();
    }

    // One bit per (group, plane), bit index g * P + p, packed LSB-first
    // into bytes; a set bit marks an all-zero crossbar.
    std::vector<std::uint8_t> empty_index() const;
    std::string empty_index_hex() const;
};

BitPlaneSet slice_planes(const QuantizedTensor& qt);

CrossbarLayout partition(const BitPlaneSet& planes, std::size_t xb_rows, std::size_t xb_cols,
                         int cell_bits);

// Convenience: slice + partition in one step.
CrossbarLayout map_tensor(const QuantizedTensor& qt, std::size_t xb_rows, std::size_t xb_cols,
                          int cell_bits);

CrossbarCounts crossbar_count(const CrossbarLayout& layout);

// Crossbars needed by intra-crossbar mapping (ceil(n_q / m) adjacent cells
// per weight, no bit-sparsity exploitation):
//   ceil(H / xb_rows) * ceil(W * ceil(n_q / m) / xb_cols) per sign in use.
std::size_t conventional_count(const QuantizedTensor& qt, std::size_t xb_rows,
                               std::size_t xb_cols, int cell_bits);

// Zero cells / total cells over the used extents of all allocated
// crossbars. MLC packing merges bits, so this drops as cell_bits grows.
double sparse_cell_fraction(const CrossbarLayout& layout);

// Binary container for layouts (SMEL); see README for the byte layout.
void save_layout(const CrossbarLayout& layout, const std::string& path);
CrossbarLayout load_layout(const std::string& path);

} // namespace xbarmap
