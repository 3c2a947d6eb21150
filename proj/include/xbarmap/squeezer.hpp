// squeezer.hpp — bit-wise squeeze-out of sparse MSB crossbars
//
// One squeeze step flags every crossbar row whose XB^1 (current most
// significant plane) holds any nonzero cell, chain-shifts the flagged
// rows one plane deeper, records the content falling out of the last
// plane in the dropped-bit ledger, and removes the now-empty first
// plane. Execution compensates by delaying the flagged rows' bit-serial
// input, one clock per squeezed bit, which doubles their effective
// contribution per bit.
//
// The ledger makes the transform exactly accountable:
//
//   simulate(original) == simulate(squeezed, delayed inputs) + correction
//
// in the fixed-point integer domain, where the correction of an entry
// dropped at step t is sign * a_row * units * 2^(bits shifted before
// step t for that row). Rows are re-flagged every step, so a row first
// flagged late carries a smaller multiplier than 2^(t-1).
//
// With multi-bit cells one step moves a whole cell plane, i.e. cell_bits
// bits at once; that requires n_q to be a multiple of cell_bits.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xbarmap/mapper.hpp"

namespace xbarmap {

struct LedgerEntry {
    std::uint32_t group = 0;
    std::uint32_t row = 0;  // row within the group
    std::uint32_t col = 0;  // column within the group
    int step = 0;           // 1-based squeeze step
    int units = 0;          // dropped integer value in 2^-n_q units
};

struct GroupSqueeze {
    bool applied = true;
    // One mask per step, xb_rows bits each; bit r set = row r was shifted.
    std::vector<std::vector<std::uint8_t>> step_masks;
};

struct SqueezePlan {
    int degree_bits = 0;    // x, total bits squeezed per flagged row per step chain
    int step_bits = 1;      // bits moved per step (1 for SLC, cell_bits for MLC)
    int steps = 0;          // degree_bits / step_bits
    int n_q_before = 0;
    int effective_n_q = 0;  // n_q_before - degree_bits
    std::size_t xb_rows = 0;
    double threshold = 1.0; // groups with flagged fraction above this are left unsqueezed
    std::vector<GroupSqueeze> groups;
    std::vector<LedgerEntry> ledger;

    // Count of steps at which the row was flagged, restricted to steps < upto
    // (pass steps + 1 for the total).
    int flagged_before(std::size_t group, std::size_t row, int upto) const;
    // Total input delay in clocks for a row of a group.
    int shift_bits(std::size_t group, std::size_t row) const;
};

// Bit r set iff XB^1 row r contains any nonzero cell. Sized xb_rows; rows
// beyond the group's used extent stay 0.
std::vector<std::uint8_t> flag_rows(const CrossbarGroup& group, std::size_t xb_rows);

// Squeeze a single group in place by `steps` plane steps, appending masks
// and ledger entries to the plan. Exposed for tests; most callers use
// squeeze_layout.
void squeeze_group(CrossbarGroup& group, std::size_t group_index, int steps,
                   std::size_t xb_rows, SqueezePlan& plan);

// Apply a degree-x squeeze (x in bits) to every group of the layout.
// Groups whose initial flagged-row fraction exceeds `threshold` are left
// untouched (their plan entry records applied = false).
SqueezePlan squeeze_layout(CrossbarLayout& layout, int degree_bits, double threshold = 1.0);

// Exact per-output-column correction, in the pre-scale fixed-point
// integer domain, for the content dropped by the plan.
std::vector<std::int64_t> dropped_correction(const CrossbarLayout& layout,
                                             const SqueezePlan& plan,
                                             const std::vector<std::uint32_t>& act_codes);

void save_plan(const SqueezePlan& plan, const std::string& path);
SqueezePlan load_plan(const std::string& path);

} // namespace xbarmap
