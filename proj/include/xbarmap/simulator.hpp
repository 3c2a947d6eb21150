// simulator.hpp — digital-equivalent model of the bit-serial crossbar datapath
//
// Activations are presented LSB-first, one bit per cycle, over
// n_a + squeezed_bits cycles. Each cycle every occupied crossbar forms
// per-column sums of cell * input-bit products; a per-plane shifter
// weights the sum by the plane significance, the accumulator adds planes,
// and a shift-add unit folds cycles together with weight 2^t. Squeezed
// rows enter delayed by their shift count, which multiplies their
// contribution by 2^shift. All arithmetic is exact 64-bit integer; the
// optional ADC mode saturates each per-plane column sum to B bits before
// digital accumulation.
//
// The integer output domain is activation codes times weight magnitudes
// in 2^-n_q units; real outputs apply act_scale * 2^(scale_exp - n_q).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xbarmap/mapper.hpp"
#include "xbarmap/squeezer.hpp"
#include "xbarmap/tensor.hpp"

namespace xbarmap {

struct AdcConfig {
    bool ideal = true;
    int bits = 0; // used when !ideal; sums saturate at 2^bits - 1
};

struct SimOptions {
    int n_a = 8;
    AdcConfig adc;
    bool skip_empty = true; // skip empty-indexed crossbars (op count only; outputs unchanged)
    bool trace = false;
};

struct TraceRow {
    std::size_t group = 0;
    int cycle = 0;
    std::size_t plane = 0;
    std::size_t column = 0; // global output column
    std::int64_t sum = 0;   // raw column sum before the plane shifter
};

struct SimResult {
    std::vector<std::int64_t> outputs_int; // per output column, pre-scale integer domain
    std::vector<double> outputs_real;
    int cycle_count = 0;
    std::int64_t op_count = 0;
    std::int64_t adc_conversions = 0;
    int scale_exp = 0;
    double act_scale = 0.0;
    int n_q = 0; // unit exponent: real = int * act_scale * 2^(scale_exp - n_q)
    std::vector<TraceRow> trace;
};

struct QuantizedActivations {
    std::vector<std::uint32_t> codes;
    double scale = 0.0; // max / (2^n_a - 1); zero vector -> 0
};

// Unsigned n_a-bit fixed point, codes = round(value / scale), half away
// from zero. Values must be finite and >= 0.
QuantizedActivations quantize_activations(const ActivationVector& act, int n_a);

// Per-row input delays in clocks for one group (all zero without a plan).
std::vector<int> input_delays(const CrossbarGroup& group, const SqueezePlan* plan,
                              std::size_t group_index);

// Column accumulations of a single group (unsigned, before the sign merge).
// codes are the activation codes for the group's rows.
std::vector<std::int64_t> simulate_group(const CrossbarGroup& group,
                                         const std::vector<std::uint32_t>& codes,
                                         const std::vector<int>& delays, int cycles,
                                         const AdcConfig& adc);

// Full layer execution: schedules inputs (with delays from the plan when
// present), simulates every crossbar, skips empty-indexed ones, merges
// positive minus negative planes, and applies scales.
SimResult simulate_layer(const CrossbarLayout& layout, const SqueezePlan* plan,
                         const ActivationVector& act, const SimOptions& options);

// Same, with already-quantized activation codes.
SimResult simulate_layer_codes(const CrossbarLayout& layout, const SqueezePlan* plan,
                               const std::vector<std::uint32_t>& codes, double act_scale,
                               const SimOptions& options);

// Ground-truth fixed-point VMM computed directly from the quantized
// tensor, independent of the layout/plane path.
std::vector<std::int64_t> oracle_vmm(const QuantizedTensor& qt,
                                     const std::vector<std::uint32_t>& act_codes);

struct OpCounts {
    std::int64_t op_count = 0;        // driven cells x cycles over simulated crossbars
    std::int64_t adc_conversions = 0; // one per column per cycle per simulated crossbar
};

// Closed-form op accounting for a layout at a given cycle count; matches
// what simulate_layer reports.
OpCounts count_ops(const CrossbarLayout& layout, int cycles, bool skip_empty);

} // namespace xbarmap
