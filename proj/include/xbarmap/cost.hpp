// cost.hpp — index-overhead accounting and parameterized energy/area estimates
#pragma once

#include <cstdint>
#include <string>

#include "xbarmap/mapper.hpp"
#include "xbarmap/simulator.hpp"
#include "xbarmap/squeezer.hpp"

namespace xbarmap {

// Unit costs are user-supplied; the bundled defaults are illustrative
// placeholders, not measured values.
struct CostConfig {
    double energy_per_cell_op = 0.0;        // per crossbar cell per cycle
    double energy_per_adc_conversion = 0.0; // per column sample
    double energy_per_register_bit = 0.0;   // per index/mask bit held
    double area_per_crossbar = 0.0;
    double area_per_adc = 0.0;
    double area_per_buffer_kb = 0.0;

    void validate() const; // all >= 0
};

CostConfig load_cost_config(const std::string& path);

// Empty-crossbar index bits (one per group-plane) plus RCMR mask bits
// (xb_rows per step for every squeezed group). Deterministic closed form.
std::uint64_t index_overhead(const CrossbarLayout& layout, const SqueezePlan* plan);

struct CostReport {
    std::uint64_t index_bits = 0;
    std::size_t occupied_crossbars = 0;
    std::size_t adc_count = 0; // one per occupied crossbar
    std::int64_t op_count = 0;
    std::int64_t adc_conversions = 0;
    double energy_crossbar = 0.0;
    double energy_adc = 0.0;
    double energy_register = 0.0;
    double energy_total = 0.0;
    double area_crossbar = 0.0;
    double area_adc = 0.0;
    double area_buffer = 0.0;
    double area_total = 0.0;
};

// Linear combination of the counts with the unit costs; no hidden
// constants beyond the config.
CostReport estimate_cost(const CrossbarLayout& layout, const SqueezePlan* plan,
                         const SimResult& result, const CostConfig& config);

} // namespace xbarmap
