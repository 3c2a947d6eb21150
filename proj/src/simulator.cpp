#include "xbarmap/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "xbarmap/errors.hpp"

namespace xbarmap {

QuantizedActivations quantize_activations(const ActivationVector& act, int n_a) {
    if (n_a < 1 || n_a > 16) throw ConfigError("n_a must be in [1, 16], got " + std::to_string(n_a));
    act.validate();
    QuantizedActivations out;
    out.codes.assign(act.size(), 0);
    double max_val = 0.0;
    for (double v : act.data) max_val = std::max(max_val, v);
    if (max_val == 0.0) return out; // scale 0, all codes 0
    const double levels = static_cast<double>((1u << n_a) - 1);
    out.scale = max_val / levels;
    for (std::size_t i = 0; i < act.size(); ++i) {
        // v/max is exact 1.0 at the maximum, so the top code is always hit.
        double x = (act.data[i] / max_val) * levels;
        out.codes[i] = static_cast<std::uint32_t>(std::llround(x)); // llround = half away from zero
    }
    return out;
}

std::vector<int> input_delays(const CrossbarGroup& group, const SqueezePlan* plan,
                              std::size_t group_index) {
    std::vector<int> delays(group.used_rows, 0);
    if (plan == nullptr) return delays;
    for (std::size_t r = 0; r < group.used_rows; ++r)
        delays[r] = plan->shift_bits(group_index, r);
    return delays;
}

std::vector<std::int64_t> simulate_group(const CrossbarGroup& group,
                                         const std::vector<std::uint32_t>& codes,
                                         const std::vector<int>& delays, int cycles,
                                         const AdcConfig& adc) {
    if (codes.size() != group.used_rows || delays.size() != group.used_rows)
        throw DimensionError("simulate_group: schedule rows " + std::to_string(codes.size()) +
                             " do not match group rows " + std::to_string(group.used_rows));
    std::vector<std::int64_t> acc(group.used_cols, 0);
    const std::int64_t adc_max = adc.ideal ? 0 : (std::int64_t{1} << adc.bits) - 1;
    std::vector<std::int64_t> col_sum(group.used_cols);
    for (int t = 0; t < cycles; ++t) {
        for (const CellPlane& plane : group.planes) {
            std::fill(col_sum.begin(), col_sum.end(), 0);
            for (std::size_t r = 0; r < group.used_rows; ++r) {
                const int bit_idx = t - delays[r];
                if (bit_idx < 0 || bit_idx >= 32) continue;
                if (((codes[r] >> bit_idx) & 1u) == 0) continue;
                const std::uint8_t* row = plane.cells.data() + r * group.used_cols;
                for (std::size_t c = 0; c < group.used_cols; ++c) col_sum[c] += row[c];
            }
            for (std::size_t c = 0; c < group.used_cols; ++c) {
                std::int64_t s = col_sum[c];
                if (!adc.ideal && s > adc_max) s = adc_max;
                acc[c] += (s << plane.sig_exp) << t;
            }
        }
    }
    return acc;
}

SimResult simulate_layer_codes(const CrossbarLayout& layout, const SqueezePlan* plan,
                               const std::vector<std::uint32_t>& codes, double act_scale,
                               const SimOptions& options) {
    if (codes.size() != layout.weight_rows)
        throw DimensionError("simulate: activation length " + std::to_string(codes.size()) +
                             " does not match layer rows " + std::to_string(layout.weight_rows));
    if (layout.squeezed_bits > 0 && plan == nullptr)
        throw ConfigError("layout is squeezed by " + std::to_string(layout.squeezed_bits) +
                          " bits; a squeeze plan is required");
    if (plan != nullptr) {
        if (plan->groups.size() != layout.groups.size())
            throw DimensionError("plan has " + std::to_string(plan->groups.size()) +
                                 " groups, layout has " + std::to_string(layout.groups.size()));
        if (plan->degree_bits != layout.squeezed_bits)
            throw ConfigError("plan degree " + std::to_string(plan->degree_bits) +
                              " does not match layout squeezed bits " +
                              std::to_string(layout.squeezed_bits));
    }

    SimResult result;
    result.n_q = layout.n_q;
    result.scale_exp = layout.scale_exp;
    result.act_scale = act_scale;
    result.cycle_count = options.n_a + layout.squeezed_bits;
    result.outputs_int.assign(layout.weight_cols, 0);

    std::vector<std::uint32_t> group_codes;
    for (std::size_t g = 0; g < layout.groups.size(); ++g) {
        const CrossbarGroup& group = layout.groups[g];
        group_codes.assign(codes.begin() + group.row_offset,
                           codes.begin() + group.row_offset + group.used_rows);
        const std::vector<int> delays = input_delays(group, plan, g);

        // Drop empty-indexed crossbars from the simulated group; they
        // contribute nothing, so outputs are unchanged and only the op
        // accounting moves.
        CrossbarGroup active = group;
        if (options.skip_empty)
            std::erase_if(active.planes, [](const CellPlane& p) { return p.empty(); });
        const std::int64_t planes = static_cast<std::int64_t>(active.planes.size());
        result.op_count += static_cast<std::int64_t>(result.cycle_count) * group.used_rows *
                           group.used_cols * planes;
        result.adc_conversions +=
            static_cast<std::int64_t>(result.cycle_count) * group.used_cols * planes;

        std::vector<std::int64_t> acc =
            simulate_group(active, group_codes, delays, result.cycle_count, options.adc);
        for (std::size_t c = 0; c < group.used_cols; ++c)
            result.outputs_int[group.col_offset + c] += group.sign * acc[c];

        if (options.trace) {
            // Re-run per plane to log raw column sums (kept out of the hot path).
            for (std::size_t p = 0; p < active.planes.size(); ++p) {
                for (int t = 0; t < result.cycle_count; ++t) {
                    for (std::size_t c = 0; c < group.used_cols; ++c) {
                        std::int64_t s = 0;
                        for (std::size_t r = 0; r < group.used_rows; ++r) {
                            const int bit_idx = t - delays[r];
                            if (bit_idx < 0 || bit_idx >= 32) continue;
                            if ((group_codes[r] >> bit_idx) & 1u)
                                s += active.planes[p].cells[r * group.used_cols + c];
                        }
                        result.trace.push_back({g, t, p, group.col_offset + c, s});
                    }
                }
            }
        }
    }

    result.outputs_real.resize(layout.weight_cols);
    const double unit = std::ldexp(act_scale, layout.scale_exp - layout.n_q);
    for (std::size_t c = 0; c < layout.weight_cols; ++c)
        result.outputs_real[c] = static_cast<double>(result.outputs_int[c]) * unit;
    return result;
}

SimResult simulate_layer(const CrossbarLayout& layout, const SqueezePlan* plan,
                         const ActivationVector& act, const SimOptions& options) {
    QuantizedActivations qa = quantize_activations(act, options.n_a);
    return simulate_layer_codes(layout, plan, qa.codes, qa.scale, options);
}

OpCounts count_ops(const CrossbarLayout& layout, int cycles, bool skip_empty) {
    OpCounts counts;
    for (const CrossbarGroup& g : layout.groups) {
        std::int64_t planes = 0;
        for (const CellPlane& p : g.planes)
            if (!skip_empty || !p.empty()) ++planes;
        counts.op_count +=
            static_cast<std::int64_t>(cycles) * g.used_rows * g.used_cols * planes;
        counts.adc_conversions += static_cast<std::int64_t>(cycles) * g.used_cols * planes;
    }
    return counts;
}

std::vector<std::int64_t> oracle_vmm(const QuantizedTensor& qt,
                                     const std::vector<std::uint32_t>& act_codes) {
    if (act_codes.size() != qt.rows)
        throw DimensionError("oracle: activation length " + std::to_string(act_codes.size()) +
                             " does not match tensor rows " + std::to_string(qt.rows));
    std::vector<std::int64_t> out(qt.cols, 0);
    for (std::size_t r = 0; r < qt.rows; ++r) {
        const std::int64_t a = act_codes[r];
        if (a == 0) continue;
        for (std::size_t c = 0; c < qt.cols; ++c) {
            const Codeword& w = qt.at(r, c);
            out[c] += a * w.sign * static_cast<std::int64_t>(w.mag);
        }
    }
    return out;
}

} // namespace xbarmap
