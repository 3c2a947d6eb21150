#include "xbarmap/cost.hpp"

#include <fstream>

#include "json.hpp"
#include "xbarmap/errors.hpp"

namespace xbarmap {

void CostConfig::validate() const {
    const struct {
        const char* name;
        double value;
    } fields[] = {
        {"energy_per_cell_op", energy_per_cell_op},
        {"energy_per_adc_conversion", energy_per_adc_conversion},
        {"energy_per_register_bit", energy_per_register_bit},
        {"area_per_crossbar", area_per_crossbar},
        {"area_per_adc", area_per_adc},
        {"area_per_buffer_kb", area_per_buffer_kb},
    };
    for (const auto& f : fields)
        if (f.value < 0.0)
            throw ConfigError(std::string("cost unit '") + f.name + "' must be >= 0");
}

CostConfig load_cost_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    CostConfig cfg;
    auto fetch = [&](const char* name) -> double {
        if (!j.contains(name))
            throw ConfigError(path + ": missing cost unit '" + name + "'");
        if (!j[name].is_number())
            throw ConfigError(path + ": cost unit '" + std::string(name) + "' must be a number");
        return j[name].get<double>();
    };
    cfg.energy_per_cell_op = fetch("energy_per_cell_op");
    cfg.energy_per_adc_conversion = fetch("energy_per_adc_conversion");
    cfg.energy_per_register_bit = fetch("energy_per_register_bit");
    cfg.area_per_crossbar = fetch("area_per_crossbar");
    cfg.area_per_adc = fetch("area_per_adc");
    cfg.area_per_buffer_kb = fetch("area_per_buffer_kb");
    cfg.validate();
    return cfg;
}

std::uint64_t index_overhead(const CrossbarLayout& layout, const SqueezePlan* plan) {
    // The positional index is sized at design time: one bit per group for
    // every cell plane of the unsqueezed codeword, independent of content.
    const std::uint64_t planes =
        static_cast<std::uint64_t>((layout.n_q + layout.cell_bits - 1) / layout.cell_bits);
    std::uint64_t bits = planes * layout.groups.size();
    if (plan != nullptr)
        for (const GroupSqueeze& gs : plan->groups)
            bits += static_cast<std::uint64_t>(gs.step_masks.size()) * plan->xb_rows;
    return bits;
}

CostReport estimate_cost(const CrossbarLayout& layout, const SqueezePlan* plan,
                         const SimResult& result, const CostConfig& config) {
    config.validate();
    CostReport report;
    report.index_bits = index_overhead(layout, plan);
    report.occupied_crossbars = crossbar_count(layout).occupied;
    report.adc_count = report.occupied_crossbars;
    report.op_count = result.op_count;
    report.adc_conversions = result.adc_conversions;

    report.energy_crossbar = static_cast<double>(result.op_count) * config.energy_per_cell_op;
    report.energy_adc =
        static_cast<double>(result.adc_conversions) * config.energy_per_adc_conversion;
    report.energy_register =
        static_cast<double>(report.index_bits) * config.energy_per_register_bit;
    report.energy_total = report.energy_crossbar + report.energy_adc + report.energy_register;

    report.area_crossbar =
        static_cast<double>(report.occupied_crossbars) * config.area_per_crossbar;
    report.area_adc = static_cast<double>(report.adc_count) * config.area_per_adc;
    const double buffer_kb = static_cast<double>(report.index_bits) / 8192.0;
    report.area_buffer = buffer_kb * config.area_per_buffer_kb;
    report.area_total = report.area_crossbar + report.area_adc + report.area_buffer;
    return report;
}

} // namespace xbarmap
