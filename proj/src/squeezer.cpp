#include "xbarmap/squeezer.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "xbarmap/errors.hpp"
#include "xbarmap/report.hpp"

namespace xbarmap {

namespace {

bool mask_bit(const std::vector<std::uint8_t>& mask, std::size_t row) {
    return row < mask.size() && mask[row] != 0;
}

} // namespace

int SqueezePlan::flagged_before(std::size_t group, std::size_t row, int upto) const {
    int count = 0;
    const auto& masks = groups[group].step_masks;
    for (int t = 1; t < upto && t <= static_cast<int>(masks.size()); ++t)
        if (mask_bit(masks[t - 1], row)) ++count;
    return count;
}

int SqueezePlan::shift_bits(std::size_t group, std::size_t row) const {
    return step_bits * flagged_before(group, row, steps + 1);
}

std::vector<std::uint8_t> flag_rows(const CrossbarGroup& group, std::size_t xb_rows) {
    std::vector<std::uint8_t> mask(xb_rows, 0);
    if (group.planes.empty()) return mask;
    const CellPlane& msb = group.planes.front();
    for (std::size_t r = 0; r < group.used_rows; ++r)
        for (std::size_t c = 0; c < group.used_cols; ++c)
            if (msb.cells[r * group.used_cols + c] != 0) {
                mask[r] = 1;
                break;
            }
    return mask;
}

void squeeze_group(CrossbarGroup& group, std::size_t group_index, int steps,
                   std::size_t xb_rows, SqueezePlan& plan) {
    if (plan.groups.size() <= group_index) plan.groups.resize(group_index + 1);
    GroupSqueeze gs;
    for (int step = 1; step <= steps; ++step) {
        std::vector<std::uint8_t> mask = flag_rows(group, xb_rows);
        const std::size_t last = group.planes.size() - 1;
        for (std::size_t r = 0; r < group.used_rows; ++r) {
            if (!mask[r]) continue;
            // Dropped content of the deepest plane goes to the ledger.
            for (std::size_t c = 0; c < group.used_cols; ++c) {
                std::uint8_t v = group.cell(last, r, c);
                if (v != 0)
                    plan.ledger.push_back({static_cast<std::uint32_t>(group_index),
                                           static_cast<std::uint32_t>(r),
                                           static_cast<std::uint32_t>(c), step,
                                           static_cast<int>(v)});
            }
            // Chain shift: plane j -> plane j+1, MSB plane row becomes zero.
            for (std::size_t p = last; p >= 1; --p)
                for (std::size_t c = 0; c < group.used_cols; ++c)
                    group.planes[p].cells[r * group.used_cols + c] = group.cell(p - 1, r, c);
            for (std::size_t c = 0; c < group.used_cols; ++c)
                group.planes[0].cells[r * group.used_cols + c] = 0;
        }
        if (!group.planes.front().empty())
            throw RangeError("squeeze step left a nonzero MSB plane"); // unreachable by construction
        group.planes.erase(group.planes.begin());
        gs.step_masks.push_back(std::move(mask));
    }
    plan.groups[group_index] = std::move(gs);
}

SqueezePlan squeeze_layout(CrossbarLayout& layout, int degree_bits, double threshold) {
    const int n_q = layout.n_q;
    if (degree_bits < 1 || degree_bits >= n_q)
        throw RangeError("squeeze degree must be in [1, n_q), got " +
                         std::to_string(degree_bits));
    if (layout.squeezed_bits != 0)
        throw RangeError("layout is already squeezed by " +
                         std::to_string(layout.squeezed_bits) + " bits");
    if (degree_bits % layout.cell_bits != 0)
        throw RangeError("squeeze degree must be a multiple of cell_bits=" +
                         std::to_string(layout.cell_bits));
    if (layout.cell_bits > 1 && n_q % layout.cell_bits != 0)
        throw RangeError("multi-bit-cell squeeze requires n_q divisible by cell_bits");

    SqueezePlan plan;
    plan.degree_bits = degree_bits;
    plan.step_bits = layout.cell_bits;
    plan.steps = degree_bits / layout.cell_bits;
    plan.n_q_before = n_q;
    plan.effective_n_q = n_q - degree_bits;
    plan.xb_rows = layout.xb_rows;
    plan.threshold = threshold;
    plan.groups.resize(layout.groups.size());

    for (std::size_t g = 0; g < layout.groups.size(); ++g) {
        CrossbarGroup& group = layout.groups[g];
        const std::vector<std::uint8_t> initial = flag_rows(group, layout.xb_rows);
        const std::size_t flagged =
            static_cast<std::size_t>(std::count(initial.begin(), initial.end(), 1));
        const double fraction =
            group.used_rows == 0 ? 0.0 : static_cast<double>(flagged) / group.used_rows;
        if (fraction > threshold) {
            plan.groups[g].applied = false;
            continue;
        }
        squeeze_group(group, g, plan.steps, layout.xb_rows, plan);
    }
    layout.squeezed_bits = degree_bits;
    return plan;
}

std::vector<std::int64_t> dropped_correction(const CrossbarLayout& layout,
                                             const SqueezePlan& plan,
                                             const std::vector<std::uint32_t>& act_codes) {
    if (act_codes.size() != layout.weight_rows)
        throw DimensionError("correction: activation length " + std::to_string(act_codes.size()) +
                             " does not match weight rows " +
                             std::to_string(layout.weight_rows));
    if (plan.groups.size() != layout.groups.size())
        throw DimensionError("correction: plan has " + std::to_string(plan.groups.size()) +
                             " groups, layout has " + std::to_string(layout.groups.size()));
    std::vector<std::int64_t> correction(layout.weight_cols, 0);
    for (const LedgerEntry& e : plan.ledger) {
        const CrossbarGroup& g = layout.groups[e.group];
        const int prior = plan.flagged_before(e.group, e.row, e.step);
        const std::int64_t mult = std::int64_t{1} << (plan.step_bits * prior);
        const std::uint32_t code = act_codes[g.row_offset + e.row];
        correction[g.col_offset + e.col] +=
            g.sign * static_cast<std::int64_t>(code) * mult * e.units;
    }
    return correction;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

std::string mask_to_hex(const std::vector<std::uint8_t>& mask) {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    const std::size_t nbytes = (mask.size() + 7) / 8;
    for (std::size_t b = 0; b < nbytes; ++b) {
        std::uint8_t byte = 0;
        for (std::size_t i = 0; i < 8; ++i) {
            const std::size_t row = b * 8 + i;
            if (row < mask.size() && mask[row]) byte |= static_cast<std::uint8_t>(1u << i);
        }
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xf]);
    }
    return hex;
}

std::vector<std::uint8_t> mask_from_hex(const std::string& hex, std::size_t rows,
                                        const std::string& origin) {
    if (hex.size() != 2 * ((rows + 7) / 8))
        throw FormatError(origin + ": mask hex length " + std::to_string(hex.size()) +
                          " does not match " + std::to_string(rows) + " rows");
    auto nibble = [&](char ch) -> unsigned {
        if (ch >= '0' && ch <= '9') return static_cast<unsigned>(ch - '0');
        if (ch >= 'a' && ch <= 'f') return static_cast<unsigned>(ch - 'a' + 10);
        if (ch >= 'A' && ch <= 'F') return static_cast<unsigned>(ch - 'A' + 10);
        throw FormatError(origin + ": bad hex digit in mask");
    };
    std::vector<std::uint8_t> mask(rows, 0);
    for (std::size_t b = 0; b * 2 + 1 < hex.size(); ++b) {
        const std::uint8_t byte =
            static_cast<std::uint8_t>((nibble(hex[b * 2]) << 4) | nibble(hex[b * 2 + 1]));
        for (std::size_t i = 0; i < 8; ++i) {
            const std::size_t row = b * 8 + i;
            if (row < rows && (byte & (1u << i))) mask[row] = 1;
        }
    }
    return mask;
}

} // namespace

void save_plan(const SqueezePlan& plan, const std::string& path) {
    nlohmann::ordered_json j;
    j["tool_version"] = kToolVersion;
    j["degree_bits"] = plan.degree_bits;
    j["step_bits"] = plan.step_bits;
    j["steps"] = plan.steps;
    j["n_q_before"] = plan.n_q_before;
    j["effective_n_q"] = plan.effective_n_q;
    j["xb_rows"] = plan.xb_rows;
    j["threshold"] = plan.threshold;
    auto groups = nlohmann::ordered_json::array();
    for (const GroupSqueeze& gs : plan.groups) {
        nlohmann::ordered_json g;
        g["applied"] = gs.applied;
        auto masks = nlohmann::ordered_json::array();
        for (const auto& mask : gs.step_masks) masks.push_back(mask_to_hex(mask));
        g["rcmr_masks"] = masks;
        groups.push_back(g);
    }
    j["groups"] = groups;
    auto ledger = nlohmann::ordered_json::array();
    for (const LedgerEntry& e : plan.ledger)
        ledger.push_back(nlohmann::ordered_json{
            {"group", e.group}, {"row", e.row}, {"col", e.col}, {"step", e.step},
            {"units", e.units}});
    j["ledger"] = ledger;
    write_report(j, path);
}

SqueezePlan load_plan(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open file: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    try {
        SqueezePlan plan;
        plan.degree_bits = j.at("degree_bits").get<int>();
        plan.step_bits = j.at("step_bits").get<int>();
        plan.steps = j.at("steps").get<int>();
        plan.n_q_before = j.at("n_q_before").get<int>();
        plan.effective_n_q = j.at("effective_n_q").get<int>();
        plan.xb_rows = j.at("xb_rows").get<std::size_t>();
        plan.threshold = j.at("threshold").get<double>();
        for (const auto& g : j.at("groups")) {
            GroupSqueeze gs;
            gs.applied = g.at("applied").get<bool>();
            for (const auto& hex : g.at("rcmr_masks"))
                gs.step_masks.push_back(
                    mask_from_hex(hex.get<std::string>(), plan.xb_rows, path));
            plan.groups.push_back(std::move(gs));
        }
        for (const auto& e : j.at("ledger"))
            plan.ledger.push_back({e.at("group").get<std::uint32_t>(),
                                   e.at("row").get<std::uint32_t>(),
                                   e.at("col").get<std::uint32_t>(), e.at("step").get<int>(),
                                   e.at("units").get<int>()});
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

} // namespace xbarmap
