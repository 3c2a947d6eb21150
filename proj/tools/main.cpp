// main.cpp — command-line front end chaining the mapping pipeline
//
// Subcommands: gen, quantize, map, squeeze, simulate, stats, sweep, cost,
// compare. Each is a pure function from input files + flags to output
// files. Exit codes: 0 success, 1 usage error, 2 data error.
#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xbarmap/cost.hpp"
#include "xbarmap/errors.hpp"
#include "xbarmap/mapper.hpp"
#include "xbarmap/quantizer.hpp"
#include "xbarmap/report.hpp"
#include "xbarmap/simulator.hpp"
#include "xbarmap/squeezer.hpp"
#include "xbarmap/synth.hpp"
#include "xbarmap/tensor.hpp"

namespace {

using nlohmann::ordered_json;
using namespace xbarmap;

struct XbDims {
    std::size_t rows = 128;
    std::size_t cols = 128;
};

XbDims parse_xb(const std::string& spec) {
    const auto x = spec.find('x');
    if (x == std::string::npos)
        throw ConfigError("--xb expects ROWSxCOLS, e.g. 128x128, got '" + spec + "'");
    try {
        XbDims dims;
        dims.rows = std::stoul(spec.substr(0, x));
        dims.cols = std::stoul(spec.substr(x + 1));
        if (dims.rows < 1 || dims.cols < 1) throw std::invalid_argument("zero");
        return dims;
    } catch (const std::exception&) {
        throw ConfigError("--xb expects ROWSxCOLS, e.g. 128x128, got '" + spec + "'");
    }
}

// "3", "1..6", or "1,3,5"
std::vector<int> parse_s_range(const std::string& spec, int n_q) {
    std::vector<int> values;
    const auto dots = spec.find("..");
    try {
        if (dots != std::string::npos) {
            const int lo = std::stoi(spec.substr(0, dots));
            const int hi = std::stoi(spec.substr(dots + 2));
            if (lo > hi) throw std::invalid_argument("empty range");
            for (int s = lo; s <= hi; ++s) values.push_back(s);
        } else if (spec.find(',') != std::string::npos) {
            std::size_t start = 0;
            while (start <= spec.size()) {
                const auto comma = spec.find(',', start);
                const std::string tok =
                    spec.substr(start, comma == std::string::npos ? std::string::npos
                                                                  : comma - start);
                values.push_back(std::stoi(tok));
                if (comma == std::string::npos) break;
                start = comma + 1;
            }
        } else {
            values.push_back(std::stoi(spec));
        }
    } catch (const std::exception&) {
        throw ConfigError("--s expects N, N..M, or a comma list, got '" + spec + "'");
    }
    for (int s : values)
        if (s < 1 || s > n_q)
            throw ConfigError("window size " + std::to_string(s) + " outside [1, n_q=" +
                              std::to_string(n_q) + "]");
    return values;
}

AdcConfig parse_adc(const std::string& spec) {
    AdcConfig adc;
    if (spec == "ideal") return adc;
    try {
        adc.bits = std::stoi(spec);
        if (adc.bits < 1 || adc.bits > 31) throw std::invalid_argument("range");
    } catch (const std::exception&) {
        throw ConfigError("--adc expects 'ideal' or a bit count, got '" + spec + "'");
    }
    adc.ideal = false;
    return adc;
}

ordered_json stats_json(const QuantizedTensor& qt) {
    const BitSparsityStats stats = bit_sparsity_stats(qt);
    ordered_json j;
    j["n_q"] = qt.config.n_q;
    j["s"] = qt.config.s;
    j["rounding"] = rounding_name(qt.config.rounding);
    j["rows"] = qt.rows;
    j["cols"] = qt.cols;
    j["scale_exp"] = qt.scale_exp;
    j["bit_density"] = stats.bit_density;
    j["overall_density"] = stats.overall_density;
    j["overall_sparsity"] = 1.0 - stats.overall_density;
    j["total_ones"] = stats.total_ones;
    return j;
}

int cmd_gen(const std::string& out, std::size_t rows, std::size_t cols, const std::string& dist,
            double mean, double stddev, double lo, double hi, std::uint64_t seed) {
    WeightTensor t;
    if (dist == "normal")
        t = synth_normal_tensor(rows, cols, mean, stddev, seed);
    else if (dist == "uniform")
        t = synth_uniform_tensor(rows, cols, lo, hi, seed);
    else
        throw ConfigError("--dist must be normal or uniform, got '" + dist + "'");
    save_tensor(t, out);
    return 0;
}

int cmd_quantize(const std::string& in, int n_q, const std::string& s_spec,
                 const std::string& rounding, const std::string& out,
                 const std::string& stats_path) {
    const WeightTensor tensor = load_tensor(in);
    const auto s_values = parse_s_range(s_spec, n_q);
    if (s_values.size() != 1) throw ConfigError("quantize expects a single --s value");
    QuantConfig cfg{n_q, s_values[0], rounding_from_name(rounding)};
    const QuantizedTensor qt = quantize_tensor(tensor, cfg);
    save_quantized(qt, out);
    if (!stats_path.empty()) {
        ordered_json j;
        j["tool_version"] = kToolVersion;
        j["input"] = in;
        ordered_json s = stats_json(qt);
        s["mse"] = quantization_mse(tensor, qt);
        j.update(s);
        write_report(j, stats_path);
    }
    return 0;
}

int cmd_map(const std::string& in, const std::string& xb_spec, int cell_bits,
            const std::string& out, const std::string& summary_path) {
    const QuantizedTensor qt = load_quantized(in);
    const XbDims xb = parse_xb(xb_spec);
    const CrossbarLayout layout = map_tensor(qt, xb.rows, xb.cols, cell_bits);
    save_layout(layout, out);
    if (!summary_path.empty()) {
        const CrossbarCounts counts = crossbar_count(layout);
        ordered_json j;
        j["tool_version"] = kToolVersion;
        j["input"] = in;
        j["xb_rows"] = layout.xb_rows;
        j["xb_cols"] = layout.xb_cols;
        j["cell_bits"] = layout.cell_bits;
        j["n_q"] = layout.n_q;
        j["scale_exp"] = layout.scale_exp;
        j["weight_rows"] = layout.weight_rows;
        j["weight_cols"] = layout.weight_cols;
        j["has_negative"] = layout.has_negative;
        j["groups"] = layout.groups.size();
        j["planes_per_group"] = layout.planes_per_group();
        j["allocated"] = counts.allocated;
        j["empty"] = counts.empty;
        j["occupied"] = counts.occupied;
        j["empty_index_hex"] = layout.empty_index_hex();
        write_report(j, summary_path);
    }
    return 0;
}

int cmd_squeeze(const std::string& in, int degree, double threshold,
                const std::string& plan_path, const std::string& out) {
    CrossbarLayout layout = load_layout(in);
    const SqueezePlan plan = squeeze_layout(layout, degree, threshold);
    save_layout(layout, out);
    if (!plan_path.empty()) save_plan(plan, plan_path);
    return 0;
}

int cmd_simulate(const std::string& layout_path, const std::string& plan_path,
                 const std::string& act_path, int n_a, const std::string& adc_spec,
                 bool no_skip_empty, const std::string& out, const std::string& trace_path) {
    const CrossbarLayout layout = load_layout(layout_path);
    SqueezePlan plan;
    const bool have_plan = !plan_path.empty();
    if (have_plan) plan = load_plan(plan_path);
    const ActivationVector act = load_activations(act_path);
    if (act.size() != layout.weight_rows)
        throw DimensionError("simulate: activation length " + std::to_string(act.size()) +
                             " does not match layer rows " +
                             std::to_string(layout.weight_rows));
    SimOptions options;
    options.n_a = n_a;
    options.adc = parse_adc(adc_spec);
    options.skip_empty = !no_skip_empty;
    options.trace = !trace_path.empty();
    const SimResult result =
        simulate_layer(layout, have_plan ? &plan : nullptr, act, options);

    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["layout"] = layout_path;
    j["plan"] = have_plan ? ordered_json(plan_path) : ordered_json(nullptr);
    j["n_a"] = n_a;
    j["adc"] = adc_spec;
    j["skip_empty"] = options.skip_empty;
    j["cycle_count"] = result.cycle_count;
    j["op_count"] = result.op_count;
    j["adc_conversions"] = result.adc_conversions;
    j["scale_exp"] = result.scale_exp;
    j["act_scale"] = result.act_scale;
    j["n_q"] = result.n_q;
    j["outputs_int"] = result.outputs_int;
    j["outputs_real"] = result.outputs_real;
    write_report(j, out);

    if (!trace_path.empty()) {
        std::string csv = "cycle,plane,column,sum\n";
        for (const TraceRow& row : result.trace)
            csv += std::to_string(row.cycle) + "," + std::to_string(row.plane) + "," +
                   std::to_string(row.column) + "," + std::to_string(row.sum) + "\n";
        write_text_file(csv, trace_path);
    }
    return 0;
}

int cmd_stats(const std::string& in, const std::string& out) {
    const QuantizedTensor qt = load_quantized(in);
    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["input"] = in;
    j.update(stats_json(qt));
    write_report(j, out);
    return 0;
}

int cmd_sweep(const std::string& in, int n_q, const std::string& s_spec,
              const std::string& rounding, const std::string& out) {
    const WeightTensor tensor = load_tensor(in);
    const auto s_values = parse_s_range(s_spec, n_q);
    const auto rows = sweep_window(tensor, n_q, s_values, rounding_from_name(rounding));
    std::string csv = "s,scale_exp,mse,overall_sparsity,total_ones";
    for (int i = 1; i <= n_q; ++i) csv += ",bit_sparsity_" + std::to_string(i);
    csv += "\n";
    for (const SweepRow& row : rows) {
        csv += std::to_string(row.s) + "," + std::to_string(row.scale_exp) + "," +
               format_double(row.mse) + "," + format_double(row.overall_sparsity) + "," +
               std::to_string(row.total_ones);
        for (double v : row.bit_sparsity) csv += "," + format_double(v);
        csv += "\n";
    }
    write_text_file(csv, out);
    return 0;
}

int cmd_cost(const std::string& layout_path, const std::string& plan_path,
             const std::string& config_path, int n_a, const std::string& out) {
    const CrossbarLayout layout = load_layout(layout_path);
    SqueezePlan plan;
    const bool have_plan = !plan_path.empty();
    if (have_plan) plan = load_plan(plan_path);
    const CostConfig config = load_cost_config(config_path);

    SimResult counts;
    counts.cycle_count = n_a + layout.squeezed_bits;
    const OpCounts ops = count_ops(layout, counts.cycle_count, /*skip_empty=*/true);
    counts.op_count = ops.op_count;
    counts.adc_conversions = ops.adc_conversions;
    const CostReport report = estimate_cost(layout, have_plan ? &plan : nullptr, counts, config);

    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["layout"] = layout_path;
    j["plan"] = have_plan ? ordered_json(plan_path) : ordered_json(nullptr);
    j["n_a"] = n_a;
    j["cycle_count"] = counts.cycle_count;
    ordered_json cfg;
    cfg["energy_per_cell_op"] = config.energy_per_cell_op;
    cfg["energy_per_adc_conversion"] = config.energy_per_adc_conversion;
    cfg["energy_per_register_bit"] = config.energy_per_register_bit;
    cfg["area_per_crossbar"] = config.area_per_crossbar;
    cfg["area_per_adc"] = config.area_per_adc;
    cfg["area_per_buffer_kb"] = config.area_per_buffer_kb;
    j["config"] = cfg;
    j["index_bits"] = report.index_bits;
    j["occupied_crossbars"] = report.occupied_crossbars;
    j["adc_count"] = report.adc_count;
    j["op_count"] = report.op_count;
    j["adc_conversions"] = report.adc_conversions;
    j["energy"] = ordered_json{{"crossbar", report.energy_crossbar},
                               {"adc", report.energy_adc},
                               {"register", report.energy_register},
                               {"total", report.energy_total}};
    j["area"] = ordered_json{{"crossbar", report.area_crossbar},
                             {"adc", report.area_adc},
                             {"buffer", report.area_buffer},
                             {"total", report.area_total}};
    write_report(j, out);
    return 0;
}

int cmd_compare(const std::string& in, int n_q, const std::string& s_spec,
                const std::string& xb_spec, int cell_bits, const std::string& out) {
    const WeightTensor tensor = load_tensor(in);
    const auto s_values = parse_s_range(s_spec, n_q);
    if (s_values.size() != 1) throw ConfigError("compare expects a single --s value");
    const XbDims xb = parse_xb(xb_spec);
    QuantConfig cfg{n_q, s_values[0], Rounding::HalfAwayFromZero};
    const QuantizedTensor qt = quantize_tensor(tensor, cfg);
    const CrossbarLayout layout = map_tensor(qt, xb.rows, xb.cols, cell_bits);
    const CrossbarCounts counts = crossbar_count(layout);
    const std::size_t conventional = conventional_count(qt, xb.rows, xb.cols, cell_bits);

    ordered_json j;
    j["tool_version"] = kToolVersion;
    j["input"] = in;
    j["n_q"] = n_q;
    j["s"] = s_values[0];
    j["xb_rows"] = xb.rows;
    j["xb_cols"] = xb.cols;
    j["cell_bits"] = cell_bits;
    j["rows"] = tensor.rows;
    j["cols"] = tensor.cols;
    j["scale_exp"] = qt.scale_exp;
    j["sme"] = ordered_json{{"allocated", counts.allocated},
                            {"empty", counts.empty},
                            {"occupied", counts.occupied}};
    j["conventional"] = conventional;
    j["crossbars_saved"] = static_cast<std::int64_t>(conventional) -
                           static_cast<std::int64_t>(counts.occupied);
    j["savings_ratio"] =
        conventional == 0
            ? 0.0
            : 1.0 - static_cast<double>(counts.occupied) / static_cast<double>(conventional);
    j["sparse_cell_fraction"] = sparse_cell_fraction(layout);
    write_report(j, out);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bit-plane crossbar mapping compiler and bit-serial simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a seeded synthetic weight tensor");
    std::string gen_out, gen_dist = "normal";
    std::size_t gen_rows = 0, gen_cols = 0;
    double gen_mean = 0.0, gen_std = 1.0, gen_lo = 0.0, gen_hi = 1.0;
    std::uint64_t gen_seed = 0;
    gen->add_option("--rows", gen_rows)->required();
    gen->add_option("--cols", gen_cols)->required();
    gen->add_option("--dist", gen_dist, "normal or uniform");
    gen->add_option("--mean", gen_mean);
    gen->add_option("--std", gen_std);
    gen->add_option("--lo", gen_lo);
    gen->add_option("--hi", gen_hi);
    gen->add_option("--seed", gen_seed)->required();
    gen->add_option("--out", gen_out)->required();

    // quantize
    auto* quantize = app.add_subcommand("quantize", "Quantize a weight tensor");
    std::string q_in, q_s = "3", q_rounding = "half-away", q_out, q_stats;
    int q_nq = 8;
    quantize->add_option("--in", q_in)->required();
    quantize->add_option("--nq", q_nq);
    quantize->add_option("--s", q_s);
    quantize->add_option("--rounding", q_rounding, "half-away or half-even");
    quantize->add_option("--out", q_out)->required();
    quantize->add_option("--stats", q_stats);

    // map
    auto* map = app.add_subcommand("map", "Slice a quantized tensor onto crossbars");
    std::string m_in, m_xb = "128x128", m_out, m_summary;
    int m_cell_bits = 1;
    map->add_option("--in", m_in)->required();
    map->add_option("--xb", m_xb, "crossbar dims ROWSxCOLS");
    map->add_option("--cell-bits", m_cell_bits, "bits per cell (1-3)");
    map->add_option("--out", m_out)->required();
    map->add_option("--summary", m_summary);

    // squeeze
    auto* squeeze = app.add_subcommand("squeeze", "Squeeze sparse MSB planes out of a layout");
    std::string sq_in, sq_plan, sq_out;
    int sq_degree = 1;
    double sq_threshold = 1.0;
    squeeze->add_option("--in", sq_in)->required();
    squeeze->add_option("--degree", sq_degree, "bits to squeeze");
    squeeze->add_option("--threshold", sq_threshold,
                        "skip groups whose flagged-row fraction exceeds this");
    squeeze->add_option("--plan", sq_plan)->required();
    squeeze->add_option("--out", sq_out)->required();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Bit-serial execution of a layout");
    std::string sim_layout, sim_plan, sim_act, sim_adc = "ideal", sim_out, sim_trace;
    int sim_na = 8;
    bool sim_no_skip = false;
    simulate->add_option("--layout", sim_layout)->required();
    simulate->add_option("--plan", sim_plan);
    simulate->add_option("--act", sim_act)->required();
    simulate->add_option("--na", sim_na, "activation bit-width");
    simulate->add_option("--adc", sim_adc, "'ideal' or bit count");
    simulate->add_flag("--no-skip-empty", sim_no_skip, "drive empty crossbars too");
    simulate->add_option("--out", sim_out)->required();
    simulate->add_option("--trace", sim_trace, "per-cycle column sums CSV");

    // stats
    auto* stats = app.add_subcommand("stats", "Per-bit density of a quantized tensor");
    std::string st_in, st_out;
    stats->add_option("--in", st_in)->required();
    stats->add_option("--out", st_out)->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Window-size sweep: MSE and sparsity per S");
    std::string sw_in, sw_s = "1..8", sw_rounding = "half-away", sw_out;
    int sw_nq = 8;
    sweep->add_option("--in", sw_in)->required();
    sweep->add_option("--nq", sw_nq);
    sweep->add_option("--s", sw_s, "window sizes: N, N..M, or comma list");
    sweep->add_option("--rounding", sw_rounding);
    sweep->add_option("--out", sw_out)->required();

    // cost
    auto* cost = app.add_subcommand("cost", "Energy/area estimate from unit costs");
    std::string c_layout, c_plan, c_config, c_out;
    int c_na = 8;
    cost->add_option("--layout", c_layout)->required();
    cost->add_option("--plan", c_plan);
    cost->add_option("--config", c_config)->required();
    cost->add_option("--na", c_na, "activation bit-width for op counting");
    cost->add_option("--out", c_out)->required();

    // compare
    auto* compare = app.add_subcommand("compare", "Crossbar counts vs conventional mapping");
    std::string cp_in, cp_s = "3", cp_xb = "128x128", cp_out;
    int cp_nq = 8, cp_cell_bits = 1;
    compare->add_option("--in", cp_in)->required();
    compare->add_option("--nq", cp_nq);
    compare->add_option("--s", cp_s);
    compare->add_option("--xb", cp_xb);
    compare->add_option("--cell-bits", cp_cell_bits);
    compare->add_option("--out", cp_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 1;
    }

    try {
        if (gen->parsed())
            return cmd_gen(gen_out, gen_rows, gen_cols, gen_dist, gen_mean, gen_std, gen_lo,
                           gen_hi, gen_seed);
        if (quantize->parsed()) return cmd_quantize(q_in, q_nq, q_s, q_rounding, q_out, q_stats);
        if (map->parsed()) return cmd_map(m_in, m_xb, m_cell_bits, m_out, m_summary);
        if (squeeze->parsed()) return cmd_squeeze(sq_in, sq_degree, sq_threshold, sq_plan, sq_out);
        if (simulate->parsed())
            return cmd_simulate(sim_layout, sim_plan, sim_act, sim_na, sim_adc, sim_no_skip,
                                sim_out, sim_trace);
        if (stats->parsed()) return cmd_stats(st_in, st_out);
        if (sweep->parsed()) return cmd_sweep(sw_in, sw_nq, sw_s, sw_rounding, sw_out);
        if (cost->parsed()) return cmd_cost(c_layout, c_plan, c_config, c_na, c_out);
        if (compare->parsed())
            return cmd_compare(cp_in, cp_nq, cp_s, cp_xb, cp_cell_bits, cp_out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 1;
}
