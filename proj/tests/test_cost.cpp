#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "xbarmap/cost.hpp"
#include "xbarmap/errors.hpp"
#include "xbarmap/simulator.hpp"
#include "xbarmap/squeezer.hpp"

using namespace xbarmap;

namespace {

CrossbarLayout layout_256() {
    std::mt19937_64 rng(101);
    return map_tensor(testutil::random_qt(256, 256, 8, 3, false, rng), 128, 128, 1);
}

CostConfig unit_config() {
    CostConfig cfg;
    cfg.energy_per_cell_op = 1.0;
    cfg.energy_per_adc_conversion = 1.0;
    cfg.energy_per_register_bit = 1.0;
    cfg.area_per_crossbar = 1.0;
    cfg.area_per_adc = 1.0;
    cfg.area_per_buffer_kb = 1.0;
    return cfg;
}

} // namespace

TEST_CASE("index overhead counts group-plane bits plus rcmr masks") {
    CrossbarLayout layout = layout_256();
    CHECK(layout.groups.size() == 4);
    CHECK(index_overhead(layout, nullptr) == 32); // 4 groups x 8 planes

    const SqueezePlan plan = squeeze_layout(layout, 1);
    // One 128-bit mask per group per step on top of the fixed-size index.
    CHECK(index_overhead(layout, &plan) == 32 + 4 * 128);
}

TEST_CASE("index overhead ignores content") {
    const QuantizedTensor dense = testutil::make_qt(2, 2, 4, 4, {15, 15, 15, 15});
    const QuantizedTensor sparse = testutil::make_qt(2, 2, 4, 4, {0, 0, 0, 1});
    CHECK(index_overhead(map_tensor(dense, 4, 4, 1), nullptr) ==
          index_overhead(map_tensor(sparse, 4, 4, 1), nullptr));
}

TEST_CASE("zero-cost config yields zero totals") {
    const CrossbarLayout layout = layout_256();
    SimResult counts;
    counts.op_count = 1000;
    counts.adc_conversions = 100;
    const CostReport report = estimate_cost(layout, nullptr, counts, CostConfig{});
    CHECK(report.energy_total == 0.0);
    CHECK(report.area_total == 0.0);
}

TEST_CASE("crossbar area term is linear in occupied count") {
    std::mt19937_64 rng(103);
    const QuantizedTensor one = testutil::random_qt(16, 16, 8, 8, false, rng);
    QuantizedTensor two = one;
    two.rows = 32;
    two.codewords.insert(two.codewords.end(), one.codewords.begin(), one.codewords.end());

    CostConfig cfg;
    cfg.area_per_crossbar = 3.0;
    SimResult counts;
    const CostReport r1 = estimate_cost(map_tensor(one, 16, 16, 1), nullptr, counts, cfg);
    const CostReport r2 = estimate_cost(map_tensor(two, 16, 16, 1), nullptr, counts, cfg);
    CHECK(r2.occupied_crossbars == 2 * r1.occupied_crossbars);
    CHECK(r2.area_crossbar == 2.0 * r1.area_crossbar);
}

TEST_CASE("cost report is additive across disjoint layers") {
    std::mt19937_64 rng(104);
    const CrossbarLayout a = map_tensor(testutil::random_qt(16, 16, 8, 3, true, rng), 8, 8, 1);
    const CrossbarLayout b = map_tensor(testutil::random_qt(24, 8, 8, 2, false, rng), 8, 8, 1);
    SimResult ca, cb, csum;
    ca.op_count = 500;
    ca.adc_conversions = 50;
    cb.op_count = 300;
    cb.adc_conversions = 70;
    csum.op_count = ca.op_count + cb.op_count;
    csum.adc_conversions = ca.adc_conversions + cb.adc_conversions;

    const CostConfig cfg = unit_config();
    const CostReport ra = estimate_cost(a, nullptr, ca, cfg);
    const CostReport rb = estimate_cost(b, nullptr, cb, cfg);
    // A layout holding both layers' crossbars costs the sum.
    CrossbarLayout both = a;
    both.groups.insert(both.groups.end(), b.groups.begin(), b.groups.end());
    const CostReport rboth = estimate_cost(both, nullptr, csum, cfg);
    CHECK(rboth.energy_total == ra.energy_total + rb.energy_total);
    CHECK(rboth.area_total == doctest::Approx(ra.area_total + rb.area_total).epsilon(1e-15));
}

TEST_CASE("fewer occupied crossbars never cost more") {
    const QuantizedTensor dense = testutil::make_qt(2, 2, 4, 4, {15, 15, 15, 15});
    const QuantizedTensor sparse = testutil::make_qt(2, 2, 4, 4, {8, 8, 8, 8});
    const CrossbarLayout dl = map_tensor(dense, 4, 4, 1);
    const CrossbarLayout sl = map_tensor(sparse, 4, 4, 1);
    const CostConfig cfg = unit_config();
    SimResult counts;
    const OpCounts dops = count_ops(dl, 4, true);
    counts.op_count = dops.op_count;
    counts.adc_conversions = dops.adc_conversions;
    const CostReport dr = estimate_cost(dl, nullptr, counts, cfg);
    const OpCounts sops = count_ops(sl, 4, true);
    counts.op_count = sops.op_count;
    counts.adc_conversions = sops.adc_conversions;
    const CostReport sr = estimate_cost(sl, nullptr, counts, cfg);
    CHECK(sr.area_crossbar <= dr.area_crossbar);
    CHECK(sr.energy_crossbar <= dr.energy_crossbar);
    CHECK(sr.area_total <= dr.area_total);
    CHECK(sr.energy_total <= dr.energy_total);
}

TEST_CASE("sme crossbar-area term never exceeds conventional on aligned shapes") {
    std::mt19937_64 rng(105);
    CostConfig cfg;
    cfg.area_per_crossbar = 2.5;
    SimResult counts;
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t xb = 16;
        const QuantizedTensor qt =
            testutil::random_qt(xb * (1 + rng() % 3), xb * (1 + rng() % 3), 8, 3, true, rng);
        const CrossbarLayout layout = map_tensor(qt, xb, xb, 1);
        const CostReport sme = estimate_cost(layout, nullptr, counts, cfg);
        const double conventional =
            double(conventional_count(qt, xb, xb, 1)) * cfg.area_per_crossbar;
        CHECK(sme.area_crossbar <= conventional);
    }
}

TEST_CASE("config file loading names missing fields") {
    const std::string path =
        (std::filesystem::temp_directory_path() / "xbm_cost.json").string();
    {
        std::ofstream f(path);
        f << "{\"energy_per_cell_op\": 1.0}";
    }
    try {
        load_cost_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("energy_per_adc_conversion") != std::string::npos);
    }
    {
        std::ofstream f(path, std::ios::trunc);
        f << "{\"energy_per_cell_op\": 1.0, \"energy_per_adc_conversion\": 2.0,"
             "\"energy_per_register_bit\": 0.5, \"area_per_crossbar\": 10.0,"
             "\"area_per_adc\": 4.0, \"area_per_buffer_kb\": 100.0}";
    }
    const CostConfig cfg = load_cost_config(path);
    CHECK(cfg.area_per_crossbar == 10.0);
    CHECK_THROWS_AS(load_cost_config("/nonexistent/cost.json"), IoError);
    std::remove(path.c_str());

    CostConfig bad;
    bad.area_per_adc = -1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
