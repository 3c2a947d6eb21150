#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "test_util.hpp"
#include "xbarmap/errors.hpp"
#include "xbarmap/mapper.hpp"
#include "xbarmap/quantizer.hpp"
#include "xbarmap/synth.hpp"

using namespace xbarmap;

TEST_CASE("slice routes bits to the per-position planes") {
    // 1010 at (0,0): planes 1..4 hold 1,0,1,0 in the positive set.
    const QuantizedTensor qt = testutil::make_qt(2, 2, 4, 3, {0b1010, 0, 0, -0b0011});
    const BitPlaneSet planes = slice_planes(qt);
    CHECK(planes.has_negative);
    CHECK(planes.pos_planes[0][0] == 1);
    CHECK(planes.pos_planes[1][0] == 0);
    CHECK(planes.pos_planes[2][0] == 1);
    CHECK(planes.pos_planes[3][0] == 0);
    // -0.1875 (0011) at (1,1): negative planes 3 and 4.
    CHECK(planes.neg_planes[2][3] == 1);
    CHECK(planes.neg_planes[3][3] == 1);
    CHECK(planes.pos_planes[2][3] == 0);
}

TEST_CASE("all-zero tensor maps to all-empty crossbars") {
    const QuantizedTensor qt = testutil::make_qt(4, 4, 4, 2, std::vector<int>(16, 0));
    const BitPlaneSet planes = slice_planes(qt);
    CHECK_FALSE(planes.has_negative);
    const CrossbarLayout layout = partition(planes, 2, 2, 1);
    const CrossbarCounts counts = crossbar_count(layout);
    CHECK(counts.allocated == 16); // 2x2 tiles x 4 planes, positive only
    CHECK(counts.empty == 16);
    CHECK(counts.occupied == 0);
}

TEST_CASE("group arithmetic for a 256x256 positive tensor") {
    std::mt19937_64 rng(3);
    QuantizedTensor qt = testutil::random_qt(256, 256, 8, 3, false, rng);
    const CrossbarLayout layout = map_tensor(qt, 128, 128, 1);
    CHECK(layout.groups.size() == 4);
    CHECK(layout.planes_per_group() == 8);
    CHECK(crossbar_count(layout).allocated == 32);
    for (const CrossbarGroup& g : layout.groups) {
        CHECK(g.used_rows == 128);
        CHECK(g.used_cols == 128);
    }
}

TEST_CASE("empty index is sound and complete") {
    std::mt19937_64 rng(4);
    const QuantizedTensor qt = testutil::random_qt(40, 24, 8, 2, true, rng);
    const CrossbarLayout layout = map_tensor(qt, 16, 16, 1);
    const auto index = layout.empty_index();
    const std::size_t planes = layout.planes_per_group();
    for (std::size_t g = 0; g < layout.groups.size(); ++g) {
        for (std::size_t p = 0; p < planes; ++p) {
            const std::size_t bit = g * planes + p;
            const bool flagged = (index[bit / 8] >> (bit % 8)) & 1;
            CHECK(flagged == layout.groups[g].planes[p].empty());
        }
    }
}

TEST_CASE("mlc packing is msb-first and reassembles exactly") {
    const QuantizedTensor qt = testutil::make_qt(1, 1, 8, 8, {0b10110101});
    const CrossbarLayout layout = map_tensor(qt, 4, 4, 2);
    REQUIRE(layout.planes_per_group() == 4);
    // Cell plane p holds bits 2p-1, 2p as 2*b_{2p-1} + b_{2p}.
    CHECK(layout.groups[0].cell(0, 0, 0) == 0b10);
    CHECK(layout.groups[0].cell(1, 0, 0) == 0b11);
    CHECK(layout.groups[0].cell(2, 0, 0) == 0b01);
    CHECK(layout.groups[0].cell(3, 0, 0) == 0b01);
    CHECK(testutil::reassemble_units(layout)[0] == 0b10110101);
}

TEST_CASE("reassembly identity holds over shapes, signs, and cell widths") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t rows = 1 + rng() % 33;
        const std::size_t cols = 1 + rng() % 33;
        const int n_q = (trial % 2 == 0) ? 8 : 4;
        const int cell_bits = 1 + int(rng() % 3);
        const QuantizedTensor qt =
            testutil::random_qt(rows, cols, n_q, 1 + int(rng() % n_q), true, rng);
        const CrossbarLayout layout = map_tensor(qt, 5 + rng() % 16, 5 + rng() % 16, cell_bits);
        const auto units = testutil::reassemble_units(layout);
        for (std::size_t i = 0; i < qt.size(); ++i)
            CHECK(units[i] == std::int64_t(qt.codewords[i].sign) * qt.codewords[i].mag);
    }
}

TEST_CASE("unpacking mlc cell planes reproduces the slc bit planes") {
    std::mt19937_64 rng(9);
    const QuantizedTensor qt = testutil::random_qt(9, 14, 8, 4, true, rng);
    const CrossbarLayout slc = map_tensor(qt, 8, 8, 1);
    for (int m : {2, 3}) {
        const CrossbarLayout mlc = map_tensor(qt, 8, 8, m);
        REQUIRE(mlc.groups.size() == slc.groups.size());
        for (std::size_t g = 0; g < slc.groups.size(); ++g) {
            const CrossbarGroup& sg = slc.groups[g];
            const CrossbarGroup& mg = mlc.groups[g];
            for (std::size_t p = 0; p < mg.planes.size(); ++p) {
                const CellPlane& cell = mg.planes[p];
                const int hi_bit = 8 - cell.sig_exp; // last bit position in the field
                for (std::size_t idx = 0; idx < cell.cells.size(); ++idx)
                    for (int b = 0; b < cell.width; ++b) {
                        const int bit_pos = hi_bit - (cell.width - 1) + b; // 1-based
                        const std::uint8_t expect = sg.planes[bit_pos - 1].cells[idx];
                        const std::uint8_t got = (cell.cells[idx] >> (cell.width - 1 - b)) & 1;
                        CHECK(got == expect);
                    }
            }
        }
    }
}

TEST_CASE("conventional count") {
    std::mt19937_64 rng(6);
    const QuantizedTensor qt = testutil::random_qt(128, 128, 8, 3, false, rng);
    CHECK(conventional_count(qt, 128, 128, 1) == 8); // one row tile, 8 column tiles
    CHECK(conventional_count(qt, 128, 128, 2) == 4);
    // The codeword width governs the count even when every magnitude would
    // fit in a single bit.
    const QuantizedTensor tiny =
        testutil::make_qt(128, 128, 8, 3, std::vector<int>(128 * 128, 1));
    CHECK(conventional_count(tiny, 128, 128, 1) == 8);
}

TEST_CASE("three empty msb planes beat conventional mapping") {
    // All magnitudes in [0.01, 0.11]: quantized codewords keep b_1..b_3 = 0.
    const WeightTensor t = synth_uniform_tensor(128, 128, 0.01, 0.11, 12);
    const QuantizedTensor qt = quantize_tensor(t, {8, 3, Rounding::HalfAwayFromZero});
    REQUIRE(qt.scale_exp == 0);
    const CrossbarLayout layout = map_tensor(qt, 128, 128, 1);
    const CrossbarCounts counts = crossbar_count(layout);
    CHECK(counts.occupied == 5);
    CHECK(conventional_count(qt, 128, 128, 1) == 8);
}

TEST_CASE("count dominance on crossbar-aligned shapes") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t xb = 8u << (rng() % 2);
        const std::size_t rows = xb * (1 + rng() % 4);
        const std::size_t cols = xb * (1 + rng() % 4);
        const int cell_bits = 1 + int(rng() % 2);
        const QuantizedTensor qt =
            testutil::random_qt(rows, cols, 8, 1 + int(rng() % 4), (rng() & 1) != 0, rng);
        const CrossbarLayout layout = map_tensor(qt, xb, xb, cell_bits);
        CHECK(crossbar_count(layout).occupied <= conventional_count(qt, xb, xb, cell_bits));
    }
}

TEST_CASE("mlc packing lowers the sparse-cell fraction") {
    const WeightTensor t = synth_normal_tensor(64, 64, 0.0, 0.05, 42);
    const QuantizedTensor qt = quantize_tensor(t, {8, 3, Rounding::HalfAwayFromZero});
    const double slc = sparse_cell_fraction(map_tensor(qt, 64, 64, 1));
    const double mlc = sparse_cell_fraction(map_tensor(qt, 64, 64, 2));
    CHECK(mlc < slc);
}

TEST_CASE("padding never flips an empty flag") {
    // 3x3 tensor on 4x4 crossbars: the single tile is partially used and
    // its padding stays zero.
    const QuantizedTensor qt = testutil::make_qt(3, 3, 4, 2, {8, 0, 0, 0, 8, 0, 0, 0, 8});
    const CrossbarLayout layout = map_tensor(qt, 4, 4, 1);
    CHECK(layout.groups.size() == 1);
    CHECK(layout.groups[0].used_rows == 3);
    CHECK(layout.groups[0].used_cols == 3);
    CHECK_FALSE(layout.groups[0].planes[0].empty());
    CHECK(layout.groups[0].planes[1].empty());
}

TEST_CASE("layout container round trip") {
    std::mt19937_64 rng(15);
    const QuantizedTensor qt = testutil::random_qt(20, 33, 8, 3, true, rng, 1);
    const CrossbarLayout layout = map_tensor(qt, 16, 16, 2);
    const std::string path =
        (std::filesystem::temp_directory_path() / "xbm_layout.bin").string();
    save_layout(layout, path);
    const CrossbarLayout back = load_layout(path);
    CHECK(back.xb_rows == layout.xb_rows);
    CHECK(back.xb_cols == layout.xb_cols);
    CHECK(back.cell_bits == layout.cell_bits);
    CHECK(back.n_q == layout.n_q);
    CHECK(back.scale_exp == layout.scale_exp);
    CHECK(back.has_negative == layout.has_negative);
    REQUIRE(back.groups.size() == layout.groups.size());
    for (std::size_t g = 0; g < layout.groups.size(); ++g) {
        CHECK(back.groups[g].sign == layout.groups[g].sign);
        CHECK(back.groups[g].row_offset == layout.groups[g].row_offset);
        REQUIRE(back.groups[g].planes.size() == layout.groups[g].planes.size());
        for (std::size_t p = 0; p < layout.groups[g].planes.size(); ++p) {
            CHECK(back.groups[g].planes[p].sig_exp == layout.groups[g].planes[p].sig_exp);
            CHECK(back.groups[g].planes[p].cells == layout.groups[g].planes[p].cells);
        }
    }
    std::remove(path.c_str());
}

TEST_CASE("partition rejects bad cell widths") {
    const QuantizedTensor qt = testutil::make_qt(1, 1, 4, 2, {8});
    CHECK_THROWS_AS(map_tensor(qt, 4, 4, 0), ConfigError);
    CHECK_THROWS_AS(map_tensor(qt, 4, 4, 4), ConfigError);
    CHECK_THROWS_AS(map_tensor(qt, 0, 4, 1), ConfigError);
}
