#include "xbarmap/mapper.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "xbarmap/errors.hpp"

namespace xbarmap {

bool CellPlane::empty() const {
    return std::all_of(cells.begin(), cells.end(), [](std::uint8_t v) { return v == 0; });
}

BitPlaneSet slice_planes(const QuantizedTensor& qt) {
    qt.config.validate();
    const int n_q = qt.config.n_q;
    BitPlaneSet set;
    set.rows = qt.rows;
    set.cols = qt.cols;
    set.n_q = n_q;
    for (const Codeword& c : qt.codewords)
        if (c.sign < 0 && c.mag != 0) set.has_negative = true;

    set.pos_planes.assign(n_q, std::vector<std::uint8_t>(qt.size(), 0));
    if (set.has_negative) set.neg_planes.assign(n_q, std::vector<std::uint8_t>(qt.size(), 0));

    for (std::size_t idx = 0; idx < qt.size(); ++idx) {
        const Codeword& c = qt.codewords[idx];
        if (c.mag == 0) continue;
        auto& planes = (c.sign < 0) ? set.neg_planes : set.pos_planes;
        for (int i = 1; i <= n_q; ++i)
            if (c.bit(i, n_q)) planes[i - 1][idx] = 1;
    }
    return set;
}

namespace {

CrossbarGroup build_group(const std::vector<std::vector<std::uint8_t>>& planes, int sign,
                          std::size_t rows, std::size_t cols, std::size_t rt, std::size_t ct,
                          std::size_t xb_rows, std::size_t xb_cols, int n_q, int cell_bits) {
    CrossbarGroup g;
    g.sign = sign;
    g.row_tile = rt;
    g.col_tile = ct;
    g.row_offset = rt * xb_rows;
    g.col_offset = ct * xb_cols;
    g.used_rows = std::min(xb_rows, rows - g.row_offset);
    g.used_cols = std::min(xb_cols, cols - g.col_offset);

    const int plane_count = (n_q + cell_bits - 1) / cell_bits;
    g.planes.reserve(plane_count);
    for (int p = 0; p < plane_count; ++p) {
        const int lo = p * cell_bits + 1;                  // first bit position in the field
        const int hi = std::min((p + 1) * cell_bits, n_q); // last (least significant)
        CellPlane plane;
        plane.sig_exp = n_q - hi;
        plane.width = hi - lo + 1;
        plane.cells.assign(g.used_rows * g.used_cols, 0);
        for (std::size_t r = 0; r < g.used_rows; ++r) {
            for (std::size_t c = 0; c < g.used_cols; ++c) {
                const std::size_t src = (g.row_offset + r) * cols + (g.col_offset + c);
                std::uint8_t v = 0;
                for (int i = lo; i <= hi; ++i) v = static_cast<std::uint8_t>((v << 1) | planes[i - 1][src]);
                plane.cells[r * g.used_cols + c] = v;
            }
        }
        g.planes.push_back(std::move(plane));
    }
    return g;
}

} // namespace

CrossbarLayout partition(const BitPlaneSet& planes, std::size_t xb_rows, std::size_t xb_cols,
                         int cell_bits) {
    if (xb_rows < 1 || xb_cols < 1) throw ConfigError("crossbar dimensions must be >= 1");
    if (cell_bits < 1 || cell_bits > 3)
        throw ConfigError("cell_bits must be in {1, 2, 3}, got " + std::to_string(cell_bits));

    CrossbarLayout layout;
    layout.xb_rows = xb_rows;
    layout.xb_cols = xb_cols;
    layout.cell_bits = cell_bits;
    layout.n_q = planes.n_q;
    layout.weight_rows = planes.rows;
    layout.weight_cols = planes.cols;
    layout.has_negative = planes.has_negative;

    const std::size_t rt_count = layout.row_tiles();
    const std::size_t ct_count = layout.col_tiles();
    for (int sign : {+1, -1}) {
        if (sign < 0 && !planes.has_negative) continue;
        const auto& src = (sign < 0) ? planes.neg_planes : planes.pos_planes;
        for (std::size_t rt = 0; rt < rt_count; ++rt)
            for (std::size_t ct = 0; ct < ct_count; ++ct)
                layout.groups.push_back(build_group(src, sign, planes.rows, planes.cols, rt, ct,
                                                    xb_rows, xb_cols, planes.n_q, cell_bits));
    }
    return layout;
}

CrossbarLayout map_tensor(const QuantizedTensor& qt, std::size_t xb_rows, std::size_t xb_cols,
                          int cell_bits) {
    CrossbarLayout layout = partition(slice_planes(qt), xb_rows, xb_cols, cell_bits);
    layout.scale_exp = qt.scale_exp;
    return layout;
}

std::vector<std::uint8_t> CrossbarLayout::empty_index() const {
    const std::size_t planes = planes_per_group();
    const std::size_t bits = groups.size() * planes;
    std::vector<std::uint8_t> index((bits + 7) / 8, 0);
    for (std::size_t g = 0; g < groups.size(); ++g)
        for (std::size_t p = 0; p < groups[g].planes.size(); ++p)
            if (groups[g].planes[p].empty()) {
                const std::size_t bit = g * planes + p;
                index[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
            }
    return index;
}

std::string CrossbarLayout::empty_index_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string hex;
    for (std::uint8_t byte : empty_index()) {
        hex.push_back(digits[byte >> 4]);
        hex.push_back(digits[byte & 0xf]);
    }
    return hex;
}

CrossbarCounts crossbar_count(const CrossbarLayout& layout) {
    CrossbarCounts counts;
    for (const CrossbarGroup& g : layout.groups) {
        counts.allocated += g.planes.size();
        for (const CellPlane& p : g.planes)
            if (p.empty()) ++counts.empty;
    }
    counts.occupied = counts.allocated - counts.empty;
    return counts;
}

std::size_t conventional_count(const QuantizedTensor& qt, std::size_t xb_rows,
                               std::size_t xb_cols, int cell_bits) {
    if (xb_rows < 1 || xb_cols < 1) throw ConfigError("crossbar dimensions must be >= 1");
    if (cell_bits < 1 || cell_bits > 3)
        throw ConfigError("cell_bits must be in {1, 2, 3}, got " + std::to_string(cell_bits));
    const std::size_t cells_per_weight = (qt.config.n_q + cell_bits - 1) / cell_bits;
    std::size_t signs = 1;
    for (const Codeword& c : qt.codewords)
        if (c.sign < 0 && c.mag != 0) {
            signs = 2;
            break;
        }
    const std::size_t row_tiles = (qt.rows + xb_rows - 1) / xb_rows;
    const std::size_t col_tiles = (qt.cols * cells_per_weight + xb_cols - 1) / xb_cols;
    return row_tiles * col_tiles * signs;
}

double sparse_cell_fraction(const CrossbarLayout& layout) {
    std::uint64_t zero = 0, total = 0;
    for (const CrossbarGroup& g : layout.groups)
        for (const CellPlane& p : g.planes) {
            total += p.cells.size();
            for (std::uint8_t v : p.cells)
                if (v == 0) ++zero;
        }
    return total == 0 ? 0.0 : static_cast<double>(zero) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// SMEL binary container
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagicL[4] = {'S', 'M', 'E', 'L'};
constexpr std::uint16_t kVersionL = 1;

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const unsigned char* p;
    std::size_t size;
    std::size_t pos = 0;
    std::string path;

    void need(std::size_t n) const {
        if (pos + n > size)
            throw FormatError(path + ": truncated at byte " + std::to_string(pos) + ", need " +
                              std::to_string(n) + " more");
    }
    std::uint8_t u8() {
        need(1);
        return p[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(p[pos] | (p[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = static_cast<std::uint32_t>(p[pos]) |
                          (static_cast<std::uint32_t>(p[pos + 1]) << 8) |
                          (static_cast<std::uint32_t>(p[pos + 2]) << 16) |
                          (static_cast<std::uint32_t>(p[pos + 3]) << 24);
        pos += 4;
        return v;
    }
};

} // namespace

void save_layout(const CrossbarLayout& layout, const std::string& path) {
    std::string out;
    out.append(kMagicL, 4);
    put_u16(out, kVersionL);
    out.push_back(static_cast<char>(layout.cell_bits));
    out.push_back(static_cast<char>(layout.n_q));
    put_u32(out, static_cast<std::uint32_t>(layout.scale_exp));
    put_u32(out, static_cast<std::uint32_t>(layout.xb_rows));
    put_u32(out, static_cast<std::uint32_t>(layout.xb_cols));
    put_u32(out, static_cast<std::uint32_t>(layout.weight_rows));
    put_u32(out, static_cast<std::uint32_t>(layout.weight_cols));
    out.push_back(layout.has_negative ? 1 : 0);
    out.push_back(static_cast<char>(layout.squeezed_bits));
    put_u16(out, 0); // reserved
    put_u32(out, static_cast<std::uint32_t>(layout.groups.size()));
    for (const CrossbarGroup& g : layout.groups) {
        out.push_back(static_cast<char>(g.sign < 0 ? 1 : 0));
        put_u32(out, static_cast<std::uint32_t>(g.row_tile));
        put_u32(out, static_cast<std::uint32_t>(g.col_tile));
        put_u32(out, static_cast<std::uint32_t>(g.used_rows));
        put_u32(out, static_cast<std::uint32_t>(g.used_cols));
        put_u16(out, static_cast<std::uint16_t>(g.planes.size()));
        for (const CellPlane& plane : g.planes) {
            out.push_back(static_cast<char>(plane.sig_exp));
            out.push_back(static_cast<char>(plane.width));
            out.append(reinterpret_cast<const char*>(plane.cells.data()), plane.cells.size());
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

CrossbarLayout load_layout(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    std::string bytes = buf.str();
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagicL, 4) != 0)
        throw FormatError(path + ": not a layout file (bad magic at byte 0)");
    Reader r{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 4, path};
    if (r.u16() != kVersionL) throw FormatError(path + ": unsupported version at byte 4");

    CrossbarLayout layout;
    layout.cell_bits = r.u8();
    layout.n_q = r.u8();
    layout.scale_exp = static_cast<std::int32_t>(r.u32());
    layout.xb_rows = r.u32();
    layout.xb_cols = r.u32();
    layout.weight_rows = r.u32();
    layout.weight_cols = r.u32();
    layout.has_negative = r.u8() != 0;
    layout.squeezed_bits = r.u8();
    r.u16(); // reserved
    const std::uint32_t group_count = r.u32();
    layout.groups.reserve(group_count);
    for (std::uint32_t i = 0; i < group_count; ++i) {
        CrossbarGroup g;
        g.sign = r.u8() ? -1 : +1;
        g.row_tile = r.u32();
        g.col_tile = r.u32();
        g.used_rows = r.u32();
        g.used_cols = r.u32();
        g.row_offset = g.row_tile * layout.xb_rows;
        g.col_offset = g.col_tile * layout.xb_cols;
        if (g.used_rows > layout.xb_rows || g.used_cols > layout.xb_cols)
            throw FormatError(path + ": group extent exceeds crossbar dimensions");
        const std::uint16_t plane_count = r.u16();
        g.planes.reserve(plane_count);
        for (std::uint16_t p = 0; p < plane_count; ++p) {
            CellPlane plane;
            plane.sig_exp = r.u8();
            plane.width = r.u8();
            const std::size_t n = g.used_rows * g.used_cols;
            r.need(n);
            plane.cells.assign(r.p + r.pos, r.p + r.pos + n);
            r.pos += n;
            for (std::uint8_t v : plane.cells)
                if (v >= (1u << plane.width))
                    throw FormatError(path + ": cell value out of range for plane width");
            g.planes.push_back(std::move(plane));
        }
        layout.groups.push_back(std::move(g));
    }
    if (r.pos != r.size)
        throw FormatError(path + ": trailing bytes, expected " + std::to_string(r.pos) +
                          " bytes, got " + std::to_string(r.size));
    return layout;
}

} // namespace xbarmap
