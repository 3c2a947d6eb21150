#include "xbarmap/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "xbarmap/errors.hpp"

namespace xbarmap {

namespace {

constexpr char kMagic[4] = {'S', 'M', 'E', 'T'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeF64 = 0;

void append_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void append_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64(std::string& out, double v) {
    std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

double read_f64(const unsigned char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return std::bit_cast<double>(bits);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

bool has_smet_magic(const std::string& bytes) {
    return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

// Returns the dims of an SMET payload after header validation.
std::vector<std::uint32_t> parse_smet_header(const std::string& bytes, const std::string& path) {
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 8)
        throw FormatError(path + ": SMET header truncated at byte " + std::to_string(bytes.size()) +
                          " (need 8)");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError(path + ": bad magic at byte 0");
    std::uint16_t version = read_u16(p + 4);
    if (version != kVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version) + " at byte 4");
    std::uint8_t dtype = p[6];
    if (dtype != kDtypeF64)
        throw FormatError(path + ": unsupported dtype code " + std::to_string(dtype) + " at byte 6");
    std::uint8_t ndim = p[7];
    std::size_t need = 8 + std::size_t(ndim) * 4;
    if (bytes.size() < need)
        throw FormatError(path + ": dims truncated, expected " + std::to_string(need) +
                          " header bytes, got " + std::to_string(bytes.size()));
    std::vector<std::uint32_t> dims(ndim);
    for (std::uint8_t i = 0; i < ndim; ++i) dims[i] = read_u32(p + 8 + 4 * i);
    return dims;
}

std::size_t checked_element_count(const std::vector<std::uint32_t>& dims, const std::string& path) {
    std::size_t n = 1;
    for (std::uint32_t d : dims) {
        if (d == 0) throw FormatError(path + ": zero dimension");
        if (n > std::numeric_limits<std::size_t>::max() / d)
            throw CapacityError(path + ": dimension product overflows");
        n *= d;
    }
    if (n > std::numeric_limits<std::size_t>::max() / sizeof(double))
        throw CapacityError(path + ": payload size overflows");
    return n;
}

std::vector<double> parse_smet_payload(const std::string& bytes, std::size_t header_bytes,
                                       std::size_t count, const std::string& path) {
    std::size_t expected = header_bytes + count * 8;
    if (bytes.size() != expected)
        throw FormatError(path + ": payload size mismatch, expected " + std::to_string(expected) +
                          " bytes, got " + std::to_string(bytes.size()));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data()) + header_bytes;
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = read_f64(p + 8 * i);
    return values;
}

std::string smet_bytes(const std::vector<std::uint32_t>& dims, const std::vector<double>& values) {
    std::string out;
    out.reserve(8 + dims.size() * 4 + values.size() * 8);
    out.append(kMagic, 4);
    append_u16(out, kVersion);
    out.push_back(static_cast<char>(kDtypeF64));
    out.push_back(static_cast<char>(dims.size()));
    for (std::uint32_t d : dims) append_u32(out, d);
    for (double v : values) append_f64(out, v);
    return out;
}

} // namespace

void WeightTensor::validate() const {
    if (rows < 1 || cols < 1) throw DimensionError("tensor dimensions must be >= 1");
    if (data.size() != rows * cols)
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    for (double v : data)
        if (!std::isfinite(v)) throw RangeError("tensor contains a non-finite value");
}

void ActivationVector::validate() const {
    for (double v : data) {
        if (!std::isfinite(v)) throw RangeError("activation contains a non-finite value");
        if (v < 0.0) throw RangeError("activation contains a negative value");
    }
}

WeightTensor parse_csv(const std::string& text, const std::string& origin) {
    WeightTensor t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                double v = std::stod(cell, &used);
                while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used])))
                    ++used;
                if (used != cell.size()) throw std::invalid_argument("trailing junk");
                row.push_back(v);
            } catch (const std::exception&) {
                throw FormatError(origin + ": line " + std::to_string(lineno) +
                                  ": cannot parse cell '" + cell + "'");
            }
        }
        if (t.cols == 0) {
            t.cols = row.size();
        } else if (row.size() != t.cols) {
            throw FormatError(origin + ": line " + std::to_string(lineno) + ": expected " +
                              std::to_string(t.cols) + " cells, got " + std::to_string(row.size()));
        }
        t.data.insert(t.data.end(), row.begin(), row.end());
        ++t.rows;
    }
    if (t.rows == 0) throw FormatError(origin + ": no data rows");
    t.validate();
    return t;
}

WeightTensor load_tensor(const std::string& path) {
    std::string bytes = read_file(path);
    if (!has_smet_magic(bytes)) {
        WeightTensor t = parse_csv(bytes, path);
        t.name = path;
        return t;
    }
    auto dims = parse_smet_header(bytes, path);
    if (dims.size() != 2)
        throw FormatError(path + ": expected 2-D tensor, got " + std::to_string(dims.size()) +
                          " dims");
    std::size_t count = checked_element_count(dims, path);
    WeightTensor t;
    t.rows = dims[0];
    t.cols = dims[1];
    t.data = parse_smet_payload(bytes, 8 + dims.size() * 4, count, path);
    t.name = path;
    t.validate();
    return t;
}

void save_tensor(const WeightTensor& tensor, const std::string& path) {
    tensor.validate();
    if (tensor.rows > std::numeric_limits<std::uint32_t>::max() ||
        tensor.cols > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError(path + ": dimensions exceed u32");
    write_file(path, smet_bytes({static_cast<std::uint32_t>(tensor.rows),
                                 static_cast<std::uint32_t>(tensor.cols)},
                                tensor.data));
}

ActivationVector load_activations(const std::string& path) {
    std::string bytes = read_file(path);
    ActivationVector act;
    if (!has_smet_magic(bytes)) {
        // Accept a one-row or one-column CSV as a vector.
        WeightTensor t = parse_csv(bytes, path);
        if (t.rows != 1 && t.cols != 1)
            throw FormatError(path + ": activation CSV must be a single row or column");
        act.data = std::move(t.data);
    } else {
        auto dims = parse_smet_header(bytes, path);
        if (dims.size() != 1)
            throw FormatError(path + ": expected 1-D activations, got " +
                              std::to_string(dims.size()) + " dims");
        std::size_t count = checked_element_count(dims, path);
        act.data = parse_smet_payload(bytes, 8 + 4, count, path);
    }
    act.validate();
    return act;
}

void save_activations(const ActivationVector& act, const std::string& path) {
    act.validate();
    if (act.data.empty()) throw DimensionError(path + ": empty activation vector");
    if (act.data.size() > std::numeric_limits<std::uint32_t>::max())
        throw CapacityError(path + ": length exceeds u32");
    write_file(path, smet_bytes({static_cast<std::uint32_t>(act.data.size())}, act.data));
}

} // namespace xbarmap
