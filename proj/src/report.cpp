#include "xbarmap/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "xbarmap/errors.hpp"

namespace xbarmap {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null"; // reports never carry non-finite values
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void dump_value(const nlohmann::ordered_json& j, std::string& out, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent + 1) * 2, ' ');
    switch (j.type()) {
        case nlohmann::ordered_json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                out += nlohmann::ordered_json(it.key()).dump();
                out += ": ";
                dump_value(it.value(), out, indent + 1);
            }
            out += "\n" + pad + "}";
            return;
        }
        case nlohmann::ordered_json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& item : j) {
                if (!first) out += ",\n";
                first = false;
                out += pad_in;
                dump_value(item, out, indent + 1);
            }
            out += "\n" + pad + "]";
            return;
        }
        case nlohmann::ordered_json::value_t::number_float:
            out += format_double(j.get<double>());
            return;
        default:
            out += j.dump();
            return;
    }
}

} // namespace

std::string dump_report(const nlohmann::ordered_json& j) {
    std::string out;
    dump_value(j, out, 0);
    out += '\n';
    return out;
}

void write_report(const nlohmann::ordered_json& j, const std::string& path) {
    write_text_file(dump_report(j), path);
}

void write_text_file(const std::string& text, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed: " + path);
}

} // namespace xbarmap
