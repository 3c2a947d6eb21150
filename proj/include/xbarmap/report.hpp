// report.hpp — deterministic JSON/CSV emission for analysis reports
//
// Reports must be byte-identical across runs: keys keep insertion order
// and every floating-point number is printed with %.17g (up to 17
// significant digits, enough to round-trip a double).
#pragma once

#include <string>

#include "json.hpp"

namespace xbarmap {

inline constexpr const char* kToolVersion = "0.1.0";

std::string format_double(double v);

// Serialize with 2-space indentation, %.17g doubles, trailing newline.
std::string dump_report(const nlohmann::ordered_json& j);

void write_report(const nlohmann::ordered_json& j, const std::string& path);

void write_text_file(const std::string& text, const std::string& path);

} // namespace xbarmap
