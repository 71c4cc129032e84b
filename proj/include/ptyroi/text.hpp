#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Locale-independent number formatting and parsing for the CSV and config
// readers. Doubles are printed with std::to_chars shortest round-trip form,
// which keeps repeated runs bytewise identical.

namespace ptyroi::text {

std::string format_double(double v);

double parse_double(std::string_view s);        // throws FormatError
std::int64_t parse_int(std::string_view s);     // throws FormatError
std::uint64_t parse_uint(std::string_view s);   // throws FormatError

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace ptyroi::text
