#include "ptyroi/text.hpp"

#include "ptyroi/errors.hpp"

#include <charconv>
#include <system_error>

namespace ptyroi::text {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, ptr};
}

namespace {

template <typename T>
T parse_number(std::string_view s, const char* what) {
    s = trim(s);
    T value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw FormatError("invalid " + std::string(what) + ": '" + std::string(s) + "'");
    return value;
}

}  // namespace

double parse_double(std::string_view s) { return parse_number<double>(s, "number"); }
std::int64_t parse_int(std::string_view s) { return parse_number<std::int64_t>(s, "integer"); }
std::uint64_t parse_uint(std::string_view s) {
    return parse_number<std::uint64_t>(s, "unsigned integer");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace ptyroi::text
