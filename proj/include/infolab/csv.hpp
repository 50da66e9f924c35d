#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>

namespace infolab::csv {

/// Appends the shortest decimal that round-trips to `v` ("inf"/"-inf"/"nan"
/// for non-finite values). Output depends only on the value, not on locale.
inline void append(std::string& out, double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ec == std::errc{} ? end : buf);
}

template <class Int>
    requires std::is_integral_v<Int> && (!std::is_same_v<Int, bool>)
void append(std::string& out, Int v) {
    char buf[24];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ec == std::errc{} ? end : buf);
}

inline void append(std::string& out, std::string_view v) { out.append(v); }
inline void append(std::string& out, const char* v) { out.append(v); }
inline void append(std::string& out, const std::string& v) { out.append(v); }

/// Appends the fields comma-separated, then '\n'.
template <class... Fields>
void row(std::string& out, const Fields&... fields) {
    bool first = true;
    ((out.append(first ? "" : ","), append(out, fields), first = false), ...);
    out.push_back('\n');
}

}  // namespace infolab::csv
