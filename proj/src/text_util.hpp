#pragma once

// Internal helpers for the text formats. Not installed.

#include "ose/error.hpp"

#include <charconv>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace ose::detail {

// 17 significant digits: reads back to the same double.
inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline double parse_double(std::string_view tok, std::string_view what) {
    double v = 0.0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        fail(ErrorKind::Parse, fmt::format("{}: cannot parse '{}' as a real", what, tok));
    return v;
}

inline std::uint64_t parse_u64(std::string_view tok, std::string_view what) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        fail(ErrorKind::Parse, fmt::format("{}: cannot parse '{}' as a count", what, tok));
    return v;
}

inline long long parse_i64(std::string_view tok, std::string_view what) {
    long long v = 0;
    const char* first = tok.data();
    if (!tok.empty() && tok.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        fail(ErrorKind::Parse, fmt::format("{}: cannot parse '{}' as an integer", what, tok));
    return v;
}

/// Next line that is neither blank nor a '#' comment. Returns false at EOF.
inline bool next_content_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        const auto toks = split_ws(line);
        if (toks.empty() || toks.front().starts_with('#')) continue;
        return true;
    }
    return false;
}

}  // namespace ose::detail
