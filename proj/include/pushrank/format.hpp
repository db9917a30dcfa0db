#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pushrank {

// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Strict full-token parses; nullopt on trailing garbage or empty input.
inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<unsigned long> parse_unsigned(std::string_view s) {
  unsigned long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

namespace detail {

// Space/tab tokenizer for line-oriented text formats.
inline std::vector<std::string_view> split_ws(std::string_view sv) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < sv.size()) {
    while (i < sv.size() && (sv[i] == ' ' || sv[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < sv.size() && sv[i] != ' ' && sv[i] != '\t') ++i;
    if (i > start) fields.push_back(sv.substr(start, i - start));
  }
  return fields;
}

}  // namespace detail

}  // namespace pushrank
