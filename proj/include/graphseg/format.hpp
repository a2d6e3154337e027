#ifndef GRAPHSEG_FORMAT_HPP
#define GRAPHSEG_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace graphseg {

/// Shortest decimal text that reads back to the same double; Inf, -Inf, NA.
inline std::string shortest(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "Inf" : "-Inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// printf %.12g; used for JSON output.
inline std::string sig12(double x) {
  if (x == 0.0) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline bool is_na(std::string_view s) {
  return s.empty() || s == "NA" || s == "<NA>" || s == "NaN" || s == "nan";
}

/// Parses a number, accepting Inf/-Inf/inf spellings. std::nullopt on error.
inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s == "Inf" || s == "inf" || s == "+Inf" || s == "Infinity") return HUGE_VAL;
  if (s == "-Inf" || s == "-inf" || s == "-Infinity") return -HUGE_VAL;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    return std::nullopt;
  return v;
}

}  // namespace graphseg

#endif  // GRAPHSEG_FORMAT_HPP
