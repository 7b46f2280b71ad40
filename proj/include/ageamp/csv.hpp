#ifndef AGEAMP_CSV_HPP
#define AGEAMP_CSV_HPP

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ageamp::csv {

/// Nine significant digits; non-finite values spelled inf, -inf, nan.
inline std::string number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

/// RFC 4180 quoting: fields holding a comma, quote, CR or LF are wrapped in
/// double quotes with embedded quotes doubled.
inline std::string field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) os << ',';
    os << field(cells[i]);
  }
  os << "\r\n";
}

}  // namespace ageamp::csv

#endif  // AGEAMP_CSV_HPP
