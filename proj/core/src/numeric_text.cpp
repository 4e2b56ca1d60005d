#include "seisfeat/numeric_text.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <string>

#include "seisfeat/error.hpp"

namespace seisfeat {

void append_fixed(std::string& out, double value, int decimals) {
  if (std::isnan(value)) {
    out += "nan";
    return;
  }
  if (std::isinf(value)) {
    out += value < 0 ? "-inf" : "inf";
    return;
  }
  std::array<char, 400> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value,
                                 std::chars_format::fixed, decimals);
  if (ec != std::errc()) throw Error("number formatting failed");
  // Avoid "-0.000000", which would break byte-level comparisons of values
  // that differ only in the sign of zero.
  std::string_view text(buf.data(), static_cast<std::size_t>(end - buf.data()));
  if (text.front() == '-' &&
      text.find_first_not_of("-0.") == std::string_view::npos) {
    text.remove_prefix(1);
  }
  out += text;
}

std::string format_fixed(double value, int decimals) {
  std::string out;
  append_fixed(out, value, decimals);
  return out;
}

double parse_double(std::string_view text) {
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  if (text == "nan") return NAN;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("invalid number '" + std::string(text) + "'");
  }
  return value;
}

std::optional<double> parse_optional_double(std::string_view text) {
  if (text == kAbsentToken) return std::nullopt;
  return parse_double(text);
}

long long parse_integer(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("invalid integer '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace seisfeat
