#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace seisfeat {

inline constexpr int kDbDecimals = 6;
inline constexpr int kTimeDecimals = 9;
inline constexpr int kPressureDecimals = 6;
inline constexpr std::string_view kAbsentToken = "NA";

/// Locale-independent fixed-point formatting; non-finite values print as
/// "inf", "-inf" or "nan".
std::string format_fixed(double value, int decimals);
void append_fixed(std::string& out, double value, int decimals);

/// Parses a value written by format_fixed. Throws seisfeat::Error.
double parse_double(std::string_view text);
/// Returns nullopt for the absent token.
std::optional<double> parse_optional_double(std::string_view text);
long long parse_integer(std::string_view text);

}  // namespace seisfeat
