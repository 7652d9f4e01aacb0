#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ptkr {

// Fixed 17 significant digits, `nan`, `inf`, `-inf`.
std::string format_real(double value);

// Shortest form that parses back to the same double.
std::string format_real_short(double value);

std::optional<double> parse_real(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace ptkr
