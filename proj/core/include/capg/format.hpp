#pragma once

#include <string>
#include <string_view>

namespace capg {

/// Shortest decimal text that parses back to exactly x.
std::string format_real(double x);

/// Strict parse of a full decimal real; throws std::invalid_argument.
double parse_real(std::string_view text);

}  // namespace capg
