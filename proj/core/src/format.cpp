#include "capg/format.hpp"

#include <array>
#include <charconv>
#include <stdexcept>
#include <system_error>

namespace capg {

std::string format_real(double x) {
  std::array<char, 64> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw std::runtime_error("format_real: to_chars failed");
  return std::string(buf.data(), end);
}

double parse_real(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || first == last) {
    throw std::invalid_argument("not a real number: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace capg
