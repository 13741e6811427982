#include "treerules/number_format.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <system_error>

#include "treerules/error.hpp"

namespace treerules {

std::string format_shortest(double value) {
  std::array<char, 64> buffer{};
  const auto result = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), result.ptr);
}

std::string format_display(double value) {
  std::string text = format_shortest(value);
  if (std::isfinite(value) && text.find_first_of(".eE") == std::string::npos) {
    text += ".0";
  }
  return text;
}

bool try_parse_double(std::string_view text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  // from_chars rejects a leading '+', which some writers emit.
  if (*first == '+') ++first;
  const auto result = std::from_chars(first, last, out);
  return result.ec == std::errc{} && result.ptr == last;
}

double parse_double(std::string_view text, std::size_t line) {
  double value = 0.0;
  if (!try_parse_double(text, value)) {
    throw ParseError("not a number: '" + std::string(text) + "'", line);
  }
  return value;
}

long long parse_integer(std::string_view text, std::size_t line) {
  long long value = 0;
  const char* last = text.data() + text.size();
  const auto result = std::from_chars(text.data(), last, value);
  if (text.empty() || result.ec != std::errc{} || result.ptr != last) {
    throw ParseError("not an integer: '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace treerules
