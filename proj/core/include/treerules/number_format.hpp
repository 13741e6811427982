#pragma once

#include <string>
#include <string_view>

namespace treerules {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_shortest(double value);

/// Like format_shortest, but integral values keep a trailing ".0" ("1.0",
/// "7200.0"), which is how the rule text and decision paths print numbers.
std::string format_display(double value);

/// Parses a complete decimal string into a double. Throws ParseError on
/// trailing garbage or an empty string; `line` is attached to the error.
double parse_double(std::string_view text, std::size_t line = 0);

/// Non-throwing variant; returns false when `text` is not a full number.
bool try_parse_double(std::string_view text, double& out);

long long parse_integer(std::string_view text, std::size_t line = 0);

}  // namespace treerules
