#pragma once

#include <string>
#include <string_view>

namespace dagcusum {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);
/// Strict parse of the whole string; throws ConfigError on junk.
double parse_double(std::string_view text);

}  // namespace dagcusum
