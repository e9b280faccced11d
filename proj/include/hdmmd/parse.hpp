#pragma once

#include <string>
#include <string_view>

namespace hdmmd {

// Strict decimal parse of the whole string; throws InvalidArgument naming `what`.
double parse_double(std::string_view text, std::string_view what);
long long parse_int(std::string_view text, std::string_view what);

// Plain decimal with 12 significant digits ("%.12g"); the repo-wide numeric
// output format for CSV and text.
std::string format_number(double value);

// Rounds to 12 significant digits so JSON serializers emit the same digits.
double round_significant(double value);

}  // namespace hdmmd
