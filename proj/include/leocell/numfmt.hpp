#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leocell {

/// Shortest decimal string that parses back to the identical binary64 value.
std::string format_double(double value);

/// Strict parse of a whole field; throws ValidationError on trailing junk or
/// an empty field. `what` names the field in the message.
double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int64(std::string_view text, std::string_view what);
std::uint64_t parse_uint64(std::string_view text, std::string_view what);

/// Space-separated round-trip list, as used in model files.
std::string format_list(std::span<const double> values);
std::vector<double> parse_list(std::string_view text, std::string_view what);

std::string_view trim(std::string_view text);

}  // namespace leocell
