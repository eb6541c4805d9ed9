#include "leocell/numfmt.hpp"

#include <charconv>
#include <system_error>

#include "leocell/error.hpp"

namespace leocell {

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("format_double: buffer too small");
  return std::string(buf, end);
}

namespace {

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  std::string_view s = trim(text);
  if (s.empty()) throw ValidationError("empty value for " + std::string(what));
  // from_chars rejects a leading '+', which hand-written files do contain.
  if (s.front() == '+') s.remove_prefix(1);
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ValidationError("invalid number '" + std::string(text) + "' for " +
                          std::string(what));
  }
  return value;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) {
  return parse_number<double>(text, what);
}

std::int64_t parse_int64(std::string_view text, std::string_view what) {
  return parse_number<std::int64_t>(text, what);
}

std::uint64_t parse_uint64(std::string_view text, std::string_view what) {
  return parse_number<std::uint64_t>(text, what);
}

std::string format_list(std::span<const double> values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(' ');
    out += format_double(values[i]);
  }
  return out;
}

std::vector<double> parse_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    if (pos == text.size()) break;
    std::size_t end = pos;
    while (end < text.size() && text[end] != ' ' && text[end] != '\t') ++end;
    out.push_back(parse_double(text.substr(pos, end - pos), what));
    pos = end;
  }
  return out;
}

std::string_view trim(std::string_view text) {
  const auto ws = " \t\r\n";
  auto first = text.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(ws);
  return text.substr(first, last - first + 1);
}

}  // namespace leocell
