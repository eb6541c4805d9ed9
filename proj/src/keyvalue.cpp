#include "leocell/keyvalue.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "leocell/error.hpp"
#include "leocell/numfmt.hpp"

namespace leocell {

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& source) {
  KeyValueFile kv;
  kv.source_ = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": expected key=value");
    }
    std::string key(trim(text.substr(0, eq)));
    if (key.empty()) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": empty key");
    }
    if (kv.contains(key)) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": duplicate key '" + key + "'");
    }
    kv.entries_.emplace_back(std::move(key),
                             std::string(trim(text.substr(eq + 1))));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  return parse(in, path.string());
}

void KeyValueFile::set(std::string key, std::string value) {
  auto it = std::find_if(entries_.begin(), entries_.end(),
                         [&](const auto& e) { return e.first == key; });
  if (it != entries_.end()) {
    it->second = std::move(value);
  } else {
    entries_.emplace_back(std::move(key), std::move(value));
  }
}

bool KeyValueFile::contains(std::string_view key) const {
  return get(key).has_value();
}

std::optional<std::string> KeyValueFile::get(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KeyValueFile::require(std::string_view key) const {
  auto v = get(key);
  if (!v) {
    throw ValidationError((source_.empty() ? std::string("input") : source_) +
                          ": missing key '" + std::string(key) + "'");
  }
  return *v;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_double(*v, key);
}

std::optional<std::int64_t> KeyValueFile::get_int(std::string_view key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  return parse_int64(*v, key);
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
}

void KeyValueFile::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  write(out);
  out.flush();
  if (!out) throw ValidationError("error writing " + path.string());
}

}  // namespace leocell
