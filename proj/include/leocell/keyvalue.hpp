#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leocell {

/// Line-oriented `key=value` text. Blank lines and lines starting with '#'
/// are ignored; keys are unique; insertion order is kept for writing.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, const std::string& source = {});
  static KeyValueFile load(const std::filesystem::path& path);

  void set(std::string key, std::string value);
  bool contains(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  /// Throws ValidationError naming the key and source when absent.
  std::string require(std::string_view key) const;

  std::optional<double> get_double(std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view key) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }
  const std::string& source() const { return source_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::string source_;
};

}  // namespace leocell
