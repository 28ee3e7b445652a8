#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace bnpreg {

/// Flat `dotted.key = value` text; `#` starts a comment. Every lookup marks
/// the key as used so callers can reject unknown keys.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, std::string source = "<string>");
  /// Throws ConfigError naming the path when the file cannot be read.
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, std::string value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

  /// Keys present in the text but never looked up.
  std::vector<std::string> unused_keys() const;
  const std::string& source() const { return source_; }

 private:
  std::string require(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace bnpreg
