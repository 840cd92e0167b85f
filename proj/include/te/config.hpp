#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace te {

/// Flat key-value configuration in a TOML subset: `key = value` lines,
/// `[section]` headers that prefix later keys with "section.", `#` comments,
/// and scalar values (quoted strings, integers, reals, booleans).
class FlatConfig {
 public:
  /// Throws ConfigError with the offending line number.
  static FlatConfig parse(std::string_view text);
  static FlatConfig load(const std::filesystem::path& path);

  /// Applies "key=value"; the value follows the same scalar syntax, and a bare
  /// word is taken as a string.
  void apply_override(std::string_view assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get_string(const std::string& key, std::optional<std::string> fallback = std::nullopt) const;
  std::int64_t get_int(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) const;
  double get_double(const std::string& key, std::optional<double> fallback = std::nullopt) const;
  bool get_bool(const std::string& key, std::optional<bool> fallback = std::nullopt) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// All entries as strings, in key order.
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace te
