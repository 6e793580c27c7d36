#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gapfair {

// Flat key/value config with [section] blocks. A deliberately small subset of
// TOML: `key = value` lines, `#`/`;` comments, optional double quotes around
// string values. Values keep their text form; typed accessors parse on demand.
class ConfigFile {
 public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& section, const std::string& key) const;
  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::string require_string(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  // Comma-separated values.
  std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
  std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

  // Raw view for manifests: section -> key -> value.
  const std::map<std::string, std::map<std::string, std::string>>& raw() const { return data_; }

  // Rejects keys outside the allowed set for a section (typo guard).
  void restrict_keys(const std::string& section, const std::vector<std::string>& allowed) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
  std::string origin_;
};

}  // namespace gapfair
