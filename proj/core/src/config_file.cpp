#include "gapfair/config_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gapfair/errors.hpp"

namespace gapfair {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // strip comments outside quotes
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (!quoted && (line[i] == '#' || line[i] == ';')) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw DataError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw DataError(origin + ":" + std::to_string(lineno) + ": empty section name");
      cfg.data_[section];  // sections may be empty
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw DataError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (cfg.data_[section].contains(key))
      throw DataError(origin + ":" + std::to_string(lineno) + ": duplicate key \"" + key + "\"");
    cfg.data_[section][key] = value;
  }
  return cfg;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  auto it = data_.find(section);
  return it != data_.end() && it->second.contains(key);
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : data_) out.push_back(name);
  return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = data_.find(section);
  if (it == data_.end()) return out;
  for (const auto& [key, _] : it->second) out.push_back(key);
  return out;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  auto it = data_.find(section);
  if (it == data_.end()) return fallback;
  auto kit = it->second.find(key);
  return kit == it->second.end() ? fallback : kit->second;
}

std::string ConfigFile::require_string(const std::string& section, const std::string& key) const {
  if (!has(section, key))
    throw DataError(origin_ + ": missing required key [" + section + "] " + key);
  return data_.at(section).at(key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key,
                              double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = data_.at(section).at(key);
  try {
    std::size_t used = 0;
    const double parsed = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return parsed;
  } catch (const std::exception&) {
    throw DataError(origin_ + ": [" + section + "] " + key + ": not a number: \"" + v + "\"");
  }
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key,
                                 std::int64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = data_.at(section).at(key);
  std::int64_t parsed = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw DataError(origin_ + ": [" + section + "] " + key + ": not an integer: \"" + v + "\"");
  return parsed;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = data_.at(section).at(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError(origin_ + ": [" + section + "] " + key + ": not a boolean: \"" + v + "\"");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section,
                                              const std::string& key) const {
  std::vector<std::string> out;
  if (!has(section, key)) return out;
  const std::string& v = data_.at(section).at(key);
  std::string item;
  std::istringstream ss(v);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section,
                                                const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : get_list(section, key)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw DataError(origin_ + ": [" + section + "] " + key + ": not a number: \"" + item + "\"");
    }
  }
  return out;
}

void ConfigFile::restrict_keys(const std::string& section,
                               const std::vector<std::string>& allowed) const {
  auto it = data_.find(section);
  if (it == data_.end()) return;
  for (const auto& [key, _] : it->second) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      std::string msg = origin_ + ": unknown key \"" + key + "\" in [" + section + "]; allowed:";
      for (const std::string& a : allowed) msg += " " + a;
      throw DataError(msg);
    }
  }
}

}  // namespace gapfair
