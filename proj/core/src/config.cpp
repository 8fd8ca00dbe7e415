#include "stormsel/config.hpp"

#include <cstdlib>
#include <sstream>

#include "stormsel/csv.hpp"
#include "stormsel/error.hpp"

namespace stormsel {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
  return from_string(read_text_file(path), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::size_t lineno = 0;
  for (const auto& raw : split_lines(text)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto ws = line.find_first_of(" \t");
    if (ws == std::string::npos) {
      cfg.values_[line] = "";
      continue;
    }
    cfg.values_[line.substr(0, ws)] = trim(line.substr(ws + 1));
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw UserError("config " + origin_ + ": missing required key '" + key + "'");
  }
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  char* end = nullptr;
  const long long n = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw UserError("config " + origin_ + ": key '" + key + "' is not an integer: " + v);
  }
  return n;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size()) {
    throw UserError("config " + origin_ + ": key '" + key + "' is not an integer: " + v);
  }
  return n;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  return parse_hex_double(v, "for config key '" + key + "' in " + origin_);
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UserError("config " + origin_ + ": key '" + key + "' is not a boolean: " + v);
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
  std::vector<std::string> out;
  const std::string v = get_string(key, "");
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : get_string_list(key)) {
    out.push_back(parse_hex_double(s, "in list for config key '" + key + "'"));
  }
  return out;
}

std::vector<long long> Config::get_int_list(const std::string& key) const {
  std::vector<long long> out;
  for (const auto& s : get_string_list(key)) {
    char* end = nullptr;
    const long long n = std::strtoll(s.c_str(), &end, 10);
    if (end != s.c_str() + s.size()) {
      throw UserError("config " + origin_ + ": key '" + key + "' has non-integer item: " + s);
    }
    out.push_back(n);
  }
  return out;
}

void Config::require_known_keys(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_) {
    if (!allowed.count(key)) {
      throw UserError("config " + origin_ + ": unknown key '" + key + "'");
    }
  }
}

void Config::require_present(const std::vector<std::string>& keys) const {
  for (const auto& key : keys) {
    if (!has(key)) {
      throw UserError("config " + origin_ + ": missing required key '" + key + "'");
    }
  }
}

}  // namespace stormsel
