#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace stormsel {

/// Plain-text key-value configuration. One `key value...` pair per line,
/// `#` starts a comment, the key is the first whitespace-delimited token and
/// the value is the rest of the line. Later occurrences of a key override
/// earlier ones.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Comma-separated lists; empty string yields an empty list.
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::string> get_string_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key) const;

  /// Throws UserError naming the first key not in `allowed` (CLI contract:
  /// unknown config key is a user error).
  void require_known_keys(const std::set<std::string>& allowed) const;
  void require_present(const std::vector<std::string>& keys) const;

  const std::string& origin() const { return origin_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

}  // namespace stormsel
