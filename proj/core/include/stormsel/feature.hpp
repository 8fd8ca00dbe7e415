#pragma once

#include <compare>
#include <string>
#include <vector>

namespace stormsel {

/// A lagged predictor: `code` observed `lag` 6-hour steps before the target
/// time. Canonical ordering everywhere is lexicographic by (code, lag).
struct Feature {
  std::string code;
  int lag = 0;

  auto operator<=>(const Feature&) const = default;

  std::string label() const { return code + "@" + std::to_string(lag); }
};

inline std::string join_labels(const std::vector<Feature>& fs,
                               const char* sep = ";") {
  std::string out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (i) out += sep;
    out += fs[i].label();
  }
  return out;
}

}  // namespace stormsel
