#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <utility>

namespace stormsel {

/// Process-wide warning sink. Default writes to stderr; tests install a
/// capture sink to assert on logged-warning contracts.
class WarningSink {
 public:
  using Handler = std::function<void(const std::string&)>;

  static WarningSink& instance() {
    static WarningSink sink;
    return sink;
  }

  void emit(const std::string& msg) {
    std::lock_guard lock(mutex_);
    if (handler_) {
      handler_(msg);
    } else {
      std::cerr << "[stormsel] warning: " << msg << "\n";
    }
  }

  /// Replaces the handler, returning the previous one (nullptr = stderr).
  Handler exchange(Handler h) {
    std::lock_guard lock(mutex_);
    std::swap(handler_, h);
    return h;
  }

 private:
  std::mutex mutex_;
  Handler handler_;
};

inline void warn(const std::string& msg) { WarningSink::instance().emit(msg); }

}  // namespace stormsel
