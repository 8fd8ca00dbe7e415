#pragma once

#include <stdexcept>
#include <string>

namespace stormsel {

/// Errors caused by user inputs (bad config, malformed files, invalid
/// arguments). The CLI maps these to exit code 2; everything else is an
/// internal error (exit code 1).
class UserError : public std::runtime_error {
 public:
  explicit UserError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file contents (CSV rows, manifests, spec files).
class ParseError : public UserError {
 public:
  explicit ParseError(const std::string& what) : UserError(what) {}
};

/// Inputs that parse but violate a documented precondition or invariant.
class ValidationError : public UserError {
 public:
  explicit ValidationError(const std::string& what) : UserError(what) {}
};

/// Unrecoverable numerical failures (NaN loss, unstable dynamics handled
/// elsewhere as ValidationError when user-tunable).
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stormsel
