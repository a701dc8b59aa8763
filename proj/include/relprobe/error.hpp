#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relprobe {

enum class ErrorCategory {
  usage,       // bad command line or configuration value
  io,          // file could not be opened, read or written
  format,      // malformed file contents (truncated payload, bad header, NaN)
  validation,  // domain invariant violated (unknown fact, bad edit, ...)
  numeric,     // singular system, non-finite input, bad regularization
};

constexpr std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::numeric: return "numeric";
  }
  return "unknown";
}

/// Process exit code for each category; 0 is success, 1 is reserved for
/// uncategorized failures.
constexpr int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::format: return 4;
    case ErrorCategory::validation: return 5;
    case ErrorCategory::numeric: return 6;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace relprobe
