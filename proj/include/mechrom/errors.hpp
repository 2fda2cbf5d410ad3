#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mechrom {

enum class ErrorKind {
  kInvalidParameter,
  kInvalidInput,
  kFormat,
  kSingularOperator,
  kDegenerateInput,
  kMissingData,
  kInsufficientData,
  kNotSeparable,
  kIllConditionedModes,
  kNoViableLambda,
  kInvalidComparison,
  kUsage,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidParameter: return "invalid-parameter";
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kSingularOperator: return "singular-operator";
    case ErrorKind::kDegenerateInput: return "degenerate-input";
    case ErrorKind::kMissingData: return "missing-data";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kNotSeparable: return "not-separable";
    case ErrorKind::kIllConditionedModes: return "ill-conditioned-modes";
    case ErrorKind::kNoViableLambda: return "no-viable-lambda";
    case ErrorKind::kInvalidComparison: return "invalid-comparison";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure with a 1-based location inside the offending file.
class FormatError : public Error {
 public:
  FormatError(const std::string& file, long line, const std::string& what)
      : Error(ErrorKind::kFormat,
              file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  long line() const noexcept { return line_; }

 private:
  long line_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind,
                    const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace mechrom
