#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace froq {

/// Category of a failure. Each category maps onto one CLI exit code
/// (see `exit_code_for`).
enum class ErrorKind {
  kInvalidScore,
  kShape,
  kDegenerateInput,
  kInvalidParameter,
  kModelFormat,
  kUnknownTap,
  kImageFormat,
  kAlignment,
  kCompatibility,
  kFormatVersion,
  kConfigParse,
  kIo,
  kBatch,
};

std::string_view kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// 2 for usage/input errors, 3 for runtime/data errors.
int exit_code_for(ErrorKind kind) noexcept;

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace froq
