#pragma once

#include <stdexcept>
#include <string>

namespace fckan {

enum class ErrorKind {
  kDimension,
  kIndex,
  kParameter,
  kConfig,
  kParse,
  kNumeric,
  kIo,
};

const char* to_string(ErrorKind kind);

// Single exception type for the core; the C API maps `kind` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace fckan
