#pragma once

#include <stdexcept>
#include <string>

namespace smallgain {

enum class ErrorKind {
  invalid_input,
  range_error,
  unsupported_mode,
  requires_linear_gains,
  unsupported_structure,
  epsilon_too_large,
  eta_too_large,
  unsupported_reference,
  schema,
  numeric_failure,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) fail(kind, message);
}

}  // namespace smallgain
