#include "smallgain/error.hpp"

namespace smallgain {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::range_error: return "range-error";
    case ErrorKind::unsupported_mode: return "unsupported-mode";
    case ErrorKind::requires_linear_gains: return "requires-linear-gains";
    case ErrorKind::unsupported_structure: return "unsupported-structure";
    case ErrorKind::epsilon_too_large: return "epsilon-too-large";
    case ErrorKind::eta_too_large: return "eta-too-large";
    case ErrorKind::unsupported_reference: return "unsupported-reference";
    case ErrorKind::schema: return "schema-error";
    case ErrorKind::numeric_failure: return "numeric-failure";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace smallgain
