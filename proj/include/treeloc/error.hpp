#pragma once

#include <stdexcept>
#include <string>

namespace treeloc {

enum class ErrorKind {
  kParse,       // malformed syntax
  kField,       // required field missing or of the wrong type
  kValidation,  // value violates a type invariant
  kRange,       // geodesy/small-offset model misuse
  kGeometry,    // degenerate camera/tree geometry
  kConfig,      // bad pipeline or scenario configuration
  kIo,          // file system failure
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace treeloc
