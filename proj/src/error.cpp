#include "treeloc/error.hpp"

namespace treeloc {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kField: return "field error";
    case ErrorKind::kValidation: return "validation error";
    case ErrorKind::kRange: return "range error";
    case ErrorKind::kGeometry: return "geometry error";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "I/O error";
  }
  return "error";
}

}  // namespace treeloc
