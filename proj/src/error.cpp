#include "mvtk/error.hpp"

namespace mvtk {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_extent: return "invalid_extent";
    case ErrorKind::range: return "range";
    case ErrorKind::syntax: return "syntax";
    case ErrorKind::count: return "count";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::empty_answer: return "empty_answer";
    case ErrorKind::validation: return "validation";
    case ErrorKind::undefined_metric: return "undefined_metric";
    case ErrorKind::length_mismatch: return "length_mismatch";
    case ErrorKind::kind_mismatch: return "kind_mismatch";
    case ErrorKind::missing_template: return "missing_template";
    case ErrorKind::unknown_sample: return "unknown_sample";
    case ErrorKind::conflict: return "conflict";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

}  // namespace mvtk
