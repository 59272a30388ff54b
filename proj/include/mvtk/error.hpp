#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mvtk {

enum class ErrorKind {
  invalid_argument,
  invalid_extent,
  range,
  syntax,
  count,
  degenerate,
  empty_answer,
  validation,
  undefined_metric,
  length_mismatch,
  kind_mismatch,
  missing_template,
  unknown_sample,
  conflict,
  io,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library. Parse errors carry the byte offset
// into the text where matching stopped.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> offset = std::nullopt)
      : std::runtime_error(what), kind_(kind), offset_(offset) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> offset_;
};

}  // namespace mvtk
