#pragma once

#include <stdexcept>
#include <string>

namespace deeppos {

enum class ErrorCode {
  invalid_argument = 1,
  parse,
  io,
  degenerate_scale,
  singular_geometry,
  dimension_mismatch,
  divergence,
  out_of_range,
  internal,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// C boundary can translate it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace deeppos
