#include "deeppos/error.hpp"

namespace deeppos {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::parse: return "parse error";
    case ErrorCode::io: return "i/o error";
    case ErrorCode::degenerate_scale: return "degenerate scale";
    case ErrorCode::singular_geometry: return "singular geometry";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::internal: return "internal error";
  }
  return "unknown error";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace deeppos
