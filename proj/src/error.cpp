#include "ontoalign/error.hpp"

namespace ontoalign {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::cycle: return "cycle";
    case ErrorCode::unknown_format: return "unknown_format";
    case ErrorCode::insufficient_data: return "insufficient_data";
    case ErrorCode::config: return "config";
    case ErrorCode::scorer_transport: return "scorer_transport";
    case ErrorCode::scorer_protocol: return "scorer_protocol";
    case ErrorCode::undefined_score: return "undefined_score";
  }
  return "unknown";
}

}  // namespace ontoalign
