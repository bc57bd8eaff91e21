#pragma once

#include <stdexcept>
#include <string>

namespace ontoalign {

enum class ErrorCode {
  invalid_argument,
  io,
  parse,
  cycle,
  unknown_format,
  insufficient_data,
  config,
  scorer_transport,
  scorer_protocol,
  undefined_score,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code; the message is human-readable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Transport failures are the only retryable class.
  bool retryable() const noexcept { return code_ == ErrorCode::scorer_transport; }

 private:
  ErrorCode code_;
};

}  // namespace ontoalign
