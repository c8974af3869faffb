#pragma once

#include <stdexcept>
#include <string>

namespace aps {

enum class ErrorCode {
  // scorer / transport
  EmptyInput,
  Transport,
  Protocol,
  // metrics
  EmptyPredictions,
  EmptyGold,
  LengthMismatch,
  DegenerateInput,
  // formats
  UnbalancedTokens,
  GroupCountMismatch,
  EmptyGroup,
  NoPropositionsFound,
  TokenCollision,
  MalformedLine,
  // io / config
  Io,
  Config,
};

const char* error_code_name(ErrorCode code);

/// Toolkit-wide exception carrying a typed error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace aps
