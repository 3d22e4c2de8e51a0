#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace clause {

enum class ErrorCode {
  NotFound,
  NotAtomic,
  ParseError,
  KindMismatch,
  UnboundPlaceholder,
  FragmentUnreadable,
  UnknownDocType,
  UnknownInstance,
  UnknownSession,
  ValidationFailed,
  EditRejected,
  ViolationsOutstanding,
  BadFilter,
  BadRequest,
  Io,
};

std::string_view error_code_name(ErrorCode code);

// Engine-wide exception. `details` carries the structured part of the
// failure (unbound placeholder names, validation messages, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorCode code_;
  std::vector<std::string> details_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : Error(ErrorCode::ParseError, "at " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace clause
