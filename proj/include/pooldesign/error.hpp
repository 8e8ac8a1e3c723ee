#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pooldesign {

/// Error categories surfaced to the CLI (as exit codes) and the HTTP service
/// (as status codes). Every failure inside the library maps to one of these.
enum class ErrorCode { bad_input, infeasible, inconclusive, not_found, internal };

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error(ErrorCode::bad_input, message) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& message) : Error(ErrorCode::infeasible, message) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& message) : Error(ErrorCode::not_found, message) {}
};

}  // namespace pooldesign
