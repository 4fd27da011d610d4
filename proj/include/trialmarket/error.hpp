#pragma once

#include <stdexcept>
#include <string>

namespace trialmarket {

enum class ErrorKind {
  InvalidInstance,
  InvalidArgument,
  DegenerateInstance,
  UndefinedShare,
  UnsupportedSolver,
  SizeLimit,
  TieBreakingViolation,
  Undefined,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class MarketError : public std::runtime_error {
 public:
  MarketError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw MarketError(kind, what);
}

}  // namespace trialmarket
