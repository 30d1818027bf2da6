#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scjarz {

enum class ErrorKind {
  TimeOutOfRange,
  IntegratorDiverged,
  ToleranceExceeded,
  CausticEncountered,
  NewtonDiverged,
  WorkMismatch,
  DomainTooSmall,
  TruncationInsufficient,
  GridTooNarrow,
  Validation,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the toolkit carries a kind so callers (grid scans,
// the CLI) can classify it without string matching.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace scjarz
