#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace markovld {

/// Typed failure reasons surfaced by the library. The CLI reports the name
/// of the code on stderr, so the spelling is part of the interface.
enum class ErrorCode {
  // chain construction / parsing
  NonPositiveRate,
  SelfLoop,
  NotIrreducible,
  DeadState,
  DuplicateEdge,
  UnknownState,
  ParseError,
  InvalidArgument,
  // linear algebra
  SingularSystem,
  StateSpaceTooLarge,
  // structural preconditions
  NotSymmetricEdgeSet,
  MissingEhatEdge,
  BasisChainMismatch,
  ChordIsTreeEdge,
  // rate functions
  NegativeArgument,
  DomainError,
  NegativeCurrentOnOneWayEdge,
  InfeasibleCurrent,
  InfeasibleLevel,
  NonZeroDivergence,
  NegativeFlow,
  NegativeLevel,
  DegenerateP,
  UnsupportedNorm,
  // two independent computations disagreed
  NumericalMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace markovld
