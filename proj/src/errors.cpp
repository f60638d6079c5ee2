#include "markovld/errors.hpp"

#include <charconv>
#include <cstdio>

#include "markovld/extended_real.hpp"

namespace markovld {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::DeadState: return "DeadState";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::NotSymmetricEdgeSet: return "NotSymmetricEdgeSet";
    case ErrorCode::MissingEhatEdge: return "MissingEhatEdge";
    case ErrorCode::BasisChainMismatch: return "BasisChainMismatch";
    case ErrorCode::ChordIsTreeEdge: return "ChordIsTreeEdge";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NegativeCurrentOnOneWayEdge: return "NegativeCurrentOnOneWayEdge";
    case ErrorCode::InfeasibleCurrent: return "InfeasibleCurrent";
    case ErrorCode::InfeasibleLevel: return "InfeasibleLevel";
    case ErrorCode::NonZeroDivergence: return "NonZeroDivergence";
    case ErrorCode::NegativeFlow: return "NegativeFlow";
    case ErrorCode::NegativeLevel: return "NegativeLevel";
    case ErrorCode::DegenerateP: return "DegenerateP";
    case ErrorCode::UnsupportedNorm: return "UnsupportedNorm";
    case ErrorCode::NumericalMismatch: return "NumericalMismatch";
  }
  return "Unknown";
}

std::string ExtendedReal::str() const {
  if (sign_ > 0) return "inf";
  if (sign_ < 0) return "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value_);
  return std::string(buf, res.ptr);
}

}  // namespace markovld
