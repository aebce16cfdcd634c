#pragma once

#include <stdexcept>
#include <string>

namespace kerek {

// Failure modes that callers are expected to branch on.  Everything else
// (bad arguments, broken invariants in input data) is std::invalid_argument.
enum class ErrorCode {
  SpaceMismatch,
  NonIntegralDegree,
  DegenerateFamily,
  UnwrapFailure,
  ClosureOverflow,
  NonInjectiveMeasure,
  AmbiguousFixedPoints,
  NoInteriorFixedPoint,
  DegenerateOrbit,
  CrossingOrbits,
  RefinementStall,
  InversionFailure,
  ResolutionTooCoarse,
  FixedPointCountMismatch,
  ClosureSamplingFailure,
  NotPeriodic,
  Inconclusive,
  UnclassifiableSpec,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace kerek
