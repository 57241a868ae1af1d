#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace flab {

enum class ErrorKind {
  NonPositiveProbability,
  ProbabilitySumNotOne,
  DanglingNode,
  PrematureLeaf,
  TimeOutOfRange,
  NotARefinement,
  NotMonotone,
  NotAStoppingTime,
  NotAdapted,
  NotPredictable,
  NotMeasurable,
  DimensionMismatch,
  IncompleteFunctionTable,
  ConstraintMismatch,
  PartitionNotMeasurable,
  VanishingWeight,
  SpanDeficient,
  RankDeficient,
  NotOrthogonal,
  InvalidProbabilityVector,
  NotAMartingale,
  NoRepresentation,
  NotStrictlyPositive,
  NotADeflator,
  NotIncreasing,
  DegeneratePartition,
  ParseError,
  UnknownCheck,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  Error(ErrorKind kind, const std::string& what, std::vector<mpq_class> witness)
      : Error(kind, what) {
    witness_ = std::move(witness);
  }

  ErrorKind kind() const { return kind_; }
  // Optional certificate (e.g. the residual of a failed span test).
  const std::vector<mpq_class>& witness() const { return witness_; }

 private:
  ErrorKind kind_;
  std::vector<mpq_class> witness_;
};

}  // namespace flab
