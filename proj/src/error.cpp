#include "flab/error.hpp"

namespace flab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveProbability: return "NonPositiveProbability";
    case ErrorKind::ProbabilitySumNotOne: return "ProbabilitySumNotOne";
    case ErrorKind::DanglingNode: return "DanglingNode";
    case ErrorKind::PrematureLeaf: return "PrematureLeaf";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::NotARefinement: return "NotARefinement";
    case ErrorKind::NotMonotone: return "NotMonotone";
    case ErrorKind::NotAStoppingTime: return "NotAStoppingTime";
    case ErrorKind::NotAdapted: return "NotAdapted";
    case ErrorKind::NotPredictable: return "NotPredictable";
    case ErrorKind::NotMeasurable: return "NotMeasurable";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::IncompleteFunctionTable: return "IncompleteFunctionTable";
    case ErrorKind::ConstraintMismatch: return "ConstraintMismatch";
    case ErrorKind::PartitionNotMeasurable: return "PartitionNotMeasurable";
    case ErrorKind::VanishingWeight: return "VanishingWeight";
    case ErrorKind::SpanDeficient: return "SpanDeficient";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotOrthogonal: return "NotOrthogonal";
    case ErrorKind::InvalidProbabilityVector: return "InvalidProbabilityVector";
    case ErrorKind::NotAMartingale: return "NotAMartingale";
    case ErrorKind::NoRepresentation: return "NoRepresentation";
    case ErrorKind::NotStrictlyPositive: return "NotStrictlyPositive";
    case ErrorKind::NotADeflator: return "NotADeflator";
    case ErrorKind::NotIncreasing: return "NotIncreasing";
    case ErrorKind::DegeneratePartition: return "DegeneratePartition";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownCheck: return "UnknownCheck";
  }
  return "Unknown";
}

}  // namespace flab
