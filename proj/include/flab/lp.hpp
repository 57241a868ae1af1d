#pragma once

#include <vector>

#include "flab/rational.hpp"

namespace flab::lp {

enum class Relation { LessEqual, Equal, GreaterEqual };
enum class Status { Optimal, Infeasible, Unbounded };

struct Constraint {
  Vec coeffs;
  Relation relation = Relation::Equal;
  Rational rhs;
};

// maximize objective . x  subject to constraints, x >= 0.
struct Problem {
  std::size_t num_vars = 0;
  Vec objective;
  std::vector<Constraint> constraints;
};

struct Solution {
  Status status = Status::Infeasible;
  Vec x;
  Rational value;
};

// Two-phase dense tableau simplex in exact arithmetic, Bland's rule throughout.
Solution solve(const Problem& problem);

const char* to_string(Status s);

}  // namespace flab::lp
