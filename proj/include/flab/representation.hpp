#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flab/calculus.hpp"
#include "flab/constraint.hpp"

namespace flab {

struct MrpNodeReport {
  int node = 0;
  int children = 0;
  int rank = 0;  // rank of the d x m matrix of child increments
  bool spans() const { return rank == children - 1; }
};

struct MrpReport {
  bool mrp = true;
  std::optional<int> failing_node;
  Vec witness;  // mean-zero function on the failing node's children that W cannot reach
  std::vector<MrpNodeReport> nodes;
};

// Throws NotAMartingale when W is not an F-martingale.
MrpReport check_mrp(const Process& w);

// Scalar F-martingale X as H . W; least-index solution per node.
Process representation_coefficient(const Process& x, const Process& w);

struct Subatom {
  int node = -1;  // child node, -1 for padding
  std::vector<int> leaves;
  Rational prob;  // conditional on the parent atom
};

struct PartitionWitness {
  int t = 0;     // time of the subatoms
  int node = 0;  // the F_{t-1} atom
  std::vector<Subatom> subatoms;
};

struct Multiplicity {
  int count = 0;
  PartitionWitness witness;
};

// Children of a node ordered by descending probability, ties by leaf ids;
// padded with empty subatoms to dim + 1 when dim is given and large enough.
Multiplicity conditional_multiplicity(const FilteredTree& tree, int node, std::optional<int> dim = std::nullopt);

// H with H . W equal to the compensated single jump xi 1_{[R, inf)}; for a
// predictable R it lives on [R] and H_R . Delta_R W = xi - E[xi | F_{R-}].
Process single_jump_coefficient(const std::vector<Rational>& xi, const StoppingTime& r, const Process& w);

struct Reconstruction {
  int d = 0;
  Process x2;  // (d+1)-dimensional compensated indicator family
  std::vector<PartitionWitness> witnesses;
};
Reconstruction reconstruct_accessible(const Process& w);

struct Orthogonalization {
  JumpMeasure mu;
  ConstraintSystem cs;
  Process x_circ;
};
Orthogonalization orthogonalize(const Process& m);
// H' with H . M = H' . X_circ; H is d-dimensional F-predictable.
Process translate_integrand(const Process& h, const Orthogonalization& o);

ConstraintSystem jump_constraint(const Process& w);

}  // namespace flab
