#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "flab/calculus.hpp"
#include "flab/linalg.hpp"

namespace flab {

// e(x) = min(|x|_1, 1): bounded, continuous, nonzero off the origin, rational.
Rational truncation_weight(const Vec& x);

// Finite menu of jump values per non-terminal node (the F_{t-1} atom).
// Empty slots are kept so every node has exactly n entries.
struct ConstraintSystem {
  TreePtr tree;
  int n = 0;
  int dim = 0;
  std::vector<std::vector<std::optional<Vec>>> alpha;  // [node][k]; empty for terminal nodes

  const std::optional<Vec>& slot(int node, int k) const {
    return alpha[static_cast<std::size_t>(node)][static_cast<std::size_t>(k)];
  }
  std::optional<int> slot_of(int node, const Vec& x) const;
};

// Distinct nonzero jump values per node, in lexicographic order.
ConstraintSystem detect_fpcc(const JumpMeasure& mu);
// Throws ConstraintMismatch unless every support jump equals exactly one slot.
void validate_constraint(const ConstraintSystem& cs, const JumpMeasure& mu);

// u_k(t, x) = e(x) 1{x = alpha_k}.
PredictableFunction constraint_function(const JumpMeasure& mu, const ConstraintSystem& cs, int k);
// X_k = u_k * (mu - nu), stacked into an n-dimensional F-martingale.
Process constraint_martingales(const JumpMeasure& mu, const ConstraintSystem& cs);

struct StarToDot {
  Process integrand;   // H, n-dimensional, F-predictable
  Process integrator;  // X from constraint_martingales
  Process star;        // g * (mu - nu)
  Process dot;         // H . X
  std::optional<PathPoint> mismatch;
  bool certified() const { return !mismatch; }
};
StarToDot star_to_dot(const PredictableFunction& g, const JumpMeasure& mu, const ConstraintSystem& cs);

// g(t, x) = sum_k H_k e(x) 1{x = alpha_k}: the star-integral form of H . X.
PredictableFunction dot_to_star(const Process& h, const JumpMeasure& mu, const ConstraintSystem& cs);

struct AccessibleSlot {
  int node = 0;                          // atom of time t-1
  std::vector<std::vector<int>> classes; // leaf sets A_k partitioning the node
  Rational weight = 1;                   // a_n on this atom
};
struct AccessiblePartition {
  int n = 0;
  std::vector<AccessibleSlot> slots;  // one per non-terminal node
};

// Children grouped by jump value: nonzero values in lexicographic order, then
// the no-jump class; padded with empty classes to a common n.
AccessiblePartition canonical_accessible_partition(const JumpMeasure& mu,
                                                   const std::function<Rational(int node)>& weight = {});

struct AccessibleStarToDot {
  Process gain;       // G = 1/a, scalar
  Process integrand;  // G g(alpha) 1{alpha != 0}, n-dimensional
  Process y;          // Y_k = a (1_{A_k} - P[A_k | F_{t-1}]) at each step
  Process star;
  Process dot;
  std::optional<PathPoint> mismatch;
  bool certified() const { return !mismatch; }
};
AccessibleStarToDot accessible_star_to_dot(const PredictableFunction& g, const JumpMeasure& mu,
                                           const AccessiblePartition& partition);

// Columns of gamma are the vectors gamma_i in R^n. Returns K (d x n) with
// gamma * K_h = (delta_{hk} - p_h)_k for every h.
Matrix solve_accessible_K(const Matrix& gamma, const Vec& p);
// Returns K (d x n) with gamma K = I_n.
Matrix solve_inaccessible_K(const Matrix& gamma);

}  // namespace flab
