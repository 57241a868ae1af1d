#pragma once

#include <random>

#include "flab/calculus.hpp"
#include "flab/tree.hpp"

namespace flab {

// Martingale whose child increments at every node have rank min(m-1, d):
// a representation basis whenever no node has more than d+1 children.
Process random_basis(const TreePtr& tree, int d, std::mt19937_64& rng);

// Mean-zero increments from small integers; repeated and zero jumps occur often.
Process random_martingale(const TreePtr& tree, int dim, std::mt19937_64& rng, int bound = 3);

// Either G = F or random splits of F_t joined with the previous G atoms.
Enlargement random_enlargement(const TreePtr& tree, std::mt19937_64& rng);

// Random small rationals on the support of mu.
PredictableFunction random_function(const JumpMeasure& mu, std::mt19937_64& rng);

// Random F-predictable process.
Process random_predictable(const TreePtr& tree, int dim, std::mt19937_64& rng);

Rational random_rational(std::mt19937_64& rng, int bound = 5, int max_den = 4);

}  // namespace flab
