#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flab/checks.hpp"
#include "flab/tree.hpp"

namespace flab {

struct FuzzParams {
  std::uint64_t first_seed = 0;
  int count = 100;
  RandomTreeParams tree;
  // Basis dimension is max_branching - 1 - basis_deficit; a positive deficit
  // also forces a root with max_branching children so the basis cannot span.
  int basis_deficit = 0;
  std::vector<std::string> checks;  // empty runs every registered check
  int threads = 1;
  bool inject_fault = false;
};

// Tree, basis W, scalar martingale M and enlargement G, all drawn from the seed.
Scenario random_scenario(std::uint64_t seed, const FuzzParams& params);

// Keeps the first `horizon` periods; G atoms are coarsened so they stay a filtration.
Scenario truncate_scenario(const Scenario& s, int horizon);

// Smallest truncation (then smallest check list) that still fails.
Scenario minimize_failure(const Scenario& s);

// {tool, version, params, instances: [...], failures: [{seed, failed, reproducer}], summary, verdict}.
// Independent of the thread count.
json fuzz(const FuzzParams& params);

}  // namespace flab
