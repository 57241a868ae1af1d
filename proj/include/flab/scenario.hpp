#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "flab/calculus.hpp"
#include "flab/tree.hpp"

namespace flab {

using json = nlohmann::json;

struct Scenario {
  TreePtr tree;
  std::map<std::string, Process> processes;
  std::map<std::string, Enlargement> enlargements;
  std::string basis = "W";   // representation driver
  std::string enlargement;   // selected enlargement; empty picks the first, or G = F
  std::vector<std::string> assets;  // viability family; empty uses the default grid
  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  bool expect_mrp = true;
  bool inject_fault = false;  // perturbs the multiplier before verification

  const Process* find_process(const std::string& name) const;
  Enlargement selected_enlargement() const;
};

const char* version();

Scenario parse_scenario(const json& j);
Scenario load_scenario(const std::string& path);
json to_json(const Scenario& s);

json process_to_json(const Process& p);  // node-valued; p must be F-adapted
Process process_from_json(const TreePtr& tree, const json& j);
json tree_to_json(const FilteredTree& tree);  // "horizon" and "nodes" members

// FNV-1a over the canonical dump, as 16 hex digits.
std::string scenario_hash(const json& j);

}  // namespace flab
