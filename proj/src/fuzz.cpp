#include "flab/fuzz.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "flab/error.hpp"
#include "flab/generators.hpp"

namespace flab {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

std::vector<std::string> failed_checks(const json& report) {
  std::vector<std::string> out;
  for (const auto& c : report["checks"])
    if (c["verdict"] == "fail") out.push_back(c["name"]);
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(sz(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[sz(x)] == x ? x : parent[sz(x)] = find(parent[sz(x)]); }
  void join(int a, int b) { parent[sz(find(a))] = find(b); }
};

}  // namespace

Scenario random_scenario(std::uint64_t seed, const FuzzParams& params) {
  std::mt19937_64 rng(seed);
  RandomTreeParams tp = params.tree;
  if (params.basis_deficit > 0) tp.full_root = true;
  Scenario s;
  s.tree = FilteredTree::build(random_tree_spec(rng, tp));
  const int d = std::max(1, std::min(tp.max_branching, 9) - 1 - params.basis_deficit);
  s.processes.emplace("W", random_basis(s.tree, d, rng));
  s.processes.emplace("M", random_martingale(s.tree, 1, rng));
  s.enlargements.emplace("G", random_enlargement(s.tree, rng));
  s.basis = "W";
  s.seed = seed;
  s.inject_fault = params.inject_fault;
  int most = 0;
  for (const auto& n : s.tree->nodes()) most = std::max(most, static_cast<int>(n.children.size()));
  s.expect_mrp = most <= d + 1;
  if (params.checks.empty()) {
    for (const auto& c : registered_checks())
      if (c.invariant) s.checks.push_back(c.name);
  } else {
    s.checks = params.checks;
  }
  return s;
}

Scenario truncate_scenario(const Scenario& s, int horizon) {
  const FilteredTree& tree = *s.tree;
  if (horizon >= tree.horizon()) return s;
  TreeSpec spec;
  spec.horizon = horizon;
  for (const auto& n : tree.spec().nodes)
    if (n.time <= horizon) spec.nodes.push_back(n);
  Scenario out = s;
  out.tree = FilteredTree::build(spec);
  out.processes.clear();
  for (const auto& [name, p] : s.processes) {
    std::vector<Vec> by_node;
    for (const auto& n : out.tree->nodes()) by_node.push_back(p.node_value(tree.index_of(n.id)));
    out.processes.emplace(name, Process::from_nodes(out.tree, p.dim(), by_node));
  }
  out.enlargements.clear();
  for (const auto& [name, g] : s.enlargements) {
    const Filtration& gf = g.filtration();
    std::vector<Partition> atoms;
    for (int t = 0; t <= horizon; ++t) {
      // New leaf of each old leaf is its ancestor at the new horizon.
      UnionFind uf(out.tree->num_leaves());
      for (const auto& atom : gf.partition(t)) {
        int first = -1;
        for (int l : atom) {
          int nl = out.tree->node(out.tree->index_of(tree.node(tree.ancestor(l, horizon)).id)).leaf_begin;
          if (first < 0) first = nl;
          uf.join(nl, first);
        }
      }
      std::map<int, std::vector<int>> classes;
      for (int l = 0; l < out.tree->num_leaves(); ++l) classes[uf.find(l)].push_back(l);
      Partition part;
      for (auto& [root, leaves] : classes) part.push_back(std::move(leaves));
      std::sort(part.begin(), part.end());
      atoms.push_back(std::move(part));
    }
    out.enlargements.emplace(name, Enlargement::make(out.tree, std::move(atoms), name));
  }
  return out;
}

Scenario minimize_failure(const Scenario& s) {
  auto failing = [](const Scenario& c) {
    try {
      return failed_checks(run_scenario(c));
    } catch (const Error&) {
      return std::vector<std::string>{};
    }
  };
  std::vector<std::string> target = failing(s);
  if (target.empty()) return s;
  Scenario best = s;
  best.checks = target;
  for (int h = 1; h < s.tree->horizon(); ++h) {
    Scenario cand = truncate_scenario(best, h);
    if (!failing(cand).empty()) {
      best = cand;
      best.checks = failing(cand);
      break;
    }
  }
  // One failing check is enough to reproduce.
  for (const auto& name : std::vector<std::string>(best.checks)) {
    Scenario single = best;
    single.checks = {name};
    if (!failing(single).empty()) return single;
  }
  return best;
}

json fuzz(const FuzzParams& params) {
  for (const auto& c : params.checks) check_info(c);
  const int count = std::max(0, params.count);
  std::vector<json> instances(sz(count));
  std::vector<json> failures(sz(count));
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < count; i = next++) {
      std::uint64_t seed = params.first_seed + static_cast<std::uint64_t>(i);
      Scenario s;
      json report;
      try {
        s = random_scenario(seed, params);
        report = run_scenario(s);
      } catch (const Error& e) {
        instances[sz(i)] = {{"seed", seed}, {"verdict", "fail"}, {"error", e.what()}, {"failed", json::array()}};
        failures[sz(i)] = {{"seed", seed}, {"error", e.what()}};
        continue;
      }
      json row{{"seed", seed}, {"scenario_hash", report["scenario_hash"]}, {"leaves", s.tree->num_leaves()},
               {"mrp_expected", s.expect_mrp}, {"summary", report["summary"]}, {"verdict", report["verdict"]}};
      std::vector<std::string> failed = failed_checks(report);
      row["failed"] = failed;
      if (!failed.empty()) {
        Scenario small = minimize_failure(s);
        failures[sz(i)] = {{"seed", seed}, {"failed", failed}, {"reproducer", to_json(small)}};
      }
      instances[sz(i)] = std::move(row);
    }
  };
  const int threads = std::clamp(params.threads, 1, std::max(1, count));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json report{{"tool", "filtration-lab"}, {"version", version()}};
  report["params"] = {{"first_seed", params.first_seed}, {"count", count},
                      {"max_branching", params.tree.max_branching}, {"horizon", params.tree.horizon},
                      {"denominator_bound", params.tree.denominator_bound}, {"basis_deficit", params.basis_deficit},
                      {"checks", params.checks}, {"inject_fault", params.inject_fault}};
  json fails = json::array();
  int passed = 0;
  for (int i = 0; i < count; ++i) {
    if (instances[sz(i)]["verdict"] == "pass") ++passed;
    if (!failures[sz(i)].is_null()) fails.push_back(failures[sz(i)]);
  }
  report["instances"] = instances;
  report["failures"] = fails;
  report["summary"] = {{"instances", count}, {"passed", passed}, {"failed", count - passed}};
  report["verdict"] = passed == count ? "pass" : "fail";
  return report;
}

}  // namespace flab
