#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flab/rational.hpp"
#include "flab/tree.hpp"

namespace flab {

// A d-dimensional process on a tree, stored path-wise: one vector per
// (time, leaf). Processes adapted to the base filtration are constant on each
// node's leaves; processes adapted to an enlargement may split a node.
class Process {
 public:
  Process(TreePtr tree, int dim);
  static Process from_nodes(TreePtr tree, int dim, const std::vector<Vec>& by_node);
  static Process from_function(TreePtr tree, int dim, const std::function<Vec(int t, int leaf)>& fn);

  const TreePtr& tree_ptr() const { return tree_; }
  const FilteredTree& tree() const { return *tree_; }
  int dim() const { return dim_; }
  int horizon() const { return tree_->horizon(); }

  const Vec& at(int t, int leaf) const { return values_[static_cast<std::size_t>(t)][static_cast<std::size_t>(leaf)]; }
  Vec& at(int t, int leaf) { return values_[static_cast<std::size_t>(t)][static_cast<std::size_t>(leaf)]; }
  // Delta X_t on the path to leaf; t >= 1.
  Vec increment(int t, int leaf) const;
  // Value at the node's time on any of its leaves (the first one).
  const Vec& node_value(int node) const;
  Process component(int i) const;

  Process operator+(const Process& o) const;
  Process operator-(const Process& o) const;
  Process scaled(const Rational& s) const;
  bool operator==(const Process& o) const;

 private:
  TreePtr tree_;
  int dim_;
  std::vector<std::vector<Vec>> values_;
};

struct PathPoint {
  int t = 0;
  int leaf = 0;
};
std::string describe(const FilteredTree& tree, const PathPoint& p);

std::optional<PathPoint> first_difference(const Process& a, const Process& b);
Process concat(const std::vector<Process>& parts);
Process constant_process(const TreePtr& tree, const Vec& value);
void require_same_tree(const Process& a, const Process& b);

bool is_adapted(const Process& x, const Filtration& f);
// Time-t values constant on the atoms of time t-1 (time 0 on atoms of time 0).
bool is_predictable(const Process& x, const Filtration& f);
std::optional<PathPoint> predictability_violation(const Process& x, const Filtration& f);

// First (time, atom) where E[Delta X_t | f_{t-1}] != 0 or x is not adapted.
struct AtomPoint {
  int t = 0;      // time of the increment
  int atom = 0;   // atom of f at time t-1
};
std::optional<AtomPoint> martingale_violation(const Process& x, const Filtration& f);
bool is_martingale(const Process& x, const Filtration& f);
void require_martingale(const Process& x, const Filtration& f, const std::string& what);

Process dual_predictable_projection(const Process& a, const Filtration& f);

struct Decomposition {
  Process martingale_part;
  Process drift_part;
};
Decomposition decompose(const Process& x, const Filtration& f);

// Componentwise [X_i, Y_i]; dimensions must agree.
Process bracket(const Process& x, const Process& y);
// Matrix bracket, row-major: component i*dim(y)+j is [X_i, Y_j].
Process bracket_matrix(const Process& x, const Process& y);
Process predictable_bracket(const Process& x, const Process& y, const Filtration& f);
Process predictable_bracket_matrix(const Process& x, const Process& y, const Filtration& f);

// Scalar process sum_{s<=t} H_s . Delta X_s; H must be f-predictable.
Process dot_integral(const Process& h, const Process& x, const Filtration& f);

// prod_{s<=t} (1 + a Delta X_s) for scalar X.
Process doleans_exponential(const Process& x, const Rational& a);

// Integer-valued random measure of the jumps of an F-adapted process.
struct JumpMeasure {
  TreePtr tree;
  int dim = 0;
  std::vector<std::optional<Vec>> beta;  // per node; set iff the node is in the support D

  bool in_support(int node) const { return beta[static_cast<std::size_t>(node)].has_value(); }
  std::vector<int> support() const;
};
JumpMeasure jump_measure(const Process& x);

struct CompensatorEntry {
  Vec x;
  Rational mass;
};
// table[t][a]: masses charged at time t given atom a of time t-1, sorted by x.
struct Compensator {
  std::vector<std::vector<std::vector<CompensatorEntry>>> table;
  Rational total(int t, int atom) const;
};
Compensator compensate_measure(const JumpMeasure& mu, const Filtration& f);

// Predictable function g(t, x) stored sparsely on (node at t-1, x) pairs.
class PredictableFunction {
 public:
  using Key = std::pair<int, Vec>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      if (a.first != b.first) return a.first < b.first;
      return lex_compare(a.second, b.second) < 0;
    }
  };

  void set(int prev_node, const Vec& x, const Rational& value) { table_[{prev_node, x}] = value; }
  const Rational& at(int prev_node, const Vec& x) const;
  const std::map<Key, Rational, KeyLess>& entries() const { return table_; }

  // Evaluates fn on every support point of mu.
  static PredictableFunction tabulate(const JumpMeasure& mu, const std::function<Rational(int t, int prev_node, const Vec& x)>& fn);

 private:
  std::map<Key, Rational, KeyLess> table_;
};

// g * (mu - nu) compensated in filtration f; g is read at the F_{t-1} node.
Process star_integral(const PredictableFunction& g, const JumpMeasure& mu, const Filtration& f);

// g with [Y, M]^{F.p} = [g * (mu - nu), M]^{F.p}, for a scalar F-martingale Y and
// the jump measure of an F-martingale M.
PredictableFunction project_onto_jump_measure(const Process& y, const JumpMeasure& mu);

}  // namespace flab
