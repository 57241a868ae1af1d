#pragma once

// Named fixtures and brute-force oracles shared by the test binaries. The
// oracles work from the raw TreeSpec (parent links, branch probabilities) and
// never call the library's filtration or calculus code.

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "flab/calculus.hpp"
#include "flab/rational.hpp"
#include "flab/tree.hpp"

namespace fx {

using flab::Rational;
using flab::Vec;

inline Rational q(const char* s) { return flab::parse_rational(s); }

inline Vec vec(std::initializer_list<const char*> xs) {
  Vec out;
  for (auto x : xs) out.push_back(q(x));
  return out;
}

inline flab::TreeSpec bin1() {
  return {1, {{"root", 0, std::nullopt, 1}, {"u", 1, "root", q("1/2")}, {"d", 1, "root", q("1/2")}}};
}

inline flab::TreeSpec ter1() {
  return {1,
          {{"root", 0, std::nullopt, 1}, {"a", 1, "root", q("1/3")}, {"b", 1, "root", q("1/3")}, {"c", 1, "root", q("1/3")}}};
}

// Two-period tree with uneven branching and probabilities.
inline flab::TreeSpec two_period() {
  return {2,
          {{"r", 0, std::nullopt, 1},
           {"x", 1, "r", q("1/4")},
           {"y", 1, "r", q("3/4")},
           {"x1", 2, "x", q("1/2")},
           {"x2", 2, "x", q("1/2")},
           {"y1", 2, "y", q("1/3")},
           {"y2", 2, "y", q("1/6")},
           {"y3", 2, "y", q("1/2")}}};
}

inline flab::Process by_node(const flab::TreePtr& tree, int dim, const std::map<std::string, Vec>& values) {
  std::vector<Vec> rows(static_cast<std::size_t>(tree->num_nodes()));
  for (const auto& [id, v] : values) rows[static_cast<std::size_t>(tree->index_of(id))] = v;
  return flab::Process::from_nodes(tree, dim, rows);
}

// TER1 basis rows (1,-1,0) and (1,1,-2).
inline flab::Process ter1_basis(const flab::TreePtr& t) {
  return by_node(t, 2, {{"root", vec({"0", "0"})}, {"a", vec({"1", "1"})}, {"b", vec({"-1", "1"})}, {"c", vec({"0", "-2"})}});
}
inline flab::Process ter1_w1(const flab::TreePtr& t) {
  return by_node(t, 1, {{"root", vec({"0"})}, {"a", vec({"1"})}, {"b", vec({"-1"})}, {"c", vec({"0"})}});
}
inline flab::Process ter1_asset(const flab::TreePtr& t) {
  return by_node(t, 1, {{"root", vec({"1"})}, {"a", vec({"3/2"})}, {"b", vec({"1/2"})}, {"c", vec({"1"})}});
}

inline flab::Enlargement ter1_ga(const flab::TreePtr& t) {
  return flab::enlarge(t, {{0, {{"a"}, {"b", "c"}}}, {1, {{"a"}, {"b"}, {"c"}}}}, "GA");
}
inline flab::Enlargement ter1_gb(const flab::TreePtr& t) {
  return flab::enlarge(t, {{0, {{"a", "b"}, {"c"}}}, {1, {{"a"}, {"b"}, {"c"}}}}, "GB");
}

}  // namespace fx

namespace oracle {

using flab::Rational;
using flab::Vec;

// Leaves of a spec with their root-to-leaf id paths and probabilities.
struct Paths {
  std::map<std::string, std::vector<std::string>> path;  // leaf id -> ids at t = 0..T
  std::map<std::string, Rational> prob;
};

inline Paths enumerate(const flab::TreeSpec& spec) {
  std::map<std::string, const flab::NodeSpec*> by_id;
  std::map<std::string, int> children;
  for (const auto& n : spec.nodes) by_id[n.id] = &n;
  for (const auto& n : spec.nodes)
    if (n.parent) ++children[*n.parent];
  Paths out;
  for (const auto& n : spec.nodes) {
    if (children[n.id] > 0) continue;
    std::vector<std::string> p;
    Rational pr = 1;
    for (const flab::NodeSpec* v = &n;; v = by_id.at(*v->parent)) {
      p.push_back(v->id);
      if (!v->parent) break;
      pr *= v->prob;
    }
    std::reverse(p.begin(), p.end());
    out.path[n.id] = p;
    out.prob[n.id] = pr;
  }
  return out;
}

// E[x | the leaves whose path passes through `node`], x keyed by leaf id.
inline Rational mean_below(const Paths& ps, const std::string& node, const std::map<std::string, Rational>& x) {
  Rational num = 0, den = 0;
  for (const auto& [leaf, p] : ps.path)
    if (std::find(p.begin(), p.end(), node) != p.end()) {
      num += ps.prob.at(leaf) * x.at(leaf);
      den += ps.prob.at(leaf);
    }
  return num / den;
}

// E[x | leaf set].
inline Rational mean_on(const Paths& ps, const std::vector<std::string>& leaves, const std::map<std::string, Rational>& x) {
  Rational num = 0, den = 0;
  for (const auto& l : leaves) {
    num += ps.prob.at(l) * x.at(l);
    den += ps.prob.at(l);
  }
  return num / den;
}

// Rank by plain Gaussian elimination, written independently of the library.
inline int rank(std::vector<Vec> rows) {
  int r = 0;
  if (rows.empty()) return 0;
  const std::size_t cols = rows[0].size();
  for (std::size_t c = 0; c < cols && r < static_cast<int>(rows.size()); ++c) {
    std::size_t piv = static_cast<std::size_t>(r);
    while (piv < rows.size() && rows[piv][c] == 0) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[static_cast<std::size_t>(r)]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == static_cast<std::size_t>(r) || rows[i][c] == 0) continue;
      Rational f = rows[i][c] / rows[static_cast<std::size_t>(r)][c];
      for (std::size_t k = 0; k < cols; ++k) rows[i][k] -= f * rows[static_cast<std::size_t>(r)][k];
    }
    ++r;
  }
  return r;
}

// Increment of a node-valued process between a node and its parent, per child.
inline std::vector<Vec> child_increments(const flab::FilteredTree& tree, const flab::Process& x, int node) {
  std::vector<Vec> out;
  for (int c : tree.node(node).children) out.push_back(flab::sub(x.node_value(c), x.node_value(node)));
  return out;
}

// E[dX_t | F_{t-1}] = 0 at every node, from node values alone.
inline bool martingale(const flab::FilteredTree& tree, const flab::Process& x) {
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const auto& n = tree.node(v);
    if (n.children.empty()) continue;
    Vec mean(static_cast<std::size_t>(x.dim()));
    auto inc = child_increments(tree, x, v);
    for (std::size_t j = 0; j < inc.size(); ++j)
      for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += tree.node(n.children[j]).branch_prob * inc[j][i];
    if (!flab::is_zero(mean)) return false;
  }
  return true;
}

// g*(mu-nu) by hand: g at the child minus its probability-weighted mean over siblings.
inline flab::Process star_integral(const flab::PredictableFunction& g, const flab::JumpMeasure& mu) {
  const auto& t = *mu.tree;
  std::vector<Vec> values(static_cast<std::size_t>(t.num_nodes()), Vec{0});
  for (int v = 0; v < t.num_nodes(); ++v) {
    const flab::Node& n = t.node(v);
    Rational mean = 0;
    for (int c : n.children)
      if (mu.in_support(c)) mean += t.node(c).branch_prob * g.at(v, *mu.beta[static_cast<std::size_t>(c)]);
    for (int c : n.children) {
      Rational raw = mu.in_support(c) ? g.at(v, *mu.beta[static_cast<std::size_t>(c)]) : Rational(0);
      values[static_cast<std::size_t>(c)] = Vec{values[static_cast<std::size_t>(v)][0] + raw - mean};
    }
  }
  return flab::Process::from_nodes(mu.tree, 1, values);
}

}  // namespace oracle
