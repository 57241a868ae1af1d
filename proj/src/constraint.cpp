#include "flab/constraint.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "flab/error.hpp"

namespace flab {

namespace {
std::size_t sz(int i) { return static_cast<std::size_t>(i); }
}  // namespace

Rational truncation_weight(const Vec& x) {
  Rational n = l1_norm(x);
  return n < 1 ? n : Rational(1);
}

std::optional<int> ConstraintSystem::slot_of(int node, const Vec& x) const {
  const auto& row = alpha[sz(node)];
  for (int k = 0; k < static_cast<int>(row.size()); ++k)
    if (row[sz(k)] && *row[sz(k)] == x) return k;
  return std::nullopt;
}

ConstraintSystem detect_fpcc(const JumpMeasure& mu) {
  const auto& tree = *mu.tree;
  ConstraintSystem cs;
  cs.tree = mu.tree;
  cs.dim = mu.dim;
  cs.alpha.resize(sz(tree.num_nodes()));
  std::vector<std::vector<Vec>> values(sz(tree.num_nodes()));
  for (int v = 0; v < tree.num_nodes(); ++v) {
    std::set<Vec, VecLess> distinct;
    for (int c : tree.node(v).children)
      if (mu.in_support(c)) distinct.insert(*mu.beta[sz(c)]);
    values[sz(v)].assign(distinct.begin(), distinct.end());
    cs.n = std::max(cs.n, static_cast<int>(distinct.size()));
  }
  for (int v = 0; v < tree.num_nodes(); ++v) {
    if (tree.node(v).children.empty()) continue;
    auto& row = cs.alpha[sz(v)];
    row.resize(sz(cs.n));
    for (std::size_t k = 0; k < values[sz(v)].size(); ++k) row[k] = values[sz(v)][k];
  }
  return cs;
}

void validate_constraint(const ConstraintSystem& cs, const JumpMeasure& mu) {
  if (cs.tree != mu.tree) throw Error(ErrorKind::ConstraintMismatch, "constraint system built on another tree");
  const auto& tree = *mu.tree;
  for (int v = 0; v < tree.num_nodes(); ++v) {
    if (tree.node(v).children.empty()) continue;
    const auto& row = cs.alpha[sz(v)];
    if (static_cast<int>(row.size()) != cs.n) throw Error(ErrorKind::ConstraintMismatch, "ragged slot table");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (!row[i]) continue;
      if (is_zero(*row[i]) || sgn(truncation_weight(*row[i])) == 0)
        throw Error(ErrorKind::ConstraintMismatch, "zero constraint value at '" + tree.node(v).id + "'");
      for (std::size_t j = i + 1; j < row.size(); ++j)
        if (row[j] && *row[i] == *row[j])
          throw Error(ErrorKind::ConstraintMismatch, "repeated constraint value at '" + tree.node(v).id + "'");
    }
    for (int c : tree.node(v).children)
      if (mu.in_support(c) && !cs.slot_of(v, *mu.beta[sz(c)]))
        throw Error(ErrorKind::ConstraintMismatch,
                    "jump " + format_vec(*mu.beta[sz(c)]) + " at '" + tree.node(c).id + "' matches no slot");
  }
}

PredictableFunction constraint_function(const JumpMeasure& mu, const ConstraintSystem& cs, int k) {
  return PredictableFunction::tabulate(mu, [&](int, int v, const Vec& x) {
    const auto& a = cs.slot(v, k);
    return (a && *a == x) ? truncation_weight(x) : Rational(0);
  });
}

Process constraint_martingales(const JumpMeasure& mu, const ConstraintSystem& cs) {
  validate_constraint(cs, mu);
  Filtration f = base_filtration(mu.tree);
  Process out(mu.tree, cs.n);
  for (int k = 0; k < cs.n; ++k) {
    Process xk = star_integral(constraint_function(mu, cs, k), mu, f);
    for (int t = 0; t <= out.horizon(); ++t)
      for (int l = 0; l < out.tree().num_leaves(); ++l) out.at(t, l)[sz(k)] = xk.at(t, l)[0];
  }
  return out;
}

StarToDot star_to_dot(const PredictableFunction& g, const JumpMeasure& mu, const ConstraintSystem& cs) {
  validate_constraint(cs, mu);
  const auto& tree = *mu.tree;
  Filtration f = base_filtration(mu.tree);
  Process h(mu.tree, cs.n);
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l) {
      int v = tree.ancestor(l, t - 1);
      for (int k = 0; k < cs.n; ++k) {
        const auto& a = cs.slot(v, k);
        if (!a) continue;
        Rational e = truncation_weight(*a);
        if (sgn(e) != 0) h.at(t, l)[sz(k)] = g.at(v, *a) / e;
      }
    }
  Process x = constraint_martingales(mu, cs);
  Process star = star_integral(g, mu, f);
  Process dot = dot_integral(h, x, f);
  auto mismatch = first_difference(star, dot);
  return {h, x, star, dot, mismatch};
}

PredictableFunction dot_to_star(const Process& h, const JumpMeasure& mu, const ConstraintSystem& cs) {
  validate_constraint(cs, mu);
  if (h.dim() != cs.n) throw Error(ErrorKind::DimensionMismatch, "integrand must have one entry per slot");
  Filtration f = base_filtration(mu.tree);
  if (auto p = predictability_violation(h, f))
    throw Error(ErrorKind::NotPredictable, "integrand at " + describe(h.tree(), *p));
  return PredictableFunction::tabulate(mu, [&](int t, int v, const Vec& x) {
    const Vec& hv = h.at(t, mu.tree->node(v).leaf_begin);
    Rational s = 0;
    for (int k = 0; k < cs.n; ++k) {
      const auto& a = cs.slot(v, k);
      if (a && *a == x) s += hv[sz(k)] * truncation_weight(x);
    }
    return s;
  });
}

AccessiblePartition canonical_accessible_partition(const JumpMeasure& mu, const std::function<Rational(int)>& weight) {
  const auto& tree = *mu.tree;
  AccessiblePartition part;
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& n = tree.node(v);
    if (n.children.empty()) continue;
    std::map<Vec, std::vector<int>, VecLess> by_value;
    std::vector<int> still;
    for (int c : n.children) {
      auto leaves = tree.leaves_of(c);
      auto& dest = mu.in_support(c) ? by_value[*mu.beta[sz(c)]] : still;
      dest.insert(dest.end(), leaves.begin(), leaves.end());
    }
    AccessibleSlot slot;
    slot.node = v;
    slot.weight = weight ? weight(v) : Rational(1);
    for (auto& [x, leaves] : by_value) slot.classes.push_back(std::move(leaves));
    if (!still.empty()) slot.classes.push_back(std::move(still));
    part.n = std::max(part.n, static_cast<int>(slot.classes.size()));
    part.slots.push_back(std::move(slot));
  }
  for (auto& s : part.slots) s.classes.resize(sz(part.n));
  return part;
}

AccessibleStarToDot accessible_star_to_dot(const PredictableFunction& g, const JumpMeasure& mu,
                                           const AccessiblePartition& partition) {
  const auto& tree = *mu.tree;
  Filtration f = base_filtration(mu.tree);
  const int n = partition.n;
  // Per node: class index of each leaf, class probabilities, class jump value.
  std::vector<const AccessibleSlot*> slot_of(sz(tree.num_nodes()), nullptr);
  for (const auto& s : partition.slots) {
    if (s.node < 0 || s.node >= tree.num_nodes() || tree.node(s.node).children.empty())
      throw Error(ErrorKind::PartitionNotMeasurable, "slot on a terminal or unknown node");
    if (slot_of[sz(s.node)]) throw Error(ErrorKind::PartitionNotMeasurable, "two slots on '" + tree.node(s.node).id + "'");
    if (static_cast<int>(s.classes.size()) != n) throw Error(ErrorKind::PartitionNotMeasurable, "slot with wrong class count");
    if (sgn(s.weight) == 0) throw Error(ErrorKind::VanishingWeight, "weight vanishes at '" + tree.node(s.node).id + "'");
    slot_of[sz(s.node)] = &s;
  }
  std::vector<int> class_of(sz(tree.num_leaves()));
  Process gain(mu.tree, 1), h(mu.tree, n), y(mu.tree, n);
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int v : tree.nodes_at(t - 1)) {
      const Node& node = tree.node(v);
      const AccessibleSlot* s = slot_of[sz(v)];
      if (!s) throw Error(ErrorKind::PartitionNotMeasurable, "no slot for '" + node.id + "'");
      std::vector<Rational> prob(sz(n));
      std::vector<Vec> value(sz(n));
      std::vector<int> seen(sz(tree.num_leaves()), 0);
      for (int k = 0; k < n; ++k) {
        std::optional<Vec> common;
        for (int l : s->classes[sz(k)]) {
          if (l < node.leaf_begin || l >= node.leaf_end || seen[sz(l)]++)
            throw Error(ErrorKind::PartitionNotMeasurable, "classes do not partition '" + node.id + "'");
          class_of[sz(l)] = k;
          prob[sz(k)] += tree.leaf_prob(l) / node.path_prob;
          int c = tree.ancestor(l, t);
          Vec jump = mu.in_support(c) ? *mu.beta[sz(c)] : zeros(sz(mu.dim));
          if (common && *common != jump)
            throw Error(ErrorKind::ConstraintMismatch, "jump not constant on a class at '" + node.id + "'");
          common = jump;
        }
        value[sz(k)] = common ? *common : zeros(sz(mu.dim));
      }
      for (int l = node.leaf_begin; l < node.leaf_end; ++l) {
        if (!seen[sz(l)]) throw Error(ErrorKind::PartitionNotMeasurable, "classes do not cover '" + node.id + "'");
        int c = tree.ancestor(l, t);
        int k = class_of[sz(l)];
        for (int other = tree.node(c).leaf_begin; other < tree.node(c).leaf_end; ++other)
          if (class_of[sz(other)] != k)
            throw Error(ErrorKind::PartitionNotMeasurable, "class splits node '" + tree.node(c).id + "'");
      }
      for (int l = node.leaf_begin; l < node.leaf_end; ++l) {
        gain.at(t, l)[0] = 1 / s->weight;
        for (int k = 0; k < n; ++k) {
          Rational ind = class_of[sz(l)] == k ? Rational(1) : Rational(0);
          y.at(t, l)[sz(k)] = y.at(t - 1, l)[sz(k)] + s->weight * (ind - prob[sz(k)]);
          if (!is_zero(value[sz(k)])) h.at(t, l)[sz(k)] = g.at(v, value[sz(k)]) / s->weight;
        }
      }
    }
  Process star = star_integral(g, mu, f);
  Process dot = dot_integral(h, y, f);
  auto mismatch = first_difference(star, dot);
  return {gain, h, y, star, dot, mismatch};
}

Matrix solve_accessible_K(const Matrix& gamma, const Vec& p) {
  const std::size_t n = gamma.rows(), d = gamma.cols();
  if (p.size() != n) throw Error(ErrorKind::DimensionMismatch, "p must have one entry per row of gamma");
  Rational total = 0;
  for (const auto& x : p) {
    if (sgn(x) < 0) throw Error(ErrorKind::InvalidProbabilityVector, "negative entry in p");
    total += x;
  }
  if (total != 1) throw Error(ErrorKind::InvalidProbabilityVector, "p sums to " + format_rational(total));
  for (std::size_t i = 0; i < d; ++i)
    if (sgn(dot(gamma.column(i), p)) != 0)
      throw Error(ErrorKind::NotOrthogonal, "column " + std::to_string(i) + " of gamma is not orthogonal to p");
  std::vector<Vec> cols;
  for (std::size_t i = 0; i < d; ++i) cols.push_back(gamma.column(i));
  cols.push_back(p);
  Matrix span = Matrix::from_columns(cols);
  if (rank(span) < n) {
    auto residual = null_space(span.transpose());
    throw Error(ErrorKind::SpanDeficient, "gamma together with p does not span R^n", residual.front());
  }
  Matrix k(d, n);
  for (std::size_t h = 0; h < n; ++h) {
    Vec target(n);
    for (std::size_t j = 0; j < n; ++j) target[j] = (j == h ? Rational(1) : Rational(0)) - p[h];
    auto x = solve(gamma, target);
    if (!x) throw Error(ErrorKind::SpanDeficient, "target for h=" + std::to_string(h) + " is out of reach", target);
    for (std::size_t i = 0; i < d; ++i) k(i, h) = (*x)[i];
  }
  return k;
}

Matrix solve_inaccessible_K(const Matrix& gamma) {
  const std::size_t n = gamma.rows(), d = gamma.cols();
  if (rank(gamma) < n) throw Error(ErrorKind::RankDeficient, "gamma has rank below n");
  Matrix k(d, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto x = solve(gamma, unit_vector(n, j));
    for (std::size_t i = 0; i < d; ++i) k(i, j) = (*x)[i];
  }
  return k;
}

}  // namespace flab
