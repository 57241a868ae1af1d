#include "flab/representation.hpp"

#include <algorithm>

#include "flab/error.hpp"

namespace flab {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// Child increments of W at a node as a d x m matrix.
Matrix child_increments(const Process& w, int v) {
  const auto& tree = w.tree();
  const Node& n = tree.node(v);
  Matrix m(sz(w.dim()), n.children.size());
  for (std::size_t j = 0; j < n.children.size(); ++j) {
    const Node& c = tree.node(n.children[j]);
    Vec d = w.increment(c.time, c.leaf_begin);
    for (int i = 0; i < w.dim(); ++i) m(sz(i), j) = d[sz(i)];
  }
  return m;
}

Rational weighted_dot(const Vec& a, const Vec& b, const Vec& p) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += p[i] * a[i] * b[i];
  return s;
}

// First mean-zero direction outside the row space, made orthogonal to it in L^2(P).
Vec unreachable_direction(const Matrix& rows, const Vec& p) {
  const std::size_t m = p.size();
  std::vector<Vec> basis;
  for (std::size_t i = 0; i < rows.rows(); ++i) {
    Vec r = rows.row(i);
    for (const auto& b : basis) r = sub(r, scale(b, weighted_dot(r, b, p) / weighted_dot(b, b, p)));
    if (!is_zero(r)) basis.push_back(r);
  }
  for (std::size_t j = 0; j + 1 < m; ++j) {
    Vec cand = zeros(m);
    cand[j] = 1;
    cand[m - 1] = -p[j] / p[m - 1];
    for (const auto& b : basis) cand = sub(cand, scale(b, weighted_dot(cand, b, p) / weighted_dot(b, b, p)));
    if (!is_zero(cand)) return primitive_integer(cand);
  }
  return {};
}

void require_mrp(const Process& w) {
  MrpReport r = check_mrp(w);
  if (!r.mrp)
    throw Error(ErrorKind::NoRepresentation,
                "W lacks the representation property at '" + w.tree().node(*r.failing_node).id + "'", r.witness);
}

}  // namespace

MrpReport check_mrp(const Process& w) {
  const auto& tree = w.tree();
  require_martingale(w, base_filtration(w.tree_ptr()), "W");
  MrpReport report;
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& n = tree.node(v);
    if (n.children.empty()) continue;
    Matrix m = child_increments(w, v);
    MrpNodeReport nr{v, static_cast<int>(n.children.size()), static_cast<int>(rank(m))};
    report.nodes.push_back(nr);
    if (!nr.spans() && report.mrp) {
      report.mrp = false;
      report.failing_node = v;
      Vec p;
      for (int c : n.children) p.push_back(tree.node(c).branch_prob);
      report.witness = unreachable_direction(m, p);
    }
  }
  return report;
}

Process representation_coefficient(const Process& x, const Process& w) {
  require_same_tree(x, w);
  if (x.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "representation of a scalar martingale");
  Filtration f = base_filtration(w.tree_ptr());
  require_martingale(w, f, "W");
  require_martingale(x, f, "X");
  const auto& tree = w.tree();
  Process h(w.tree_ptr(), w.dim());
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& n = tree.node(v);
    if (n.children.empty()) continue;
    Matrix a = child_increments(w, v).transpose();
    Vec b;
    for (int c : n.children) b.push_back(x.increment(n.time + 1, tree.node(c).leaf_begin)[0]);
    auto sol = solve(a, b);
    if (!sol) throw Error(ErrorKind::NoRepresentation, "X is not reachable from W at '" + n.id + "'");
    for (int l = n.leaf_begin; l < n.leaf_end; ++l) h.at(n.time + 1, l) = *sol;
  }
  return h;
}

Multiplicity conditional_multiplicity(const FilteredTree& tree, int node, std::optional<int> dim) {
  const Node& n = tree.node(node);
  Multiplicity out;
  out.count = static_cast<int>(n.children.size());
  out.witness.t = n.time + 1;
  out.witness.node = node;
  for (int c : n.children) out.witness.subatoms.push_back({c, tree.leaves_of(c), tree.node(c).branch_prob});
  auto ids = [&](const Subatom& s) {
    std::vector<std::string> v;
    for (int l : s.leaves) v.push_back(tree.leaf_id(l));
    return v;
  };
  std::stable_sort(out.witness.subatoms.begin(), out.witness.subatoms.end(), [&](const Subatom& a, const Subatom& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return ids(a) < ids(b);
  });
  if (dim && out.count <= *dim + 1) out.witness.subatoms.resize(sz(*dim + 1), Subatom{-1, {}, 0});
  return out;
}

Process single_jump_coefficient(const std::vector<Rational>& xi, const StoppingTime& r, const Process& w) {
  const auto& tree = w.tree();
  validate_stopping_time(tree, r);
  if (static_cast<int>(xi.size()) != tree.num_leaves()) throw Error(ErrorKind::DimensionMismatch, "xi needs one value per leaf");
  require_mrp(w);
  for (int t = 0; t <= tree.horizon(); ++t)
    for (int v : tree.nodes_at(t)) {
      const Node& n = tree.node(v);
      if (r.value[sz(n.leaf_begin)] != t) continue;
      for (int l = n.leaf_begin; l < n.leaf_end; ++l)
        if (xi[sz(l)] != xi[sz(n.leaf_begin)])
          throw Error(ErrorKind::NotMeasurable, "xi is not F_R-measurable at '" + n.id + "'");
    }
  Process jump = Process::from_function(w.tree_ptr(), 1, [&](int t, int l) {
    return Vec{r.value[sz(l)] <= t ? xi[sz(l)] : Rational(0)};
  });
  Filtration f = base_filtration(w.tree_ptr());
  Process z = jump - dual_predictable_projection(jump, f);
  return representation_coefficient(z, w);
}

Reconstruction reconstruct_accessible(const Process& w) {
  require_mrp(w);
  const auto& tree = w.tree();
  Reconstruction out{w.dim(), Process(w.tree_ptr(), w.dim() + 1), {}};
  for (int t = 1; t <= tree.horizon(); ++t) {
    Rational weight = pow2(-t);
    for (int v : tree.nodes_at(t - 1)) {
      Multiplicity m = conditional_multiplicity(tree, v, w.dim());
      const auto& subs = m.witness.subatoms;
      const Node& n = tree.node(v);
      for (int l = n.leaf_begin; l < n.leaf_end; ++l) {
        int child = tree.ancestor(l, t);
        for (std::size_t h = 0; h < subs.size(); ++h) {
          Rational ind = subs[h].node == child ? Rational(1) : Rational(0);
          out.x2.at(t, l)[h] = out.x2.at(t - 1, l)[h] + weight * (ind - subs[h].prob);
        }
      }
      out.witnesses.push_back(std::move(m.witness));
    }
  }
  return out;
}

Orthogonalization orthogonalize(const Process& m) {
  require_martingale(m, base_filtration(m.tree_ptr()), "M");
  JumpMeasure mu = jump_measure(m);
  ConstraintSystem cs = detect_fpcc(mu);
  Process x = constraint_martingales(mu, cs);
  return {std::move(mu), std::move(cs), std::move(x)};
}

Process translate_integrand(const Process& h, const Orthogonalization& o) {
  const auto& tree = *o.mu.tree;
  if (h.dim() != o.mu.dim) throw Error(ErrorKind::DimensionMismatch, "integrand dimension");
  if (auto p = predictability_violation(h, base_filtration(o.mu.tree)))
    throw Error(ErrorKind::NotPredictable, "integrand at " + describe(tree, *p));
  Process out(o.mu.tree, o.cs.n);
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l) {
      int v = tree.ancestor(l, t - 1);
      for (int k = 0; k < o.cs.n; ++k) {
        const auto& a = o.cs.slot(v, k);
        if (!a) continue;
        Rational e = truncation_weight(*a);
        if (sgn(e) != 0) out.at(t, l)[sz(k)] = dot(h.at(t, l), *a) / e;
      }
    }
  return out;
}

ConstraintSystem jump_constraint(const Process& w) {
  require_mrp(w);
  ConstraintSystem cs = detect_fpcc(jump_measure(w));
  for (int v = 0; v < w.tree().num_nodes(); ++v) {
    if (w.tree().node(v).children.empty()) continue;
    int used = 0;
    for (int k = 0; k < cs.n; ++k) used += cs.slot(v, k).has_value();
    if (used > w.dim() + 1)
      throw Error(ErrorKind::NoRepresentation, "more than d+1 jump values at '" + w.tree().node(v).id + "'");
  }
  return cs;
}

}  // namespace flab
