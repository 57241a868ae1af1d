#include "flab/generators.hpp"

#include <map>

#include "flab/linalg.hpp"

namespace flab {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

Vec mean_zero(const Vec& x, const std::vector<Rational>& p) {
  Rational mean = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mean += p[i] * x[i];
  Vec out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mean;
  return out;
}

// Node-valued process from per-node child increments (rows: components).
Process integrate_increments(const TreePtr& tree, int dim, const std::vector<std::vector<Vec>>& rows) {
  std::vector<Vec> by_node(sz(tree->num_nodes()), zeros(sz(dim)));
  for (int v = 0; v < tree->num_nodes(); ++v) {
    const Node& n = tree->node(v);
    for (std::size_t j = 0; j < n.children.size(); ++j) {
      Vec& child = by_node[sz(n.children[j])];
      for (int i = 0; i < dim; ++i) child[sz(i)] = by_node[sz(v)][sz(i)] + rows[sz(v)][sz(i)][j];
    }
  }
  return Process::from_nodes(tree, dim, by_node);
}

}  // namespace

Rational random_rational(std::mt19937_64& rng, int bound, int max_den) {
  Rational r(draw(rng, -bound, bound));
  r /= draw(rng, 1, max_den);
  return r;
}

Process random_basis(const TreePtr& tree, int d, std::mt19937_64& rng) {
  std::vector<std::vector<Vec>> rows(sz(tree->num_nodes()));
  for (int v = 0; v < tree->num_nodes(); ++v) {
    const Node& n = tree->node(v);
    const std::size_t m = n.children.size();
    if (m == 0) continue;
    std::vector<Rational> p;
    for (int c : n.children) p.push_back(tree->node(c).branch_prob);
    const std::size_t want = std::min<std::size_t>(m - 1, sz(d));
    std::vector<Vec> block;
    for (int attempt = 0; attempt < 32; ++attempt) {
      block.clear();
      for (int i = 0; i < d; ++i) {
        Vec x(m);
        for (auto& e : x) e = draw(rng, -2, 2);
        block.push_back(mean_zero(x, p));
      }
      if (rank(Matrix::from_rows(block)) == want) break;
      block.clear();
    }
    if (block.empty()) {
      // Compensated child indicators reach full rank deterministically.
      for (int i = 0; i < d; ++i)
        block.push_back(static_cast<std::size_t>(i) < want ? mean_zero(unit_vector(m, sz(i)), p) : zeros(m));
    }
    rows[sz(v)] = std::move(block);
  }
  return integrate_increments(tree, d, rows);
}

Process random_martingale(const TreePtr& tree, int dim, std::mt19937_64& rng, int bound) {
  std::vector<std::vector<Vec>> rows(sz(tree->num_nodes()));
  for (int v = 0; v < tree->num_nodes(); ++v) {
    const Node& n = tree->node(v);
    const std::size_t m = n.children.size();
    if (m == 0) continue;
    std::vector<Rational> p;
    for (int c : n.children) p.push_back(tree->node(c).branch_prob);
    for (int i = 0; i < dim; ++i) {
      Vec x(m);
      bool still = draw(rng, 0, 5) == 0;
      for (auto& e : x) e = still ? 0 : draw(rng, -bound, bound);
      rows[sz(v)].push_back(mean_zero(x, p));
    }
  }
  return integrate_increments(tree, dim, rows);
}

Enlargement random_enlargement(const TreePtr& tree, std::mt19937_64& rng) {
  Filtration f = base_filtration(tree);
  if (draw(rng, 0, 3) == 0) return Enlargement::trivial(tree);
  std::vector<Partition> atoms;
  std::vector<int> prev(sz(tree->num_leaves()), 0);
  for (int t = 0; t <= tree->horizon(); ++t) {
    std::map<std::pair<int, int>, std::vector<int>> joined;
    for (int l = 0; l < tree->num_leaves(); ++l) joined[{f.atom_of(t, l), prev[sz(l)]}].push_back(l);
    Partition part;
    for (auto& [key, leaves] : joined) {
      if (leaves.size() > 1 && draw(rng, 0, 1) == 1) {
        std::vector<int> left, right;
        for (int l : leaves) (draw(rng, 0, 1) ? left : right).push_back(l);
        if (!left.empty() && !right.empty()) {
          part.push_back(std::move(left));
          part.push_back(std::move(right));
          continue;
        }
      }
      part.push_back(leaves);
    }
    for (std::size_t a = 0; a < part.size(); ++a)
      for (int l : part[a]) prev[sz(l)] = static_cast<int>(a);
    atoms.push_back(std::move(part));
  }
  return Enlargement::make(tree, std::move(atoms), "G");
}

PredictableFunction random_function(const JumpMeasure& mu, std::mt19937_64& rng) {
  return PredictableFunction::tabulate(mu, [&](int, int, const Vec&) { return random_rational(rng); });
}

Process random_predictable(const TreePtr& tree, int dim, std::mt19937_64& rng) {
  std::vector<Vec> per_node(sz(tree->num_nodes()));
  for (auto& v : per_node) {
    v.resize(sz(dim));
    for (auto& x : v) x = random_rational(rng);
  }
  // Value at time t is drawn from the node at t-1.
  return Process::from_function(tree, dim, [&](int t, int l) {
    return t == 0 ? zeros(sz(dim)) : per_node[sz(tree->ancestor(l, t - 1))];
  });
}

}  // namespace flab
