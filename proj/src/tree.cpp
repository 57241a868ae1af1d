#include "flab/tree.hpp"

#include <algorithm>
#include <functional>

#include "flab/error.hpp"

namespace flab {

std::shared_ptr<const FilteredTree> FilteredTree::build(const TreeSpec& spec) {
  if (spec.horizon < 1) throw Error(ErrorKind::TimeOutOfRange, "horizon must be >= 1");
  std::unordered_map<std::string, std::size_t> by_id;
  std::vector<std::vector<std::size_t>> kids(spec.nodes.size());
  std::optional<std::size_t> root;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (!by_id.emplace(n.id, i).second) throw Error(ErrorKind::DanglingNode, "duplicate node id '" + n.id + "'");
    if (n.time < 0 || n.time > spec.horizon)
      throw Error(ErrorKind::TimeOutOfRange, "node '" + n.id + "' has time outside [0, horizon]");
    if (!n.parent) {
      if (root) throw Error(ErrorKind::DanglingNode, "more than one root");
      if (n.time != 0) throw Error(ErrorKind::DanglingNode, "root '" + n.id + "' must have time 0");
      root = i;
    }
  }
  if (!root) throw Error(ErrorKind::DanglingNode, "no root node");
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& n = spec.nodes[i];
    if (!n.parent) continue;
    auto it = by_id.find(*n.parent);
    if (it == by_id.end()) throw Error(ErrorKind::DanglingNode, "node '" + n.id + "' has unknown parent '" + *n.parent + "'");
    if (spec.nodes[it->second].time + 1 != n.time)
      throw Error(ErrorKind::DanglingNode, "node '" + n.id + "' is not one step after its parent");
    if (sgn(n.prob) <= 0) throw Error(ErrorKind::NonPositiveProbability, "branch to '" + n.id + "'");
    kids[it->second].push_back(i);
  }
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    if (kids[i].empty()) {
      if (spec.nodes[i].time != spec.horizon)
        throw Error(ErrorKind::PrematureLeaf, "node '" + spec.nodes[i].id + "' has no children before the horizon");
      continue;
    }
    Rational sum = 0;
    for (auto k : kids[i]) sum += spec.nodes[k].prob;
    if (sum != 1)
      throw Error(ErrorKind::ProbabilitySumNotOne,
                  "children of '" + spec.nodes[i].id + "' sum to " + format_rational(sum));
  }

  auto tree = std::make_shared<FilteredTree>();
  tree->horizon_ = spec.horizon;
  tree->by_time_.resize(static_cast<std::size_t>(spec.horizon) + 1);
  std::function<int(std::size_t, int, const Rational&)> visit = [&](std::size_t s, int parent, const Rational& pp) {
    int idx = static_cast<int>(tree->nodes_.size());
    Node node;
    node.id = spec.nodes[s].id;
    node.time = spec.nodes[s].time;
    node.parent = parent;
    node.branch_prob = parent < 0 ? Rational(1) : spec.nodes[s].prob;
    node.path_prob = pp * node.branch_prob;
    node.leaf_begin = static_cast<int>(tree->leaves_.size());
    tree->nodes_.push_back(node);
    tree->index_[node.id] = idx;
    tree->by_time_[static_cast<std::size_t>(node.time)].push_back(idx);
    if (kids[s].empty()) tree->leaves_.push_back(idx);
    Rational here = tree->nodes_[static_cast<std::size_t>(idx)].path_prob;
    for (auto k : kids[s]) {
      int c = visit(k, idx, here);
      tree->nodes_[static_cast<std::size_t>(idx)].children.push_back(c);
    }
    tree->nodes_[static_cast<std::size_t>(idx)].leaf_end = static_cast<int>(tree->leaves_.size());
    return idx;
  };
  visit(*root, -1, Rational(1));
  if (tree->nodes_.size() != spec.nodes.size()) throw Error(ErrorKind::DanglingNode, "nodes unreachable from the root");

  tree->ancestor_.assign(static_cast<std::size_t>(spec.horizon) + 1, std::vector<int>(tree->leaves_.size()));
  for (int t = 0; t <= spec.horizon; ++t)
    for (int v : tree->by_time_[static_cast<std::size_t>(t)])
      for (int l = tree->nodes_[static_cast<std::size_t>(v)].leaf_begin; l < tree->nodes_[static_cast<std::size_t>(v)].leaf_end; ++l)
        tree->ancestor_[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)] = v;
  return tree;
}

int FilteredTree::ancestor(int leaf, int t) const {
  if (t < 0 || t > horizon_) throw Error(ErrorKind::TimeOutOfRange, "time " + std::to_string(t));
  return ancestor_[static_cast<std::size_t>(t)][static_cast<std::size_t>(leaf)];
}

std::optional<int> FilteredTree::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int FilteredTree::index_of(const std::string& id) const {
  auto i = find(id);
  if (!i) throw Error(ErrorKind::DanglingNode, "unknown node '" + id + "'");
  return *i;
}

std::vector<int> FilteredTree::leaves_of(int v) const {
  std::vector<int> out;
  for (int l = node(v).leaf_begin; l < node(v).leaf_end; ++l) out.push_back(l);
  return out;
}

TreeSpec FilteredTree::spec() const {
  TreeSpec s;
  s.horizon = horizon_;
  for (const auto& n : nodes_) {
    NodeSpec ns;
    ns.id = n.id;
    ns.time = n.time;
    if (n.parent >= 0) ns.parent = node(n.parent).id;
    ns.prob = n.branch_prob;
    s.nodes.push_back(ns);
  }
  return s;
}

Filtration::Filtration(TreePtr tree, std::vector<Partition> atoms, std::string name)
    : tree_(std::move(tree)), atoms_(std::move(atoms)), name_(std::move(name)) {
  const int n_leaves = tree_->num_leaves();
  if (static_cast<int>(atoms_.size()) != tree_->horizon() + 1)
    throw Error(ErrorKind::TimeOutOfRange, "filtration needs one partition per time");
  atom_of_.assign(atoms_.size(), std::vector<int>(static_cast<std::size_t>(n_leaves), -1));
  atom_prob_.resize(atoms_.size());
  for (std::size_t t = 0; t < atoms_.size(); ++t) {
    auto& part = atoms_[t];
    for (auto& a : part) {
      if (a.empty()) throw Error(ErrorKind::NotARefinement, "empty atom at time " + std::to_string(t));
      std::sort(a.begin(), a.end());
    }
    std::sort(part.begin(), part.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
    for (std::size_t a = 0; a < part.size(); ++a) {
      Rational p = 0;
      for (int l : part[a]) {
        if (l < 0 || l >= n_leaves || atom_of_[t][static_cast<std::size_t>(l)] != -1)
          throw Error(ErrorKind::NotARefinement, "atoms at time " + std::to_string(t) + " do not partition the leaves");
        atom_of_[t][static_cast<std::size_t>(l)] = static_cast<int>(a);
        p += tree_->leaf_prob(l);
      }
      atom_prob_[t].push_back(p);
    }
    for (int l = 0; l < n_leaves; ++l)
      if (atom_of_[t][static_cast<std::size_t>(l)] == -1)
        throw Error(ErrorKind::NotARefinement, "atoms at time " + std::to_string(t) + " miss a leaf");
  }
}

std::string Filtration::atom_label(int t, int a) const {
  std::string s = "{";
  bool first = true;
  for (int l : atom(t, a)) {
    if (!first) s += ",";
    s += tree_->leaf_id(l);
    first = false;
  }
  return s + "}";
}

Filtration base_filtration(const TreePtr& tree) {
  std::vector<Partition> atoms(static_cast<std::size_t>(tree->horizon()) + 1);
  for (int t = 0; t <= tree->horizon(); ++t)
    for (int v : tree->nodes_at(t)) atoms[static_cast<std::size_t>(t)].push_back(tree->leaves_of(v));
  return Filtration(tree, std::move(atoms), "F");
}

Enlargement Enlargement::make(const TreePtr& tree, std::vector<Partition> g_atoms, std::string name) {
  Filtration base = base_filtration(tree);
  Filtration g(tree, std::move(g_atoms), std::move(name));
  for (int t = 0; t <= tree->horizon(); ++t) {
    for (int a = 0; a < g.num_atoms(t); ++a) {
      const auto& atom = g.atom(t, a);
      int f = base.atom_of(t, atom.front());
      for (int l : atom)
        if (base.atom_of(t, l) != f)
          throw Error(ErrorKind::NotARefinement, "G atom " + g.atom_label(t, a) + " at time " + std::to_string(t) +
                                                     " straddles F atoms");
      if (t == 0) continue;
      int prev = g.atom_of(t - 1, atom.front());
      for (int l : atom)
        if (g.atom_of(t - 1, l) != prev)
          throw Error(ErrorKind::NotMonotone, "G atom " + g.atom_label(t, a) + " at time " + std::to_string(t) +
                                                  " straddles atoms of time " + std::to_string(t - 1));
    }
  }
  return Enlargement(std::move(base), std::move(g));
}

Enlargement Enlargement::trivial(const TreePtr& tree) {
  Filtration base = base_filtration(tree);
  std::vector<Partition> atoms;
  for (int t = 0; t <= tree->horizon(); ++t) atoms.push_back(base.partition(t));
  return make(tree, std::move(atoms), "F");
}

namespace {

// Atoms of the common refinement of two partitions, grouped by (a, b) labels.
Partition meet(const FilteredTree& tree, const std::vector<int>& a_of, const std::vector<int>& b_of) {
  std::map<std::pair<int, int>, std::vector<int>> groups;
  for (int l = 0; l < tree.num_leaves(); ++l)
    groups[{a_of[static_cast<std::size_t>(l)], b_of[static_cast<std::size_t>(l)]}].push_back(l);
  Partition out;
  for (auto& [k, v] : groups) out.push_back(std::move(v));
  return out;
}

}  // namespace

Enlargement enlarge(const TreePtr& tree, const EnlargementSpec& spec, std::string name) {
  for (const auto& [t, _] : spec)
    if (t < 0 || t > tree->horizon()) throw Error(ErrorKind::TimeOutOfRange, "enlargement time " + std::to_string(t));
  Filtration base = base_filtration(tree);
  std::vector<Partition> atoms;
  std::vector<int> prev_of(static_cast<std::size_t>(tree->num_leaves()), 0);
  for (int t = 0; t <= tree->horizon(); ++t) {
    auto it = spec.find(t);
    Partition part;
    if (it != spec.end()) {
      for (const auto& ids : it->second) {
        std::vector<int> atom;
        for (const auto& id : ids) {
          int v = tree->index_of(id);
          if (tree->node(v).time != tree->horizon())
            throw Error(ErrorKind::DanglingNode, "'" + id + "' is not a leaf");
          atom.push_back(tree->node(v).leaf_begin);
        }
        part.push_back(std::move(atom));
      }
    } else {
      std::vector<int> f_of(static_cast<std::size_t>(tree->num_leaves()));
      for (int l = 0; l < tree->num_leaves(); ++l) f_of[static_cast<std::size_t>(l)] = base.atom_of(t, l);
      part = meet(*tree, f_of, prev_of);
    }
    for (std::size_t a = 0; a < part.size(); ++a)
      for (int l : part[a]) prev_of[static_cast<std::size_t>(l)] = static_cast<int>(a);
    atoms.push_back(std::move(part));
  }
  return Enlargement::make(tree, std::move(atoms), std::move(name));
}

EnlargementSpec enlargement_spec(const Enlargement& g) {
  EnlargementSpec spec;
  const auto& f = g.filtration();
  for (int t = 0; t <= f.horizon(); ++t) {
    auto& part = spec[t];
    for (int a = 0; a < f.num_atoms(t); ++a) {
      std::vector<std::string> ids;
      for (int l : f.atom(t, a)) ids.push_back(f.tree().leaf_id(l));
      part.push_back(std::move(ids));
    }
  }
  return spec;
}

std::vector<Rational> conditional_expectation(const Filtration& f, int t, const std::vector<Rational>& x) {
  if (t < 0 || t > f.horizon()) throw Error(ErrorKind::TimeOutOfRange, "time " + std::to_string(t));
  if (static_cast<int>(x.size()) != f.tree().num_leaves())
    throw Error(ErrorKind::DimensionMismatch, "leaf vector length");
  std::vector<Rational> out(static_cast<std::size_t>(f.num_atoms(t)));
  for (int a = 0; a < f.num_atoms(t); ++a) {
    Rational s = 0;
    for (int l : f.atom(t, a)) s += x[static_cast<std::size_t>(l)] * f.tree().leaf_prob(l);
    out[static_cast<std::size_t>(a)] = s / f.atom_prob(t, a);
  }
  return out;
}

std::vector<Rational> broadcast(const Filtration& f, int t, const std::vector<Rational>& per_atom) {
  std::vector<Rational> out(static_cast<std::size_t>(f.tree().num_leaves()));
  for (int l = 0; l < f.tree().num_leaves(); ++l) out[static_cast<std::size_t>(l)] = per_atom[static_cast<std::size_t>(f.atom_of(t, l))];
  return out;
}

void validate_stopping_time(const FilteredTree& tree, const StoppingTime& tau) {
  if (static_cast<int>(tau.value.size()) != tree.num_leaves())
    throw Error(ErrorKind::DimensionMismatch, "stopping time needs one value per leaf");
  for (int v : tau.value)
    if (v < 0 || v > StoppingTime::infinity(tree)) throw Error(ErrorKind::TimeOutOfRange, "stopping time value");
  for (int t = 0; t <= tree.horizon(); ++t)
    for (int v : tree.nodes_at(t)) {
      const Node& n = tree.node(v);
      bool first = tau.value[static_cast<std::size_t>(n.leaf_begin)] <= t;
      for (int l = n.leaf_begin; l < n.leaf_end; ++l)
        if ((tau.value[static_cast<std::size_t>(l)] <= t) != first)
          throw Error(ErrorKind::NotAStoppingTime, "{tau <= " + std::to_string(t) + "} splits node '" + n.id + "'");
    }
}

bool is_predictable_time(const FilteredTree& tree, const StoppingTime& tau) {
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int v : tree.nodes_at(t - 1)) {
      const Node& n = tree.node(v);
      bool first = tau.value[static_cast<std::size_t>(n.leaf_begin)] == t;
      for (int l = n.leaf_begin; l < n.leaf_end; ++l)
        if ((tau.value[static_cast<std::size_t>(l)] == t) != first) return false;
    }
  return true;
}

int draw(std::mt19937_64& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng() % span);
}

TreeSpec random_tree_spec(std::mt19937_64& rng, RandomTreeParams params) {
  // Child ids append one decimal digit, so branching stays below 10.
  params.max_branching = std::clamp(params.max_branching, 1, 9);
  params.min_branching = std::clamp(params.min_branching, 1, params.max_branching);
  params.horizon = std::max(1, params.horizon);
  params.denominator_bound = std::max(1, params.denominator_bound);
  TreeSpec spec;
  spec.horizon = params.horizon;
  spec.nodes.push_back({"r", 0, std::nullopt, 1});
  std::vector<std::size_t> frontier{0};
  for (int t = 1; t <= params.horizon; ++t) {
    std::vector<std::size_t> next;
    for (auto parent : frontier) {
      int m = (t == 1 && params.full_root) ? params.max_branching : draw(rng, params.min_branching, params.max_branching);
      std::vector<int> w(static_cast<std::size_t>(m));
      int total = 0;
      for (auto& x : w) total += (x = draw(rng, 1, params.denominator_bound));
      std::string pid = spec.nodes[parent].id;
      for (int k = 0; k < m; ++k) {
        next.push_back(spec.nodes.size());
        spec.nodes.push_back({pid + std::to_string(k), t, pid, Rational(w[static_cast<std::size_t>(k)], total)});
        spec.nodes.back().prob.canonicalize();
      }
    }
    frontier = std::move(next);
  }
  return spec;
}

TreePtr random_tree(std::uint64_t seed, RandomTreeParams params) {
  std::mt19937_64 rng(seed);
  return FilteredTree::build(random_tree_spec(rng, params));
}

}  // namespace flab
