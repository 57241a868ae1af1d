#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "flab/rational.hpp"

namespace flab {

struct NodeSpec {
  std::string id;
  int time = 0;
  std::optional<std::string> parent;
  Rational prob = 1;  // branch probability from the parent; ignored for the root
};

struct TreeSpec {
  int horizon = 1;
  std::vector<NodeSpec> nodes;
};

struct Node {
  std::string id;
  int time = 0;
  int parent = -1;
  std::vector<int> children;
  Rational branch_prob;
  Rational path_prob;
  int leaf_begin = 0;  // leaves below the node are [leaf_begin, leaf_end)
  int leaf_end = 0;
};

// Immutable rooted event tree. Nodes are stored in depth-first preorder with
// children in declaration order, so every node owns a contiguous leaf range.
class FilteredTree {
 public:
  static std::shared_ptr<const FilteredTree> build(const TreeSpec& spec);

  int horizon() const { return horizon_; }
  int root() const { return 0; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_leaves() const { return static_cast<int>(leaves_.size()); }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<int>& nodes_at(int t) const { return by_time_[static_cast<std::size_t>(t)]; }
  int leaf_node(int leaf) const { return leaves_[static_cast<std::size_t>(leaf)]; }
  const std::string& leaf_id(int leaf) const { return node(leaf_node(leaf)).id; }
  const Rational& leaf_prob(int leaf) const { return node(leaf_node(leaf)).path_prob; }
  // Node at time t on the path to the given leaf.
  int ancestor(int leaf, int t) const;
  std::optional<int> find(const std::string& id) const;
  int index_of(const std::string& id) const;  // throws DanglingNode
  std::vector<int> leaves_of(int node) const;

  TreeSpec spec() const;

 private:
  int horizon_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  std::vector<std::vector<int>> by_time_;
  std::vector<std::vector<int>> ancestor_;  // [t][leaf]
  std::unordered_map<std::string, int> index_;
};

using TreePtr = std::shared_ptr<const FilteredTree>;
using Partition = std::vector<std::vector<int>>;  // atoms as sorted leaf lists

// A filtration on the leaves of a tree: one partition per time, atoms sorted by
// their smallest leaf.
class Filtration {
 public:
  Filtration(TreePtr tree, std::vector<Partition> atoms, std::string name);

  const FilteredTree& tree() const { return *tree_; }
  const TreePtr& tree_ptr() const { return tree_; }
  const std::string& name() const { return name_; }
  int horizon() const { return tree_->horizon(); }
  int num_atoms(int t) const { return static_cast<int>(atoms_[static_cast<std::size_t>(t)].size()); }
  const std::vector<int>& atom(int t, int a) const { return atoms_[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]; }
  const Partition& partition(int t) const { return atoms_[static_cast<std::size_t>(t)]; }
  int atom_of(int t, int leaf) const { return atom_of_[static_cast<std::size_t>(t)][static_cast<std::size_t>(leaf)]; }
  const Rational& atom_prob(int t, int a) const { return atom_prob_[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)]; }
  // Time whose atoms a time-t predictable quantity must be constant on.
  static int predictable_time(int t) { return t > 0 ? t - 1 : 0; }
  std::string atom_label(int t, int a) const;  // "{id,id,...}"

 private:
  TreePtr tree_;
  std::vector<Partition> atoms_;
  std::vector<std::vector<int>> atom_of_;
  std::vector<std::vector<Rational>> atom_prob_;
  std::string name_;
};

Filtration base_filtration(const TreePtr& tree);

// Enlarged filtration G on the same tree, validated against the base F.
class Enlargement {
 public:
  static Enlargement make(const TreePtr& tree, std::vector<Partition> g_atoms, std::string name = "G");
  static Enlargement trivial(const TreePtr& tree);

  const Filtration& base() const { return base_; }
  const Filtration& filtration() const { return g_; }
  const TreePtr& tree_ptr() const { return base_.tree_ptr(); }

 private:
  Enlargement(Filtration base, Filtration g) : base_(std::move(base)), g_(std::move(g)) {}
  Filtration base_;
  Filtration g_;
};

// Leaf-id partitions keyed by time. Missing times default to the coarsest
// valid choice: the common refinement of F_t and the previous G atoms.
using EnlargementSpec = std::map<int, std::vector<std::vector<std::string>>>;
Enlargement enlarge(const TreePtr& tree, const EnlargementSpec& spec, std::string name = "G");
EnlargementSpec enlargement_spec(const Enlargement& g);

// Per-atom conditional expectation of a leaf-indexed vector given time t.
std::vector<Rational> conditional_expectation(const Filtration& f, int t, const std::vector<Rational>& x);
// Expands per-atom values back to leaves.
std::vector<Rational> broadcast(const Filtration& f, int t, const std::vector<Rational>& per_atom);

struct StoppingTime {
  std::vector<int> value;  // per leaf, in 0..T or T+1 for "never"
  static int infinity(const FilteredTree& tree) { return tree.horizon() + 1; }
};

// Throws NotAStoppingTime unless {tau <= t} is a union of F_t atoms for all t.
void validate_stopping_time(const FilteredTree& tree, const StoppingTime& tau);
// True when {tau = t} is F_{t-1}-measurable for all t >= 1 and tau is never 0 on a strict subset.
bool is_predictable_time(const FilteredTree& tree, const StoppingTime& tau);

struct RandomTreeParams {
  int max_branching = 3;
  int horizon = 2;
  int denominator_bound = 6;
  int min_branching = 1;
  bool full_root = false;  // root gets exactly max_branching children
};

// Small uniform integer in [lo, hi] from a 64-bit engine; modulo reduction keeps
// the stream identical across standard libraries.
int draw(std::mt19937_64& rng, int lo, int hi);

TreeSpec random_tree_spec(std::mt19937_64& rng, RandomTreeParams params);
TreePtr random_tree(std::uint64_t seed, RandomTreeParams params);

}  // namespace flab
