#include "flab/calculus.hpp"

#include "flab/error.hpp"

namespace flab {

namespace {
std::size_t sz(int i) { return static_cast<std::size_t>(i); }
}  // namespace

Process::Process(TreePtr tree, int dim) : tree_(std::move(tree)), dim_(dim) {
  if (dim < 0) throw Error(ErrorKind::DimensionMismatch, "negative dimension");
  values_.assign(sz(tree_->horizon() + 1), std::vector<Vec>(sz(tree_->num_leaves()), zeros(sz(dim))));
}

Process Process::from_nodes(TreePtr tree, int dim, const std::vector<Vec>& by_node) {
  if (static_cast<int>(by_node.size()) != tree->num_nodes())
    throw Error(ErrorKind::DimensionMismatch, "need one value per node");
  Process p(tree, dim);
  for (int v = 0; v < tree->num_nodes(); ++v) {
    const Node& n = tree->node(v);
    if (static_cast<int>(by_node[sz(v)].size()) != dim)
      throw Error(ErrorKind::DimensionMismatch, "value at '" + n.id + "' has wrong length");
    for (int l = n.leaf_begin; l < n.leaf_end; ++l) p.at(n.time, l) = by_node[sz(v)];
  }
  return p;
}

Process Process::from_function(TreePtr tree, int dim, const std::function<Vec(int, int)>& fn) {
  Process p(tree, dim);
  for (int t = 0; t <= p.horizon(); ++t)
    for (int l = 0; l < p.tree().num_leaves(); ++l) {
      p.at(t, l) = fn(t, l);
      if (static_cast<int>(p.at(t, l).size()) != dim) throw Error(ErrorKind::DimensionMismatch, "from_function");
    }
  return p;
}

Vec Process::increment(int t, int leaf) const { return sub(at(t, leaf), at(t - 1, leaf)); }

const Vec& Process::node_value(int node) const {
  const Node& n = tree_->node(node);
  return at(n.time, n.leaf_begin);
}

Process Process::component(int i) const {
  if (i < 0 || i >= dim_) throw Error(ErrorKind::DimensionMismatch, "component index");
  Process p(tree_, 1);
  for (int t = 0; t <= horizon(); ++t)
    for (int l = 0; l < tree_->num_leaves(); ++l) p.at(t, l)[0] = at(t, l)[sz(i)];
  return p;
}

void require_same_tree(const Process& a, const Process& b) {
  if (a.tree_ptr() != b.tree_ptr()) throw Error(ErrorKind::DimensionMismatch, "processes live on different trees");
}

Process Process::operator+(const Process& o) const {
  require_same_tree(*this, o);
  if (dim_ != o.dim_) throw Error(ErrorKind::DimensionMismatch, "process sum");
  Process p = *this;
  for (int t = 0; t <= horizon(); ++t)
    for (int l = 0; l < tree_->num_leaves(); ++l) p.at(t, l) = add(at(t, l), o.at(t, l));
  return p;
}

Process Process::operator-(const Process& o) const { return *this + o.scaled(-1); }

Process Process::scaled(const Rational& s) const {
  Process p = *this;
  for (auto& row : p.values_)
    for (auto& v : row) v = scale(v, s);
  return p;
}

bool Process::operator==(const Process& o) const {
  return tree_ == o.tree_ && dim_ == o.dim_ && values_ == o.values_;
}

std::string describe(const FilteredTree& tree, const PathPoint& p) {
  return "t=" + std::to_string(p.t) + " node=" + tree.node(tree.ancestor(p.leaf, p.t)).id + " leaf=" + tree.leaf_id(p.leaf);
}

std::optional<PathPoint> first_difference(const Process& a, const Process& b) {
  require_same_tree(a, b);
  if (a.dim() != b.dim()) return PathPoint{0, 0};
  for (int t = 0; t <= a.horizon(); ++t)
    for (int l = 0; l < a.tree().num_leaves(); ++l)
      if (a.at(t, l) != b.at(t, l)) return PathPoint{t, l};
  return std::nullopt;
}

Process concat(const std::vector<Process>& parts) {
  if (parts.empty()) throw Error(ErrorKind::DimensionMismatch, "concat of nothing");
  int dim = 0;
  for (const auto& p : parts) {
    require_same_tree(parts.front(), p);
    dim += p.dim();
  }
  Process out(parts.front().tree_ptr(), dim);
  for (int t = 0; t <= out.horizon(); ++t)
    for (int l = 0; l < out.tree().num_leaves(); ++l) {
      Vec v;
      for (const auto& p : parts) v.insert(v.end(), p.at(t, l).begin(), p.at(t, l).end());
      out.at(t, l) = std::move(v);
    }
  return out;
}

Process constant_process(const TreePtr& tree, const Vec& value) {
  return Process::from_function(tree, static_cast<int>(value.size()), [&](int, int) { return value; });
}

namespace {

// Whether the time-t values are constant on the atoms of filtration time s.
std::optional<PathPoint> constant_on_atoms(const Process& x, const Filtration& f, int t, int s) {
  for (int a = 0; a < f.num_atoms(s); ++a) {
    const auto& atom = f.atom(s, a);
    const Vec& first = x.at(t, atom.front());
    for (int l : atom)
      if (x.at(t, l) != first) return PathPoint{t, l};
  }
  return std::nullopt;
}

}  // namespace

bool is_adapted(const Process& x, const Filtration& f) {
  for (int t = 0; t <= x.horizon(); ++t)
    if (constant_on_atoms(x, f, t, t)) return false;
  return true;
}

std::optional<PathPoint> predictability_violation(const Process& x, const Filtration& f) {
  for (int t = 0; t <= x.horizon(); ++t)
    if (auto p = constant_on_atoms(x, f, t, Filtration::predictable_time(t))) return p;
  return std::nullopt;
}

bool is_predictable(const Process& x, const Filtration& f) { return !predictability_violation(x, f); }

std::optional<AtomPoint> martingale_violation(const Process& x, const Filtration& f) {
  if (!is_adapted(x, f)) return AtomPoint{0, -1};
  const auto& tree = x.tree();
  for (int t = 1; t <= x.horizon(); ++t)
    for (int a = 0; a < f.num_atoms(t - 1); ++a)
      for (int i = 0; i < x.dim(); ++i) {
        Rational s = 0;
        for (int l : f.atom(t - 1, a)) s += tree.leaf_prob(l) * (x.at(t, l)[sz(i)] - x.at(t - 1, l)[sz(i)]);
        if (sgn(s) != 0) return AtomPoint{t, a};
      }
  return std::nullopt;
}

bool is_martingale(const Process& x, const Filtration& f) { return !martingale_violation(x, f); }

void require_martingale(const Process& x, const Filtration& f, const std::string& what) {
  if (auto v = martingale_violation(x, f)) {
    if (v->atom < 0) throw Error(ErrorKind::NotAMartingale, what + " is not adapted to " + f.name());
    throw Error(ErrorKind::NotAMartingale, what + " has nonzero conditional mean increment at t=" + std::to_string(v->t) +
                                               " on " + f.atom_label(v->t - 1, v->atom));
  }
}

Process dual_predictable_projection(const Process& a, const Filtration& f) {
  if (a.tree_ptr() != f.tree_ptr()) throw Error(ErrorKind::DimensionMismatch, "process and filtration trees differ");
  const auto& tree = a.tree();
  Process out(a.tree_ptr(), a.dim());
  for (int t = 1; t <= a.horizon(); ++t)
    for (int g = 0; g < f.num_atoms(t - 1); ++g) {
      const auto& atom = f.atom(t - 1, g);
      Vec mean = zeros(sz(a.dim()));
      for (int l : atom) mean = add(mean, scale(a.increment(t, l), tree.leaf_prob(l)));
      mean = scale(mean, 1 / f.atom_prob(t - 1, g));
      for (int l : atom) out.at(t, l) = add(out.at(t - 1, l), mean);
    }
  return out;
}

Decomposition decompose(const Process& x, const Filtration& f) {
  Process drift = dual_predictable_projection(x, f);
  Process x0 = Process::from_function(x.tree_ptr(), x.dim(), [&](int, int l) { return x.at(0, l); });
  return {x - x0 - drift, drift};
}

Process bracket(const Process& x, const Process& y) {
  require_same_tree(x, y);
  if (x.dim() != y.dim()) throw Error(ErrorKind::DimensionMismatch, "componentwise bracket needs equal dimensions");
  Process out(x.tree_ptr(), x.dim());
  for (int t = 1; t <= x.horizon(); ++t)
    for (int l = 0; l < x.tree().num_leaves(); ++l) {
      Vec dx = x.increment(t, l), dy = y.increment(t, l);
      for (int i = 0; i < x.dim(); ++i) out.at(t, l)[sz(i)] = out.at(t - 1, l)[sz(i)] + dx[sz(i)] * dy[sz(i)];
    }
  return out;
}

Process bracket_matrix(const Process& x, const Process& y) {
  require_same_tree(x, y);
  Process out(x.tree_ptr(), x.dim() * y.dim());
  for (int t = 1; t <= x.horizon(); ++t)
    for (int l = 0; l < x.tree().num_leaves(); ++l) {
      Vec dx = x.increment(t, l), dy = y.increment(t, l);
      for (int i = 0; i < x.dim(); ++i)
        for (int j = 0; j < y.dim(); ++j) {
          std::size_t k = sz(i * y.dim() + j);
          out.at(t, l)[k] = out.at(t - 1, l)[k] + dx[sz(i)] * dy[sz(j)];
        }
    }
  return out;
}

Process predictable_bracket(const Process& x, const Process& y, const Filtration& f) {
  return dual_predictable_projection(bracket(x, y), f);
}

Process predictable_bracket_matrix(const Process& x, const Process& y, const Filtration& f) {
  return dual_predictable_projection(bracket_matrix(x, y), f);
}

Process dot_integral(const Process& h, const Process& x, const Filtration& f) {
  require_same_tree(h, x);
  if (h.dim() != x.dim()) throw Error(ErrorKind::DimensionMismatch, "integrand and integrator dimensions differ");
  if (auto p = predictability_violation(h, f))
    throw Error(ErrorKind::NotPredictable, "integrand not " + f.name() + "-predictable at " + describe(h.tree(), *p));
  Process out(x.tree_ptr(), 1);
  for (int t = 1; t <= x.horizon(); ++t)
    for (int l = 0; l < x.tree().num_leaves(); ++l)
      out.at(t, l)[0] = out.at(t - 1, l)[0] + dot(h.at(t, l), x.increment(t, l));
  return out;
}

Process doleans_exponential(const Process& x, const Rational& a) {
  if (x.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "exponential of a vector process");
  Process out(x.tree_ptr(), 1);
  for (int l = 0; l < x.tree().num_leaves(); ++l) {
    out.at(0, l)[0] = 1;
    for (int t = 1; t <= x.horizon(); ++t) out.at(t, l)[0] = out.at(t - 1, l)[0] * (1 + a * x.increment(t, l)[0]);
  }
  return out;
}

std::vector<int> JumpMeasure::support() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(beta.size()); ++v)
    if (beta[sz(v)]) out.push_back(v);
  return out;
}

JumpMeasure jump_measure(const Process& x) {
  Filtration f = base_filtration(x.tree_ptr());
  if (!is_adapted(x, f)) throw Error(ErrorKind::NotAdapted, "jump measures are built from F-adapted processes");
  JumpMeasure mu;
  mu.tree = x.tree_ptr();
  mu.dim = x.dim();
  mu.beta.resize(sz(x.tree().num_nodes()));
  for (int v = 0; v < x.tree().num_nodes(); ++v) {
    const Node& n = x.tree().node(v);
    if (n.time == 0) continue;
    Vec d = x.increment(n.time, n.leaf_begin);
    if (!is_zero(d)) mu.beta[sz(v)] = std::move(d);
  }
  return mu;
}

Rational Compensator::total(int t, int atom) const {
  Rational s = 0;
  for (const auto& e : table[sz(t)][sz(atom)]) s += e.mass;
  return s;
}

Compensator compensate_measure(const JumpMeasure& mu, const Filtration& f) {
  const auto& tree = *mu.tree;
  Compensator c;
  c.table.resize(sz(tree.horizon() + 1));
  for (int t = 1; t <= tree.horizon(); ++t) {
    c.table[sz(t)].resize(sz(f.num_atoms(t - 1)));
    for (int a = 0; a < f.num_atoms(t - 1); ++a) {
      std::map<Vec, Rational, VecLess> mass;
      for (int l : f.atom(t - 1, a)) {
        int node = tree.ancestor(l, t);
        if (mu.in_support(node)) mass[*mu.beta[sz(node)]] += tree.leaf_prob(l);
      }
      for (auto& [x, m] : mass) c.table[sz(t)][sz(a)].push_back({x, m / f.atom_prob(t - 1, a)});
    }
  }
  return c;
}

const Rational& PredictableFunction::at(int prev_node, const Vec& x) const {
  auto it = table_.find({prev_node, x});
  if (it == table_.end())
    throw Error(ErrorKind::IncompleteFunctionTable, "no entry for node " + std::to_string(prev_node) + " at x=" + format_vec(x));
  return it->second;
}

PredictableFunction PredictableFunction::tabulate(const JumpMeasure& mu, const std::function<Rational(int, int, const Vec&)>& fn) {
  PredictableFunction g;
  for (int v : mu.support()) {
    const Node& n = mu.tree->node(v);
    g.set(n.parent, *mu.beta[sz(v)], fn(n.time, n.parent, *mu.beta[sz(v)]));
  }
  return g;
}

Process star_integral(const PredictableFunction& g, const JumpMeasure& mu, const Filtration& f) {
  const auto& tree = *mu.tree;
  // Raw jump g(t, beta_t) 1_D per (t, leaf).
  Process raw(mu.tree, 1);
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l) {
      int node = tree.ancestor(l, t);
      Rational jump = mu.in_support(node) ? g.at(tree.node(node).parent, *mu.beta[sz(node)]) : Rational(0);
      raw.at(t, l)[0] = raw.at(t - 1, l)[0] + jump;
    }
  return raw - dual_predictable_projection(raw, f);
}

PredictableFunction project_onto_jump_measure(const Process& y, const JumpMeasure& mu) {
  if (y.tree_ptr() != mu.tree) throw Error(ErrorKind::DimensionMismatch, "process and measure trees differ");
  if (y.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "projection takes a scalar martingale");
  const auto& tree = *mu.tree;
  Filtration f = base_filtration(mu.tree);
  require_martingale(y, f, "Y");
  PredictableFunction g;
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& n = tree.node(v);
    if (n.children.empty()) continue;
    // Doleans-measure mean of Delta Y given the jump value, and its total.
    std::map<Vec, std::pair<Rational, Rational>, VecLess> by_value;  // x -> (sum p*dY, sum p)
    for (int c : n.children) {
      if (!mu.in_support(c)) continue;
      const Node& child = tree.node(c);
      auto& acc = by_value[*mu.beta[sz(c)]];
      acc.first += child.branch_prob * y.increment(child.time, child.leaf_begin)[0];
      acc.second += child.branch_prob;
    }
    Rational charged = 0, u_hat = 0;
    for (auto& [x, acc] : by_value) {
      charged += acc.second;
      u_hat += acc.first;
    }
    // A fully charged atom carries no correction: there U_hat = E[dY | F_{t-1}] = 0.
    Rational correction = charged == 1 ? Rational(0) : u_hat / (1 - charged);
    for (auto& [x, acc] : by_value) g.set(v, x, acc.first / acc.second + correction);
  }
  return g;
}

}  // namespace flab
