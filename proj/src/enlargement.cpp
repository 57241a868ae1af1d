#include "flab/enlargement.hpp"

#include <algorithm>
#include <set>

#include "flab/error.hpp"

namespace flab {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// G_t atoms inside G atom `a` of time t-1, ordered by smallest leaf.
std::vector<int> subatoms_of(const Filtration& g, int t, int a) {
  std::set<int> subs;
  for (int l : g.atom(t - 1, a)) subs.insert(g.atom_of(t, l));
  return {subs.begin(), subs.end()};
}

// G atoms of time s that lie inside node v.
std::vector<int> atoms_inside(const Filtration& g, int s, const Node& v) {
  std::set<int> out;
  for (int l = v.leaf_begin; l < v.leaf_end; ++l) out.insert(g.atom_of(s, l));
  return {out.begin(), out.end()};
}

Matrix increment_matrix(const Process& m, int t, int leaf, int n) {
  Matrix out(sz(n), sz(n));
  Vec d = m.increment(t, leaf);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out(sz(i), sz(j)) = d[sz(i * n + j)];
  return out;
}

// Direction w with w.x_i >= 0 for all i and > 0 for some, when one exists.
Vec separating_direction(const std::vector<Vec>& x) {
  const std::size_t m = x.size(), d = x.front().size();
  lp::Problem prob;
  prob.num_vars = 2 * d + m;
  prob.objective = zeros(prob.num_vars);
  for (std::size_t i = 0; i < m; ++i) prob.objective[2 * d + i] = 1;
  for (std::size_t i = 0; i < m; ++i) {
    lp::Constraint eq{zeros(prob.num_vars), lp::Relation::Equal, 0};
    for (std::size_t j = 0; j < d; ++j) {
      eq.coeffs[j] = -x[i][j];
      eq.coeffs[d + j] = x[i][j];
    }
    eq.coeffs[2 * d + i] = 1;
    prob.constraints.push_back(eq);
    lp::Constraint cap{zeros(prob.num_vars), lp::Relation::LessEqual, 1};
    cap.coeffs[2 * d + i] = 1;
    prob.constraints.push_back(cap);
  }
  lp::Solution sol = lp::solve(prob);
  if (sol.status != lp::Status::Optimal || sgn(sol.value) <= 0) return {};
  Vec w(d);
  for (std::size_t j = 0; j < d; ++j) w[j] = sol.x[j] - sol.x[d + j];
  return primitive_integer(w);
}

}  // namespace

Process product(const Process& a, const Process& b) {
  require_same_tree(a, b);
  if (a.dim() != 1 || b.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "pointwise product of scalar processes");
  return Process::from_function(a.tree_ptr(), 1, [&](int t, int l) { return Vec{a.at(t, l)[0] * b.at(t, l)[0]}; });
}

DriftResult drift_operator(const Process& x, const Enlargement& g) {
  require_martingale(x, g.base(), "X");
  Process drift = dual_predictable_projection(x, g.filtration());
  return {drift, x - drift};
}

std::vector<AtomAudit> DeflatorResult::violations() const {
  std::vector<AtomAudit> out;
  for (const auto& a : atoms)
    if (!a.ok) out.push_back(a);
  return out;
}

DeflatorResult find_deflator(const Process& s, const Enlargement& g) {
  const auto& tree = s.tree();
  for (int t = 0; t <= s.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l)
      for (const auto& v : s.at(t, l))
        if (sgn(v) <= 0) throw Error(ErrorKind::NotStrictlyPositive, "S at " + describe(tree, {t, l}));
  require_martingale(s, g.base(), "S");
  const Filtration& gf = g.filtration();
  DeflatorResult result;
  Process y = constant_process(s.tree_ptr(), Vec{1});
  bool all_ok = true;
  for (int t = 1; t <= s.horizon(); ++t)
    for (int a = 0; a < gf.num_atoms(t - 1); ++a) {
      AtomAudit audit;
      audit.t = t;
      audit.atom = a;
      audit.label = gf.atom_label(t - 1, a);
      std::vector<int> subs = subatoms_of(gf, t, a);
      const std::size_t m = subs.size();
      const Vec& prev = s.at(t - 1, gf.atom(t - 1, a).front());
      std::vector<Rational> q;
      std::vector<Vec> values;
      for (int sub : subs) {
        audit.subatoms.push_back(gf.atom_label(t, sub));
        q.push_back(gf.atom_prob(t, sub) / gf.atom_prob(t - 1, a));
        values.push_back(s.at(t, gf.atom(t, sub).front()));
      }
      // Variables y_0..y_{m-1}, tau; maximize tau.
      lp::Problem prob;
      prob.num_vars = m + 1;
      prob.objective = zeros(m + 1);
      prob.objective[m] = 1;
      lp::Constraint mass{zeros(m + 1), lp::Relation::Equal, 1};
      for (std::size_t i = 0; i < m; ++i) mass.coeffs[i] = q[i];
      prob.constraints.push_back(mass);
      for (std::size_t j = 0; j < prev.size(); ++j) {
        lp::Constraint mart{zeros(m + 1), lp::Relation::Equal, prev[j]};
        for (std::size_t i = 0; i < m; ++i) mart.coeffs[i] = q[i] * values[i][j];
        prob.constraints.push_back(mart);
      }
      for (std::size_t i = 0; i < m; ++i) {
        lp::Constraint floor{zeros(m + 1), lp::Relation::GreaterEqual, 0};
        floor.coeffs[i] = 1;
        floor.coeffs[m] = -1;
        prob.constraints.push_back(floor);
      }
      lp::Solution sol = lp::solve(prob);
      audit.status = sol.status;
      if (sol.status == lp::Status::Optimal) {
        audit.tau = sol.x[m];
        audit.y.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(m));
        audit.ok = sgn(audit.tau) > 0;
      }
      if (audit.ok) {
        for (std::size_t i = 0; i < m; ++i)
          for (int l : gf.atom(t, subs[i])) y.at(t, l)[0] = y.at(t - 1, l)[0] * audit.y[i];
      } else {
        all_ok = false;
        std::vector<Vec> steps;
        for (const auto& v : values) steps.push_back(sub(v, prev));
        audit.separating_direction = separating_direction(steps);
      }
      result.atoms.push_back(std::move(audit));
    }
  if (all_ok) result.y = std::move(y);
  return result;
}

CoverageReport viability_diagnostics(const Enlargement& g) {
  const Filtration& gf = g.filtration();
  const auto& tree = gf.tree();
  CoverageReport report;
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int a = 0; a < gf.num_atoms(t - 1); ++a) {
      const auto& atom = gf.atom(t - 1, a);
      std::set<int> hit;
      for (int l : atom) hit.insert(tree.ancestor(l, t));
      CoverageGap gap{t, gf.atom_label(t - 1, a), {}};
      for (int c : tree.node(tree.ancestor(atom.front(), t - 1)).children)
        if (!hit.count(c)) gap.missed_children.push_back(tree.node(c).id);
      if (!gap.missed_children.empty()) {
        report.covered = false;
        report.gaps.push_back(std::move(gap));
      }
    }
  return report;
}

bool ViabilityReport::passed() const {
  return std::all_of(members.begin(), members.end(), [](const auto& m) { return m.second.found(); });
}

std::vector<FamilyMember> default_viability_family(const Process& w) {
  std::vector<FamilyMember> family;
  for (int k = 0; k < w.dim(); ++k) {
    Process wk = w.component(k);
    Rational biggest = 0;
    for (int t = 1; t <= w.horizon(); ++t)
      for (int l = 0; l < w.tree().num_leaves(); ++l) biggest = std::max(biggest, Rational(abs(wk.increment(t, l)[0])));
    if (sgn(biggest) == 0) continue;
    for (int j = 1; j <= 3; ++j)
      for (int sign : {1, -1}) {
        Rational a = Rational(sign * j) / 4 / biggest;
        family.push_back({"E(" + format_rational(a) + "*W" + std::to_string(k) + ")", doleans_exponential(wk, a)});
      }
  }
  return family;
}

ViabilityReport check_full_viability(const Enlargement& g, const std::vector<FamilyMember>& family) {
  ViabilityReport report;
  for (const auto& m : family) report.members.emplace_back(m.name, find_deflator(m.s, g));
  report.coverage = viability_diagnostics(g);
  return report;
}

MultiplierSolution solve_drift_multiplier(const Enlargement& g, const Reconstruction& recon) {
  const Filtration& gf = g.filtration();
  const auto& tree = gf.tree();
  const int d = recon.d;
  MultiplierSolution sol{Process(recon.x2.tree_ptr(), d), Process(recon.x2.tree_ptr(), d), {}};
  for (const auto& w : recon.witnesses) {
    const int t = w.t;
    const Node& v = tree.node(w.node);
    MultiplierSlot slot;
    slot.t = t;
    slot.node = w.node;
    for (const auto& s : w.subatoms) slot.p.push_back(s.prob);
    if (is_zero(slot.p)) throw Error(ErrorKind::DegeneratePartition, "all subatom probabilities vanish at '" + v.id + "'");
    std::vector<Vec> seed{slot.p};
    for (int h = 0; h <= d; ++h) seed.push_back(unit_vector(sz(d + 1), sz(h)));
    std::vector<Vec> basis = gram_schmidt(seed);
    slot.epsilon.assign(basis.begin() + 1, basis.end());
    Rational step = pow2(-t), scale4 = pow2(2 * t);

    for (int l = v.leaf_begin; l < v.leaf_end; ++l) {
      Vec dx = recon.x2.increment(t, l);
      for (int j = 0; j < d; ++j) sol.n.at(t, l)[sz(j)] = sol.n.at(t - 1, l)[sz(j)] + dot(slot.epsilon[sz(j)], dx);
    }
    for (int a : atoms_inside(gf, t - 1, v)) {
      MultiplierSubatom sub;
      sub.g_atom = a;
      sub.label = gf.atom_label(t - 1, a);
      for (std::size_t h = 0; h < w.subatoms.size(); ++h) {
        Rational inside = 0;
        for (int l : w.subatoms[h].leaves)
          if (gf.atom_of(t - 1, l) == a) inside += tree.leaf_prob(l);
        Rational pbar = inside / gf.atom_prob(t - 1, a);
        sub.p_bar.push_back(pbar);
        sub.ratio.push_back(sgn(slot.p[h]) == 0 ? Rational(0) : step * (pbar / slot.p[h] - 1));
      }
      for (const auto& e : slot.epsilon) {
        Rational c = dot(sub.ratio, e) / dot(e, e);
        sub.varsigma.push_back(c);
        sub.phi.push_back(scale4 * c);
      }
      for (int l : gf.atom(t - 1, a)) sol.phi.at(t, l) = sub.phi;
      slot.subatoms.push_back(std::move(sub));
    }
    sol.slots.push_back(std::move(slot));
  }
  return sol;
}

IdentityCheck verify_drift_multiplier(const MultiplierSolution& sol, const Process& x, const Enlargement& g,
                                      const Reconstruction& recon) {
  Process h = representation_coefficient(x, recon.x2);
  Process lhs = drift_operator(x, g).drift;
  Process rhs = dot_integral(sol.phi, predictable_bracket_matrix(sol.n, x, g.base()), g.filtration());
  Process pulled = dot_integral(h, drift_operator(recon.x2, g).drift, g.filtration());
  auto mismatch = first_difference(lhs, rhs);
  if (!mismatch) mismatch = first_difference(lhs, pulled);
  return {lhs, rhs, mismatch};
}

IdentityCheck verify_fbd(const Process& x, const Rational& a, const Process& y, const Enlargement& g) {
  if (x.dim() != 1 || y.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "scalar X and Y expected");
  // With a = 0 every Y deflates E(aX) = 1 and says nothing about X.
  if (sgn(a) == 0) throw Error(ErrorKind::VanishingWeight, "a must be nonzero");
  Process s = doleans_exponential(x, a);
  const auto& tree = x.tree();
  for (int t = 0; t <= x.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l) {
      if (sgn(s.at(t, l)[0]) <= 0) throw Error(ErrorKind::NotStrictlyPositive, "E(aX) at " + describe(tree, {t, l}));
      if (sgn(y.at(t, l)[0]) <= 0) throw Error(ErrorKind::NotADeflator, "Y not positive at " + describe(tree, {t, l}));
      if (t == 0 && y.at(t, l)[0] != 1) throw Error(ErrorKind::NotADeflator, "Y_0 != 1");
    }
  if (!is_martingale(y, g.filtration())) throw Error(ErrorKind::NotADeflator, "Y is not a G-martingale");
  if (!is_martingale(product(y, s), g.filtration())) throw Error(ErrorKind::NotADeflator, "Y E(aX) is not a G-martingale");
  Process lhs = drift_operator(x, g).drift;
  Process weight = Process::from_function(x.tree_ptr(), 1, [&](int t, int l) {
    return Vec{t == 0 ? Rational(0) : Rational(-1 / y.at(t - 1, l)[0])};
  });
  Process rhs = dot_integral(weight, predictable_bracket(y, x, g.filtration()), g.filtration());
  return {lhs, rhs, first_difference(lhs, rhs)};
}

AbsContinuityReport check_compensator_abs_continuity(const Process& a, const Enlargement& g) {
  if (a.dim() != 1) throw Error(ErrorKind::DimensionMismatch, "scalar increasing process expected");
  if (!is_adapted(a, g.base())) throw Error(ErrorKind::NotAdapted, "A must be F-adapted");
  const auto& tree = a.tree();
  for (int l = 0; l < tree.num_leaves(); ++l) {
    if (sgn(a.at(0, l)[0]) != 0) throw Error(ErrorKind::NotIncreasing, "A_0 must vanish");
    for (int t = 1; t <= a.horizon(); ++t)
      if (sgn(a.increment(t, l)[0]) < 0) throw Error(ErrorKind::NotIncreasing, "A decreases at " + describe(tree, {t, l}));
  }
  Process af = dual_predictable_projection(a, g.base());
  Process ag = dual_predictable_projection(a, g.filtration());
  const Filtration& gf = g.filtration();
  for (int t = 1; t <= a.horizon(); ++t)
    for (int k = 0; k < gf.num_atoms(t - 1); ++k) {
      int l = gf.atom(t - 1, k).front();
      if (sgn(af.increment(t, l)[0]) == 0 && sgn(ag.increment(t, l)[0]) != 0)
        return {false, std::make_pair(t, gf.atom_label(t - 1, k))};
    }
  return {};
}

KernelResult covariance_kernel(const Vec& p, int t) {
  const std::size_t n = p.size();
  KernelResult r;
  Rational quarter = pow2(-2 * t);
  r.covariance = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r.covariance(i, j) = quarter * ((i == j ? p[i] : Rational(0)) - p[i] * p[j]);
  r.kernel = null_space(r.covariance);

  std::vector<std::size_t> support;
  Vec ones_on_support = zeros(n);
  for (std::size_t h = 0; h < n; ++h)
    if (sgn(p[h]) > 0) {
      support.push_back(h);
      ones_on_support[h] = 1;
    }
  r.expected.push_back(ones_on_support);
  for (std::size_t h = 0; h < n; ++h)
    if (sgn(p[h]) == 0) r.expected.push_back(unit_vector(n, h));
  if (r.kernel.size() == r.expected.size()) {
    std::vector<Vec> both = r.kernel;
    both.insert(both.end(), r.expected.begin(), r.expected.end());
    r.kernel_matches = rank(Matrix::from_rows(both)) == r.kernel.size();
  }

  // Pseudo-inverse of B = D_p - p p^T on the support, whose kernel is the constants:
  // B^+ = (B + 11^T/k)^{-1} - 11^T/k.
  const std::size_t k = support.size();
  Rational inv_k = Rational(1, static_cast<long>(k));
  Matrix shifted(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const Rational& pi = p[support[i]];
      const Rational& pj = p[support[j]];
      shifted(i, j) = (i == j ? pi : Rational(0)) - pi * pj + inv_k;
    }
  Matrix pinv = *inverse(shifted);
  r.j = Matrix(n, n);
  Rational four = pow2(2 * t);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) r.j(support[i], support[j]) = four * (pinv(i, j) - inv_k);
  return r;
}

KernelCertificate covariance_kernel(const Enlargement& g, const Reconstruction& recon, int t, int node) {
  const PartitionWitness* w = nullptr;
  for (const auto& x : recon.witnesses)
    if (x.t == t && x.node == node) w = &x;
  if (!w) throw Error(ErrorKind::TimeOutOfRange, "no slot at t=" + std::to_string(t));
  Vec p;
  for (const auto& s : w->subatoms) p.push_back(s.prob);
  KernelCertificate cert;
  cert.kernel = covariance_kernel(p, t);
  const int n = recon.d + 1;
  const Node& v = g.base().tree().node(node);
  cert.f_bracket = increment_matrix(predictable_bracket_matrix(recon.x2, recon.x2, g.base()), t, v.leaf_begin, n);
  cert.f_matches_formula = cert.f_bracket == cert.kernel.covariance;
  Process tilde = drift_operator(recon.x2, g).g_martingale;
  Process gbr = predictable_bracket_matrix(tilde, tilde, g.filtration());
  bool all = true;
  for (int a : atoms_inside(g.filtration(), t - 1, v)) {
    Matrix mg = increment_matrix(gbr, t, g.filtration().atom(t - 1, a).front(), n);
    all = all && mg == mg * cert.kernel.j * cert.f_bracket;
    cert.g_brackets.emplace_back(g.filtration().atom_label(t - 1, a), std::move(mg));
  }
  cert.certified = cert.kernel.kernel_matches && cert.f_matches_formula && all;
  return cert;
}

IdentityCheck g_star_consistency(const PredictableFunction& gfun, const JumpMeasure& mu, const Enlargement& g) {
  Process lhs = star_integral(gfun, mu, g.filtration());
  Process f_star = star_integral(gfun, mu, g.base());
  Process rhs = f_star - drift_operator(f_star, g).drift;
  return {lhs, rhs, first_difference(lhs, rhs)};
}

}  // namespace flab
