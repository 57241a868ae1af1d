#include "flab/checks.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "flab/constraint.hpp"
#include "flab/enlargement.hpp"
#include "flab/error.hpp"
#include "flab/generators.hpp"
#include "flab/representation.hpp"

namespace flab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skip: return "skip";
  }
  return "?";
}

const std::vector<CheckInfo>& registered_checks() {
  static const std::vector<CheckInfo> checks{
      {"mrp", "representation of every F-martingale as an integral against the basis",
       "at each non-terminal node the basis increments have rank (children - 1); the verdict compares with expect_mrp",
       false},
      {"reconstruct", "compensated-indicator family rebuilt from the basis and its orthogonalized version",
       "both families keep the representation property, orthogonalized components never jump together, "
       "every reconstructed jump is at most 1 in size, and integrands translate exactly",
       true},
      {"star-to-dot", "jump-measure integrals rewritten as integrals against constraint martingales",
       "for random predictable g, g*(mu-nu) equals H.X at every node, re-expanding H gives the same process, "
       "and the accessible-partition conversion agrees",
       false},
      {"drift", "drift of F-martingales seen in the enlarged filtration",
       "drift is G-predictable and starts at 0, X minus drift is a G-martingale, and the drift commutes with "
       "predictable integrands",
       false},
      {"multiplier", "one pair (N, phi) producing the drift of every F-martingale",
       "drift(X) = phi . <N, X>^F exactly for the basis, the reconstructed family and random martingales", true},
      {"viability", "deflators in G for a family of positive F-martingales",
       "every family member has a strictly positive deflator; failing atoms carry a separating direction", false,
       false},
      {"separation", "certificates behind the viability verdict",
       "every atom without a deflator has a direction w with w.dS >= 0 on all its subatoms and > 0 on one, and "
       "an enlargement meeting every child of every node admits all deflators",
       false},
      {"kernel", "conditional covariance of the reconstructed family",
       "computed null space equals the predicted one and every G bracket factors through the pseudo-inverse", true},
      {"consistency", "compensated jump integrals in G",
       "g*(mu-nu^G) equals g*(mu-nu^F) minus its drift", false},
      {"projection", "projection of a martingale onto the jump measure of the basis",
       "the projected function reproduces the predictable bracket of Y with the basis", false},
      {"jump-constraint", "finite menu of jump values of the basis",
       "every basis increment is zero or one of the detected menu values at its node", true},
      {"fbd", "drift expressed through a deflator",
       "for every deflator Y found for E(aX), drift(X) = -(1/Y_-) . <Y, X>^G", false},
      {"abs-continuity", "compensators of increasing processes in F and G",
       "no atom is charged by the G compensator when the F compensator leaves it uncharged", false},
  };
  return checks;
}

const CheckInfo& check_info(const std::string& name) {
  for (const auto& c : registered_checks())
    if (c.name == name) return c;
  throw Error(ErrorKind::UnknownCheck, "'" + name + "'");
}

std::string explain(const std::string& name) {
  const CheckInfo& c = check_info(name);
  std::string out = c.name + ": " + c.subject + "\n  pass when: " + c.condition + "\n";
  if (c.needs_mrp) out += "  skipped when the basis lacks the representation property\n";
  return out;
}

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

json vec_json(const Vec& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(format_rational(x));
  return a;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r)));
  return a;
}

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Values of x at time t (or its increments) per atom of f at time t - lag.
json atom_table(const Process& x, const Filtration& f, int lag, bool increments) {
  json rows = json::array();
  for (int t = lag; t <= x.horizon(); ++t)
    for (int a = 0; a < f.num_atoms(t - lag); ++a) {
      int l = f.atom(t - lag, a).front();
      rows.push_back({{"t", t}, {"atom", f.atom_label(t - lag, a)},
                      {"value", vec_json(increments ? x.increment(t, l) : x.at(t, l))}});
    }
  return rows;
}

json mismatch_json(const FilteredTree& tree, const std::optional<PathPoint>& p) {
  return p ? json(describe(tree, *p)) : json(nullptr);
}

struct Outcome {
  Verdict verdict = Verdict::Pass;
  std::string note;
  json details = json::object();
};

Outcome pass_if(bool ok, std::string pass_note, std::string fail_note, json details) {
  return {ok ? Verdict::Pass : Verdict::Fail, ok ? std::move(pass_note) : std::move(fail_note), std::move(details)};
}

struct Context {
  const Scenario& s;
  const Process& w;
  Enlargement g;
  Filtration f;
  std::optional<Reconstruction> recon_;

  const Reconstruction& recon() {
    if (!recon_) recon_ = reconstruct_accessible(w);
    return *recon_;
  }
  std::mt19937_64 rng(const std::string& check) const { return std::mt19937_64(s.seed ^ fnv(check)); }

  // Scalar F-martingales named in the scenario, component by component.
  std::vector<std::pair<std::string, Process>> named_martingales() const {
    std::vector<std::pair<std::string, Process>> out;
    for (const auto& [name, p] : s.processes) {
      if (!is_martingale(p, f)) continue;
      for (int k = 0; k < p.dim(); ++k)
        out.emplace_back(p.dim() == 1 ? name : name + "[" + std::to_string(k) + "]", p.component(k));
    }
    return out;
  }
};

constexpr int kRandomFunctions = 5;
constexpr int kRandomMartingales = 10;

Outcome check_mrp_outcome(Context& c) {
  MrpReport r = check_mrp(c.w);
  const auto& tree = c.w.tree();
  json nodes = json::array();
  int most = 0;
  for (const auto& n : r.nodes) {
    nodes.push_back({{"node", tree.node(n.node).id}, {"children", n.children}, {"rank", n.rank}});
    most = std::max(most, n.children);
  }
  json d{{"mrp", r.mrp}, {"expected", c.s.expect_mrp}, {"dimension", c.w.dim()}, {"max_children", most},
         {"nodes", nodes}};
  if (r.failing_node) {
    d["failing_node"] = tree.node(*r.failing_node).id;
    d["witness"] = vec_json(r.witness);
  }
  if (r.mrp && most > c.w.dim() + 1) return {Verdict::Fail, "representation with more than d+1 children", d};
  std::string note = r.mrp ? "basis spans at every node"
                           : "no representation at node '" + tree.node(*r.failing_node).id + "'";
  return {r.mrp == c.s.expect_mrp ? Verdict::Pass : Verdict::Fail, note, d};
}

// Components whose jumps, once a per-node constant is removed, never occur on
// the same child.
bool orthogonal_after_compensation(const Process& x) {
  const auto& tree = x.tree();
  const int n = x.dim();
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& node = tree.node(v);
    if (node.children.empty()) continue;
    std::vector<std::vector<Rational>> jumps(sz(n));
    for (int c : node.children) {
      Vec dx = x.increment(node.time + 1, tree.node(c).leaf_begin);
      for (int k = 0; k < n; ++k) jumps[sz(k)].push_back(dx[sz(k)]);
    }
    // Moved set of component k for baseline b: children where the jump differs from b.
    auto moved = [&](int k, const Rational& b) {
      std::vector<bool> out;
      for (const auto& j : jumps[sz(k)]) out.push_back(j != b);
      return out;
    };
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        bool found = false;
        for (const auto& bi : jumps[sz(i)])
          for (const auto& bj : jumps[sz(j)]) {
            auto mi = moved(i, bi), mj = moved(j, bj);
            bool disjoint = true;
            for (std::size_t c = 0; c < mi.size(); ++c) disjoint = disjoint && !(mi[c] && mj[c]);
            found = found || disjoint;
          }
        if (!found) return false;
      }
  }
  return true;
}

Outcome check_reconstruct(Context& c) {
  const Reconstruction& r = c.recon();
  const auto& tree = c.w.tree();
  bool x2_mrp = check_mrp(r.x2).mrp;
  Orthogonalization o = orthogonalize(r.x2);
  // An empty family represents exactly when no node branches.
  bool circ_mrp = o.x_circ.dim() > 0
                      ? check_mrp(o.x_circ).mrp
                      : std::all_of(tree.nodes().begin(), tree.nodes().end(), [](const Node& v) { return v.children.size() <= 1; });

  // Literal bracket test; compensated components share their jump times here.
  const int n = o.x_circ.dim();
  Process br = bracket_matrix(o.x_circ, o.x_circ);
  bool bracket_zero = true;
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j && sgn(br.at(t, l)[sz(i * n + j)]) != 0) bracket_zero = false;
  bool orthogonal = orthogonal_after_compensation(o.x_circ);

  bool bounded = true;
  for (int t = 1; t <= tree.horizon(); ++t)
    for (int l = 0; l < tree.num_leaves(); ++l)
      for (const auto& x : r.x2.increment(t, l))
        if (abs(x) > 1) bounded = false;

  auto rng = c.rng("reconstruct");
  Process h = random_predictable(c.w.tree_ptr(), r.x2.dim(), rng);
  Process translated = dot_integral(translate_integrand(h, o), o.x_circ, c.f);
  auto mismatch = first_difference(dot_integral(h, r.x2, c.f), translated);

  json d{{"d", r.d}, {"x2_mrp", x2_mrp}, {"x_circ_dim", n}, {"x_circ_mrp", circ_mrp},
         {"orthogonal_after_compensation", orthogonal}, {"bracket_zero", bracket_zero}, {"jumps_bounded", bounded},
         {"translation_mismatch", mismatch_json(tree, mismatch)}};
  json slots = json::array();
  for (const auto& w : r.witnesses) {
    json subs = json::array();
    for (const auto& s : w.subatoms)
      subs.push_back({{"node", s.node < 0 ? json(nullptr) : json(tree.node(s.node).id)}, {"prob", format_rational(s.prob)}});
    slots.push_back({{"t", w.t}, {"node", tree.node(w.node).id}, {"subatoms", subs}});
  }
  d["slots"] = slots;
  bool ok = x2_mrp && circ_mrp && orthogonal && bounded && !mismatch;
  return pass_if(ok, "reconstructed families represent and are orthogonal", "reconstruction property violated", d);
}

Outcome check_star_to_dot(Context& c) {
  JumpMeasure mu = jump_measure(c.w);
  if (mu.support().empty()) return {Verdict::Skip, "basis never jumps", json::object()};
  ConstraintSystem cs = detect_fpcc(mu);
  validate_constraint(cs, mu);
  AccessiblePartition part = canonical_accessible_partition(mu);
  auto rng = c.rng("star-to-dot");
  const auto& tree = c.w.tree();
  json trials = json::array();
  bool ok = true;
  for (int i = 0; i < kRandomFunctions; ++i) {
    PredictableFunction g = random_function(mu, rng);
    StarToDot r = star_to_dot(g, mu, cs);
    auto reexpanded = first_difference(star_integral(dot_to_star(r.integrand, mu, cs), mu, c.f), r.star);
    Process h = random_predictable(c.w.tree_ptr(), cs.n, rng);
    auto reverse = first_difference(star_integral(dot_to_star(h, mu, cs), mu, c.f), dot_integral(h, r.integrator, c.f));
    AccessibleStarToDot acc = accessible_star_to_dot(g, mu, part);
    bool trial = r.certified() && !reexpanded && !reverse && acc.certified();
    ok = ok && trial;
    trials.push_back({{"star_equals_dot", mismatch_json(tree, r.mismatch)},
                      {"reexpansion", mismatch_json(tree, reexpanded)},
                      {"from_integrand", mismatch_json(tree, reverse)},
                      {"accessible", mismatch_json(tree, acc.mismatch)}});
  }
  json d{{"menu_size", cs.n}, {"accessible_classes", part.n}, {"trials", trials}};
  return pass_if(ok, std::to_string(kRandomFunctions) + " random integrands converted exactly",
                 "conversion mismatch", d);
}

Outcome check_drift(Context& c) {
  const Filtration& gf = c.g.filtration();
  const auto& tree = c.w.tree();
  json tables = json::array();
  bool ok = true;
  std::vector<std::pair<std::string, Process>> targets;
  for (int k = 0; k < c.w.dim(); ++k) targets.emplace_back(c.s.basis + "[" + std::to_string(k) + "]", c.w.component(k));
  for (auto& named : c.named_martingales())
    if (named.first.rfind(c.s.basis, 0) != 0) targets.push_back(std::move(named));
  for (const auto& [name, x] : targets) {
    DriftResult r = drift_operator(x, c.g);
    bool predictable = is_predictable(r.drift, gf);
    bool mart = is_martingale(r.g_martingale, gf);
    ok = ok && predictable && mart;
    tables.push_back({{"process", name}, {"predictable", predictable}, {"g_martingale", mart},
                      {"drift", atom_table(r.drift, gf, 1, true)}});
  }
  auto rng = c.rng("drift");
  Process h = random_predictable(c.w.tree_ptr(), c.w.dim(), rng);
  Process lhs = drift_operator(dot_integral(h, c.w, c.f), c.g).drift;
  Process rhs = dot_integral(h, drift_operator(c.w, c.g).drift, gf);
  auto mismatch = first_difference(lhs, rhs);
  ok = ok && !mismatch;
  json d{{"enlargement", gf.name()}, {"drifts", tables}, {"pull_through", mismatch_json(tree, mismatch)}};
  return pass_if(ok, "drift is G-predictable and compensates in G", "drift identity violated", d);
}

json multiplier_json(const MultiplierSolution& sol, const Enlargement& g) {
  const auto& tree = sol.n.tree();
  json slots = json::array();
  for (const auto& s : sol.slots) {
    json eps = json::array();
    for (const auto& e : s.epsilon) eps.push_back(vec_json(e));
    json subs = json::array();
    for (const auto& a : s.subatoms)
      subs.push_back({{"atom", a.label}, {"p_bar", vec_json(a.p_bar)}, {"ratio", vec_json(a.ratio)},
                      {"varsigma", vec_json(a.varsigma)}, {"phi", vec_json(a.phi)}});
    slots.push_back({{"t", s.t}, {"node", tree.node(s.node).id}, {"p", vec_json(s.p)}, {"epsilon", eps}, {"subatoms", subs}});
  }
  return json{{"N", process_to_json(sol.n)}, {"phi", atom_table(sol.phi, g.filtration(), 1, false)}, {"slots", slots}};
}

Outcome check_multiplier(Context& c) {
  const Reconstruction& recon = c.recon();
  MultiplierSolution sol = solve_drift_multiplier(c.g, recon);
  if (c.s.inject_fault) {
    for (int t = 1; t <= sol.phi.horizon(); ++t)
      for (int l = 0; l < c.w.tree().num_leaves(); ++l)
        for (auto& x : sol.phi.at(t, l)) x += 1;
  }
  std::vector<std::pair<std::string, Process>> targets;
  for (int k = 0; k < c.w.dim(); ++k) targets.emplace_back(c.s.basis + "[" + std::to_string(k) + "]", c.w.component(k));
  for (int k = 0; k < recon.x2.dim(); ++k) targets.emplace_back("X2[" + std::to_string(k) + "]", recon.x2.component(k));
  for (auto& named : c.named_martingales())
    if (named.first.rfind(c.s.basis, 0) != 0) targets.push_back(std::move(named));
  auto rng = c.rng("multiplier");
  for (int i = 0; i < kRandomMartingales; ++i)
    targets.emplace_back("random" + std::to_string(i), random_martingale(c.w.tree_ptr(), 1, rng));

  json identities = json::array();
  bool ok = true;
  for (const auto& [name, x] : targets) {
    IdentityCheck r = verify_drift_multiplier(sol, x, c.g, recon);
    ok = ok && r.holds();
    identities.push_back({{"process", name}, {"holds", r.holds()}, {"mismatch", mismatch_json(x.tree(), r.mismatch)}});
  }
  json d = multiplier_json(sol, c.g);
  d["identities"] = identities;
  d["x2_drift"] = atom_table(drift_operator(recon.x2, c.g).drift, c.g.filtration(), 1, true);
  if (c.s.inject_fault) d["fault_injected"] = true;
  return pass_if(ok, std::to_string(targets.size()) + " drifts reproduced by one multiplier",
                 "multiplier identity violated", d);
}

json deflator_json(const DeflatorResult& r, const Enlargement& g) {
  json atoms = json::array();
  for (const auto& a : r.atoms) {
    json e{{"t", a.t}, {"atom", a.label}, {"subatoms", a.subatoms}, {"status", lp::to_string(a.status)}, {"ok", a.ok}};
    if (a.status == lp::Status::Optimal) {
      e["tau"] = format_rational(a.tau);
      e["y"] = vec_json(a.y);
    }
    if (!a.ok) e["separating_direction"] = vec_json(a.separating_direction);
    atoms.push_back(e);
  }
  json d{{"found", r.found()}, {"atoms", atoms}};
  if (r.y) d["deflator"] = atom_table(*r.y, g.filtration(), 0, false);
  return d;
}

std::vector<FamilyMember> viability_family(const Context& c) {
  if (c.s.assets.empty()) return default_viability_family(c.w);
  std::vector<FamilyMember> family;
  for (const auto& a : c.s.assets) family.push_back({a, *c.s.find_process(a)});
  return family;
}

Outcome check_viability(Context& c) {
  ViabilityReport rep = check_full_viability(c.g, viability_family(c));
  json members = json::array();
  std::vector<std::string> witnesses;
  for (const auto& [name, r] : rep.members) {
    json m = deflator_json(r, c.g);
    m["name"] = name;
    members.push_back(m);
    for (const auto& v : r.violations())
      if (std::find(witnesses.begin(), witnesses.end(), v.label) == witnesses.end()) witnesses.push_back(v.label);
  }
  json gaps = json::array();
  for (const auto& gap : rep.coverage.gaps) gaps.push_back({{"t", gap.t}, {"atom", gap.atom}, {"missed_children", gap.missed_children}});
  json d{{"family", c.s.assets.empty() ? "default" : "assets"}, {"members", members}, {"witness_atoms", witnesses},
         {"coverage", {{"covered", rep.coverage.covered}, {"gaps", gaps}}}};
  std::string fail_note = "no deflator; witness atoms:";
  for (const auto& w : witnesses) fail_note += " " + w;
  return pass_if(rep.passed(), std::to_string(rep.members.size()) + " family members deflated", fail_note, d);
}

Outcome check_separation(Context& c) {
  std::vector<FamilyMember> family = viability_family(c);
  ViabilityReport rep = check_full_viability(c.g, family);
  const Filtration& gf = c.g.filtration();
  json rows = json::array();
  bool ok = true;
  int certified = 0;
  for (std::size_t m = 0; m < family.size(); ++m) {
    const Process& s = family[m].s;
    for (const auto& v : rep.members[m].second.violations()) {
      const Vec& w = v.separating_direction;
      bool valid = static_cast<int>(w.size()) == s.dim() && !is_zero(w);
      bool strict = false;
      std::set<int> seen;
      for (int l : gf.atom(v.t - 1, v.atom)) {
        if (!valid || !seen.insert(gf.atom_of(v.t, l)).second) continue;
        int sign = sgn(dot(w, s.increment(v.t, l)));
        valid = sign >= 0;
        strict = strict || sign > 0;
      }
      valid = valid && strict;
      ok = ok && valid;
      certified += valid;
      rows.push_back({{"member", family[m].name}, {"t", v.t}, {"atom", v.label}, {"direction", vec_json(w)}, {"valid", valid}});
    }
  }
  bool consistent = !rep.coverage.covered || rep.passed();
  ok = ok && consistent;
  return pass_if(ok, std::to_string(certified) + " separating directions verified", "viability verdict without a valid certificate",
                 json{{"covered", rep.coverage.covered}, {"family_passed", rep.passed()}, {"certificates", rows}});
}

Outcome check_kernel(Context& c) {
  const Reconstruction& recon = c.recon();
  const auto& tree = c.w.tree();
  json slots = json::array();
  bool ok = true;
  for (const auto& w : recon.witnesses) {
    KernelCertificate cert = covariance_kernel(c.g, recon, w.t, w.node);
    ok = ok && cert.certified;
    json kernel = json::array();
    for (const auto& v : cert.kernel.kernel) kernel.push_back(vec_json(v));
    slots.push_back({{"t", w.t}, {"node", tree.node(w.node).id}, {"kernel", kernel},
                     {"kernel_matches", cert.kernel.kernel_matches}, {"f_matches_formula", cert.f_matches_formula},
                     {"certified", cert.certified}, {"f_bracket", matrix_json(cert.f_bracket)}});
  }
  return pass_if(ok, "covariance kernels certified at every slot", "kernel characterization failed",
                 json{{"slots", slots}});
}

Outcome check_consistency(Context& c) {
  JumpMeasure mu = jump_measure(c.w);
  if (mu.support().empty()) return {Verdict::Skip, "basis never jumps", json::object()};
  auto rng = c.rng("consistency");
  json trials = json::array();
  bool ok = true;
  for (int i = 0; i < kRandomFunctions; ++i) {
    IdentityCheck r = g_star_consistency(random_function(mu, rng), mu, c.g);
    ok = ok && r.holds();
    trials.push_back(mismatch_json(c.w.tree(), r.mismatch));
  }
  return pass_if(ok, "G compensation matches F compensation minus drift", "compensation mismatch",
                 json{{"trials", trials}});
}

Outcome check_projection(Context& c) {
  JumpMeasure mu = jump_measure(c.w);
  if (mu.support().empty()) return {Verdict::Skip, "basis never jumps", json::object()};
  auto rng = c.rng("projection");
  std::vector<std::pair<std::string, Process>> targets = c.named_martingales();
  for (int i = 0; i < 3; ++i) targets.emplace_back("random" + std::to_string(i), random_martingale(c.w.tree_ptr(), 1, rng));
  json trials = json::array();
  bool ok = true;
  for (const auto& [name, y] : targets) {
    PredictableFunction g = project_onto_jump_measure(y, mu);
    Process lhs = predictable_bracket_matrix(y, c.w, c.f);
    Process rhs = predictable_bracket_matrix(star_integral(g, mu, c.f), c.w, c.f);
    auto m = first_difference(lhs, rhs);
    ok = ok && !m;
    trials.push_back({{"process", name}, {"mismatch", mismatch_json(c.w.tree(), m)}});
  }
  return pass_if(ok, "projected brackets agree", "bracket mismatch", json{{"trials", trials}});
}

Outcome check_jump_constraint(Context& c) {
  ConstraintSystem cs = jump_constraint(c.w);
  const auto& tree = c.w.tree();
  json menu = json::array();
  std::optional<std::string> outside;
  for (int v = 0; v < tree.num_nodes(); ++v) {
    const Node& n = tree.node(v);
    if (n.children.empty()) continue;
    json slots = json::array();
    for (int k = 0; k < cs.n; ++k) slots.push_back(cs.slot(v, k) ? vec_json(*cs.slot(v, k)) : json(nullptr));
    menu.push_back({{"node", n.id}, {"alpha", slots}});
    for (int ch : n.children) {
      Vec dx = c.w.increment(n.time + 1, tree.node(ch).leaf_begin);
      if (!is_zero(dx) && !cs.slot_of(v, dx) && !outside) outside = tree.node(ch).id;
    }
  }
  json d{{"n", cs.n}, {"menu", menu}};
  if (outside) d["outside"] = *outside;
  return pass_if(!outside, "every jump lies in the menu", "jump outside the menu at '" + outside.value_or("") + "'", d);
}

// X with S = S_0 E(X) for a positive scalar S.
Process relative_returns(const Process& s) {
  return Process::from_function(s.tree_ptr(), 1, [&](int t, int l) {
    Rational total = 0;
    for (int u = 1; u <= t; ++u) total += s.increment(u, l)[0] / s.at(u - 1, l)[0];
    return Vec{total};
  });
}

Outcome check_fbd(Context& c) {
  std::vector<std::tuple<std::string, Process, Rational>> drivers;
  for (const auto& a : c.s.assets) {
    const Process& s = *c.s.find_process(a);
    if (s.dim() == 1) drivers.emplace_back(a, relative_returns(s), Rational(1));
  }
  for (int k = 0; k < c.w.dim(); ++k) {
    Process wk = c.w.component(k);
    Rational biggest = 0;
    for (int t = 1; t <= wk.horizon(); ++t)
      for (int l = 0; l < wk.tree().num_leaves(); ++l) biggest = std::max(biggest, Rational(abs(wk.increment(t, l)[0])));
    if (sgn(biggest) == 0) continue;
    for (int j = 1; j <= 3; ++j)
      for (int sign : {1, -1}) drivers.emplace_back(c.s.basis + "[" + std::to_string(k) + "]", wk, Rational(sign * j) / 4 / biggest);
  }
  json rows = json::array();
  bool ok = true;
  int verified = 0;
  for (const auto& [name, x, a] : drivers) {
    if (!is_martingale(x, c.f)) continue;
    DeflatorResult r = find_deflator(doleans_exponential(x, a), c.g);
    json row{{"driver", name}, {"a", format_rational(a)}, {"deflator", r.found()}};
    if (r.found()) {
      IdentityCheck id = verify_fbd(x, a, *r.y, c.g);
      ok = ok && id.holds();
      verified += id.holds();
      row["mismatch"] = mismatch_json(x.tree(), id.mismatch);
    }
    rows.push_back(row);
  }
  return pass_if(ok, std::to_string(verified) + " deflators reproduce the drift", "deflator drift mismatch",
                 json{{"drivers", rows}});
}

Outcome check_abs_continuity(Context& c) {
  const auto& tree = c.w.tree();
  std::vector<std::pair<std::string, Process>> targets;
  targets.emplace_back("jump_count", Process::from_function(c.w.tree_ptr(), 1, [&](int t, int l) {
    Rational n = 0;
    for (int u = 1; u <= t; ++u) n += is_zero(c.w.increment(u, l)) ? 0 : 1;
    return Vec{n};
  }));
  auto rng = c.rng("abs-continuity");
  for (int i = 0; i < 3; ++i) {
    std::vector<Rational> step(sz(tree.num_nodes()));
    for (auto& x : step) x = draw(rng, 0, 2) == 0 ? 0 : draw(rng, 1, 3);
    targets.emplace_back("random" + std::to_string(i), Process::from_function(c.w.tree_ptr(), 1, [&](int t, int l) {
      Rational total = 0;
      for (int u = 1; u <= t; ++u) total += step[sz(tree.ancestor(l, u))];
      return Vec{total};
    }));
  }
  json rows = json::array();
  bool ok = true;
  for (const auto& [name, a] : targets) {
    AbsContinuityReport r = check_compensator_abs_continuity(a, c.g);
    ok = ok && r.holds;
    json row{{"process", name}, {"holds", r.holds}};
    if (r.witness) row["witness"] = {{"t", r.witness->first}, {"atom", r.witness->second}};
    rows.push_back(row);
  }
  return pass_if(ok, "G compensators vanish where F compensators do", "G compensator charges an F-null atom",
                 json{{"processes", rows}});
}

using CheckFn = Outcome (*)(Context&);
const std::map<std::string, CheckFn>& check_table() {
  static const std::map<std::string, CheckFn> table{
      {"mrp", check_mrp_outcome},         {"reconstruct", check_reconstruct},
      {"star-to-dot", check_star_to_dot}, {"drift", check_drift},
      {"multiplier", check_multiplier},   {"viability", check_viability},
      {"kernel", check_kernel},           {"consistency", check_consistency},
      {"projection", check_projection},   {"jump-constraint", check_jump_constraint},
      {"fbd", check_fbd},                 {"separation", check_separation},                 {"abs-continuity", check_abs_continuity},
  };
  return table;
}

const Process& basis_of(const Scenario& s) {
  const Process* w = s.find_process(s.basis);
  if (!w) throw Error(ErrorKind::ParseError, "basis process '" + s.basis + "' not found");
  return *w;
}

}  // namespace

json run_scenario(const Scenario& s, const std::vector<std::string>& requested) {
  const std::vector<std::string>& names = requested.empty() ? s.checks : requested;
  for (const auto& n : names) check_info(n);
  json report{{"tool", "filtration-lab"}, {"version", version()}, {"scenario_hash", scenario_hash(to_json(s))},
              {"seed", s.seed}};
  json results = json::array();
  int counts[3] = {0, 0, 0};
  if (!names.empty()) {
    Context c{s, basis_of(s), s.selected_enlargement(), base_filtration(s.tree), std::nullopt};
    std::optional<std::string> no_mrp;
    try {
      MrpReport r = check_mrp(c.w);
      if (!r.mrp) no_mrp = "basis lacks the representation property";
    } catch (const Error& e) {
      no_mrp = e.what();
    }
    // Registry order, each requested check once.
    for (const auto& info : registered_checks()) {
      if (std::find(names.begin(), names.end(), info.name) == names.end()) continue;
      Outcome out;
      if (info.needs_mrp && no_mrp) {
        out = {Verdict::Skip, *no_mrp, json::object()};
      } else {
        try {
          out = check_table().at(info.name)(c);
        } catch (const Error& e) {
          out = {Verdict::Fail, e.what(), json{{"error", to_string(e.kind())}}};
        }
      }
      ++counts[static_cast<int>(out.verdict)];
      results.push_back({{"name", info.name}, {"verdict", to_string(out.verdict)}, {"note", out.note}, {"details", out.details}});
    }
  }
  report["checks"] = results;
  report["summary"] = {{"pass", counts[0]}, {"fail", counts[1]}, {"skip", counts[2]}};
  report["verdict"] = counts[1] == 0 ? "pass" : "fail";
  return report;
}

json run_scenario(const json& scenario, const std::vector<std::string>& checks) {
  return run_scenario(parse_scenario(scenario), checks);
}

json check_mrp_report(const Scenario& s) {
  const Process& w = basis_of(s);
  const auto& tree = w.tree();
  MrpReport r = check_mrp(w);
  json table = json::array();
  for (const auto& n : r.nodes) {
    Multiplicity m = conditional_multiplicity(tree, n.node);
    table.push_back({{"node", tree.node(n.node).id}, {"t", tree.node(n.node).time}, {"children", n.children},
                     {"multiplicity", m.count}, {"rank", n.rank}, {"spans", n.spans()}});
  }
  JumpMeasure mu = jump_measure(w);
  ConstraintSystem cs = detect_fpcc(mu);
  json constraints = json::array();
  for (int v = 0; v < tree.num_nodes(); ++v) {
    if (tree.node(v).children.empty()) continue;
    json slots = json::array();
    for (int k = 0; k < cs.n; ++k) slots.push_back(cs.slot(v, k) ? vec_json(*cs.slot(v, k)) : json(nullptr));
    constraints.push_back({{"node", tree.node(v).id}, {"alpha", slots}});
  }
  json out{{"tool", "filtration-lab"}, {"version", version()}, {"scenario_hash", scenario_hash(to_json(s))},
           {"basis", s.basis}, {"dimension", w.dim()}, {"mrp", r.mrp}, {"expected", s.expect_mrp},
           {"multiplicity_table", table}, {"constraint_table", constraints}};
  out["failing_atom"] = r.failing_node ? json(tree.node(*r.failing_node).id) : json(nullptr);
  if (r.failing_node) out["witness"] = vec_json(r.witness);
  out["verdict"] = r.mrp == s.expect_mrp ? "pass" : "fail";
  return out;
}

json viability_audit(const Scenario& s) {
  return run_scenario(s, {"drift", "multiplier", "viability", "fbd", "abs-continuity"});
}

std::string render_table(const json& report) {
  std::ostringstream out;
  out << report.value("tool", "filtration-lab") << " " << report.value("version", "") << "  scenario "
      << report.value("scenario_hash", "") << "  seed " << report.value("seed", 0) << "\n";
  if (report.contains("checks")) {
    std::size_t width = 5;
    for (const auto& c : report["checks"]) width = std::max(width, c["name"].get<std::string>().size());
    for (const auto& c : report["checks"]) {
      std::string name = c["name"];
      out << name << std::string(width + 2 - name.size(), ' ') << c["verdict"].get<std::string>() << "  "
          << c["note"].get<std::string>() << "\n";
    }
  }
  if (report.contains("summary")) {
    const auto& s = report["summary"];
    out << "pass " << s.value("pass", 0) << "  fail " << s.value("fail", 0) << "  skip " << s.value("skip", 0) << "\n";
  }
  out << "verdict " << report.value("verdict", "") << "\n";
  return out.str();
}

int exit_code(const json& report) { return report.value("verdict", "fail") == "pass" ? 0 : 1; }

}  // namespace flab
