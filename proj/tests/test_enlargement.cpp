#include <gtest/gtest.h>

#include "flab/enlargement.hpp"
#include "flab/error.hpp"
#include "flab/generators.hpp"
#include "support.hpp"

using namespace flab;
using fx::q;
using fx::vec;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::ParseError;
}

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

// E[dX_t | atom of filtration at t-1], component i, summed leaf by leaf.
Rational atom_mean(const Filtration& f, const Process& x, int t, int atom, int i = 0) {
  Rational num = 0, den = 0;
  for (int l : f.atom(t - 1, atom)) {
    num += f.tree().leaf_prob(l) * x.increment(t, l)[sz(i)];
    den += f.tree().leaf_prob(l);
  }
  return num / den;
}

bool g_martingale(const Filtration& f, const Process& x) {
  for (int t = 1; t <= f.horizon(); ++t)
    for (int a = 0; a < f.num_atoms(t - 1); ++a)
      for (int i = 0; i < x.dim(); ++i)
        if (atom_mean(f, x, t, a, i) != 0) return false;
  return true;
}

int leaf(const TreePtr& t, const char* id) { return t->node(t->index_of(id)).leaf_begin; }

TreePtr fuzz_tree(std::mt19937_64& rng) {
  RandomTreeParams p;
  p.horizon = 3;
  p.max_branching = 4;
  return FilteredTree::build(random_tree_spec(rng, p));
}

}  // namespace

TEST(Enlargement, DriftExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process w1 = fx::ter1_w1(ter);
  EXPECT_EQ(drift_operator(w1, Enlargement::trivial(ter)).drift, Process(ter, 1));

  Enlargement ga = fx::ter1_ga(ter);
  DriftResult r = drift_operator(w1, ga);
  EXPECT_EQ(r.drift.at(1, leaf(ter, "a")), vec({"1"}));
  EXPECT_EQ(r.drift.at(1, leaf(ter, "b")), vec({"-1/2"}));
  EXPECT_EQ(r.drift.at(1, leaf(ter, "c")), vec({"-1/2"}));
  EXPECT_TRUE(is_zero(r.drift.at(0, 0)));
  // Oracle: plain averages of (1, -1, 0) over {a} and {b, c}.
  auto paths = oracle::enumerate(fx::ter1());
  std::map<std::string, Rational> dw{{"a", 1}, {"b", -1}, {"c", 0}};
  EXPECT_EQ(r.drift.at(1, leaf(ter, "b"))[0], oracle::mean_on(paths, {"b", "c"}, dw));
  EXPECT_TRUE(g_martingale(ga.filtration(), r.g_martingale));

  Process lifted = fx::by_node(ter, 1, {{"root", vec({"0"})}, {"a", vec({"2"})}, {"b", vec({"0"})}, {"c", vec({"0"})}});
  EXPECT_EQ(kind_of([&] { drift_operator(lifted, ga); }), ErrorKind::NotAMartingale);
}

TEST(Enlargement, DeflatorExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process s = fx::ter1_asset(ter);
  DeflatorResult f = find_deflator(s, Enlargement::trivial(ter));
  ASSERT_TRUE(f.found());
  EXPECT_EQ(*f.y, constant_process(ter, vec({"1"})));

  // GB: S averages to 1 over {a,b} and is 1 on {c}.
  auto paths = oracle::enumerate(fx::ter1());
  std::map<std::string, Rational> s1{{"a", q("3/2")}, {"b", q("1/2")}, {"c", 1}};
  EXPECT_EQ(oracle::mean_on(paths, {"a", "b"}, s1), 1);
  DeflatorResult gb = find_deflator(s, fx::ter1_gb(ter));
  ASSERT_TRUE(gb.found());
  EXPECT_EQ(*gb.y, constant_process(ter, vec({"1"})));

  DeflatorResult ga = find_deflator(s, fx::ter1_ga(ter));
  EXPECT_FALSE(ga.found());
  std::vector<std::string> labels;
  for (const auto& v : ga.violations()) labels.push_back(v.label);
  EXPECT_NE(std::find(labels.begin(), labels.end(), "{b,c}"), labels.end());
  for (const auto& v : ga.violations()) EXPECT_FALSE(v.separating_direction.empty());

  Process hits_zero = fx::by_node(ter, 1, {{"root", vec({"1"})}, {"a", vec({"3"})}, {"b", vec({"0"})}, {"c", vec({"0"})}});
  EXPECT_EQ(kind_of([&] { find_deflator(hits_zero, fx::ter1_gb(ter)); }), ErrorKind::NotStrictlyPositive);
}

TEST(Enlargement, FullViabilityExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process w = fx::ter1_basis(ter);
  ViabilityReport trivial = check_full_viability(Enlargement::trivial(ter), default_viability_family(w));
  EXPECT_TRUE(trivial.passed());
  EXPECT_TRUE(trivial.coverage.covered);

  std::vector<FamilyMember> asset{{"S", fx::ter1_asset(ter)}};
  EXPECT_FALSE(check_full_viability(fx::ter1_ga(ter), asset).passed());
  ViabilityReport gb = check_full_viability(fx::ter1_gb(ter), asset);
  EXPECT_TRUE(gb.members.at(0).second.found());
  // A proper enlargement always misses a child somewhere.
  EXPECT_FALSE(gb.coverage.covered);
  ASSERT_FALSE(gb.coverage.gaps.empty());
  EXPECT_EQ(gb.coverage.gaps[0].t, 1);
}

TEST(Enlargement, MultiplierExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Reconstruction recon = reconstruct_accessible(fx::ter1_basis(ter));

  MultiplierSolution flat = solve_drift_multiplier(Enlargement::trivial(ter), recon);
  EXPECT_EQ(flat.phi, Process(ter, 2));

  Enlargement ga = fx::ter1_ga(ter);
  MultiplierSolution sol = solve_drift_multiplier(ga, recon);
  ASSERT_EQ(sol.slots.size(), 1u);
  const MultiplierSlot& slot = sol.slots[0];
  EXPECT_EQ(slot.p, vec({"1/3", "1/3", "1/3"}));
  ASSERT_EQ(slot.epsilon.size(), 2u);
  for (const auto& e : slot.epsilon) EXPECT_EQ(dot(e, slot.p), 0);
  const MultiplierSubatom* bc = nullptr;
  for (const auto& s : slot.subatoms)
    if (s.label == "{b,c}") bc = &s;
  ASSERT_NE(bc, nullptr);
  EXPECT_EQ(bc->p_bar, vec({"0", "1/2", "1/2"}));
  EXPECT_EQ(bc->ratio, vec({"-1/2", "1/4", "1/4"}));

  // Gamma(X''_0) on {b,c}: mean of (1/3, -1/6, -1/6) over b and c.
  Process x0 = recon.x2.component(0);
  IdentityCheck c = verify_drift_multiplier(sol, x0, ga, recon);
  EXPECT_TRUE(c.holds());
  EXPECT_EQ(c.rhs.at(1, leaf(ter, "b")), vec({"-1/6"}));
  EXPECT_EQ(c.lhs.at(1, leaf(ter, "b"))[0], atom_mean(ga.filtration(), x0, 1, ga.filtration().atom_of(0, leaf(ter, "b"))));

  MultiplierSolution broken = sol;
  for (int l : {leaf(ter, "b"), leaf(ter, "c")}) broken.phi.at(1, l)[0] += 1;
  IdentityCheck bad = verify_drift_multiplier(broken, x0, ga, recon);
  EXPECT_FALSE(bad.holds());
  ASSERT_TRUE(bad.mismatch.has_value());
  EXPECT_EQ(bad.mismatch->t, 1);
}

TEST(Enlargement, MultiplierWithEmptySubatom) {
  auto ter = FilteredTree::build(fx::ter1());
  Process w3 = fx::by_node(ter, 3,
                           {{"root", vec({"0", "0", "0"})},
                            {"a", vec({"1", "1", "0"})},
                            {"b", vec({"-1", "1", "0"})},
                            {"c", vec({"0", "-2", "0"})}});
  Reconstruction recon = reconstruct_accessible(w3);
  Enlargement ga = fx::ter1_ga(ter);
  MultiplierSolution sol = solve_drift_multiplier(ga, recon);
  for (const auto& s : sol.slots[0].subatoms) EXPECT_EQ(s.ratio[3], 0);
  for (int h = 0; h < recon.x2.dim(); ++h) EXPECT_TRUE(verify_drift_multiplier(sol, recon.x2.component(h), ga, recon).holds());
}

TEST(Enlargement, FbdExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process w1 = fx::ter1_w1(ter);
  Process one = constant_process(ter, vec({"1"}));
  IdentityCheck flat = verify_fbd(w1, q("1/2"), one, Enlargement::trivial(ter));
  EXPECT_TRUE(flat.holds());
  EXPECT_EQ(flat.lhs, Process(ter, 1));

  // W1 has no drift under GB: (1,-1) averages to 0 on {a,b}, 0 on {c}.
  IdentityCheck gb = verify_fbd(w1, q("1/2"), one, fx::ter1_gb(ter));
  EXPECT_TRUE(gb.holds());
  EXPECT_EQ(gb.rhs, Process(ter, 1));

  EXPECT_EQ(kind_of([&] { verify_fbd(w1, q("1/2"), one.scaled(2), fx::ter1_gb(ter)); }), ErrorKind::NotADeflator);
  EXPECT_EQ(kind_of([&] { verify_fbd(w1, q("1/2"), one, fx::ter1_ga(ter)); }), ErrorKind::NotADeflator);
  EXPECT_EQ(kind_of([&] { verify_fbd(w1, 0, one, fx::ter1_gb(ter)); }), ErrorKind::VanishingWeight);
}

TEST(Enlargement, AbsContinuityExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process a = fx::by_node(ter, 1, {{"root", vec({"0"})}, {"a", vec({"1"})}, {"b", vec({"0"})}, {"c", vec({"0"})}});
  EXPECT_TRUE(check_compensator_abs_continuity(a, Enlargement::trivial(ter)).holds);
  EXPECT_TRUE(check_compensator_abs_continuity(a, fx::ter1_ga(ter)).holds);
  EXPECT_EQ(kind_of([&] { check_compensator_abs_continuity(a.scaled(-1), fx::ter1_ga(ter)); }), ErrorKind::NotIncreasing);
  EXPECT_EQ(kind_of([&] { check_compensator_abs_continuity(constant_process(ter, vec({"1"})), fx::ter1_ga(ter)); }),
            ErrorKind::NotIncreasing);
}

TEST(Enlargement, KernelExamples) {
  KernelResult r = covariance_kernel(vec({"1/2", "1/2", "0"}), 1);
  EXPECT_TRUE(r.kernel_matches);
  EXPECT_EQ(r.kernel.size(), 2u);
  // The explicit matrix (1/4)(D_p - p p^T) = (1/16)[[1,-1,0],[-1,1,0],[0,0,0]].
  Matrix expected(3, 3);
  expected(0, 0) = expected(1, 1) = q("1/16");
  expected(0, 1) = expected(1, 0) = q("-1/16");
  EXPECT_EQ(r.covariance, expected);
  EXPECT_TRUE(is_zero((r.covariance * Matrix::from_columns({vec({"1", "1", "0"})})).column(0)));
  EXPECT_TRUE(is_zero((r.covariance * Matrix::from_columns({vec({"0", "0", "1"})})).column(0)));
  EXPECT_EQ(oracle::rank({expected.row(0), expected.row(1), expected.row(2)}), 1);
  EXPECT_EQ(r.covariance * r.j * r.covariance, r.covariance);

  KernelResult uniform = covariance_kernel(vec({"1/3", "1/3", "1/3"}), 2);
  EXPECT_EQ(uniform.kernel.size(), 1u);
  EXPECT_TRUE(uniform.kernel_matches);

  auto ter = FilteredTree::build(fx::ter1());
  Reconstruction recon = reconstruct_accessible(fx::ter1_basis(ter));
  EXPECT_TRUE(covariance_kernel(Enlargement::trivial(ter), recon, 1, ter->root()).certified);
  KernelCertificate ga = covariance_kernel(fx::ter1_ga(ter), recon, 1, ter->root());
  EXPECT_TRUE(ga.certified);
  EXPECT_EQ(ga.g_brackets.size(), 2u);
}

TEST(Enlargement, GStarExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Reconstruction recon = reconstruct_accessible(fx::ter1_basis(ter));
  JumpMeasure mu = jump_measure(recon.x2);
  Enlargement ga = fx::ter1_ga(ter);
  Process tilde = drift_operator(recon.x2, ga).g_martingale;
  for (int h = 0; h < 3; ++h) {
    auto coord = PredictableFunction::tabulate(mu, [h](int, int, const Vec& x) -> Rational { return x[sz(h)]; });
    IdentityCheck c = g_star_consistency(coord, mu, ga);
    EXPECT_TRUE(c.holds());
    EXPECT_EQ(c.lhs, tilde.component(h));
    EXPECT_TRUE(g_star_consistency(coord, mu, Enlargement::trivial(ter)).holds());
  }
  std::mt19937_64 rng(3);
  IdentityCheck any = g_star_consistency(random_function(mu, rng), mu, ga);
  EXPECT_TRUE(any.holds());
  EXPECT_TRUE(g_martingale(ga.filtration(), any.lhs));
}

class EnlargementProperties : public ::testing::TestWithParam<int> {};

TEST_P(EnlargementProperties, DriftContract) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 2100);
  auto t = fuzz_tree(rng);
  Enlargement g = random_enlargement(t, rng);
  Process x = random_martingale(t, 2, rng);
  Process z = random_martingale(t, 2, rng);
  DriftResult r = drift_operator(x, g);
  EXPECT_TRUE(is_zero(r.drift.at(0, 0)));
  EXPECT_TRUE(g_martingale(g.filtration(), r.g_martingale));
  EXPECT_TRUE(is_predictable(r.drift, g.filtration()));
  for (int s = 1; s <= t->horizon(); ++s)
    for (int l = 0; l < t->num_leaves(); ++l)
      EXPECT_EQ(r.drift.increment(s, l)[1], atom_mean(g.filtration(), x, s, g.filtration().atom_of(s - 1, l), 1));

  Rational a = random_rational(rng), b = random_rational(rng);
  Process combo = x.scaled(a) + z.scaled(b);
  EXPECT_EQ(drift_operator(combo, g).drift, r.drift.scaled(a) + drift_operator(z, g).drift.scaled(b));

  Filtration f = base_filtration(t);
  Process h = random_predictable(t, 2, rng);
  EXPECT_EQ(drift_operator(dot_integral(h, x, f), g).drift, dot_integral(h, r.drift, g.filtration()));
}

TEST_P(EnlargementProperties, MultiplierOnRepresentableMartingales) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 2500);
  auto t = fuzz_tree(rng);
  Enlargement g = random_enlargement(t, rng);
  Process w = random_basis(t, 3, rng);
  Reconstruction recon = reconstruct_accessible(w);
  MultiplierSolution sol = solve_drift_multiplier(g, recon);
  for (int h = 0; h < recon.x2.dim(); ++h) EXPECT_TRUE(verify_drift_multiplier(sol, recon.x2.component(h), g, recon).holds());
  Filtration f = base_filtration(t);
  for (int i = 0; i < 3; ++i) {
    Process x = dot_integral(random_predictable(t, recon.x2.dim(), rng), recon.x2, f);
    EXPECT_TRUE(verify_drift_multiplier(sol, x, g, recon).holds());
    EXPECT_TRUE(verify_drift_multiplier(sol, random_martingale(t, 1, rng), g, recon).holds());
  }
}

TEST_P(EnlargementProperties, DeflatorsSatisfyFbd) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 2900);
  auto t = fuzz_tree(rng);
  Enlargement g = random_enlargement(t, rng);
  Process w = random_basis(t, 2, rng);
  for (int k = 0; k < w.dim(); ++k) {
    Process x = w.component(k);
    Rational big = 0;
    for (int s = 1; s <= t->horizon(); ++s)
      for (int l = 0; l < t->num_leaves(); ++l) big = std::max(big, Rational(abs(x.increment(s, l)[0])));
    if (big == 0) continue;
    for (const Rational& a : std::vector<Rational>{Rational(1, 2) / big, Rational(-1, 3) / big}) {
      Process s = doleans_exponential(x, a);
      DeflatorResult r = find_deflator(s, g);
      for (const auto& v : r.violations()) {
        // w . dS >= 0 on every subatom and > 0 on one.
        ASSERT_EQ(v.separating_direction.size(), 1u);
        bool strict = false;
        for (int l : g.filtration().atom(v.t - 1, v.atom)) {
          Rational gain = v.separating_direction[0] * s.increment(v.t, l)[0];
          EXPECT_GE(gain, 0);
          strict = strict || gain > 0;
        }
        EXPECT_TRUE(strict);
      }
      if (r.found()) EXPECT_TRUE(verify_fbd(x, a, *r.y, g).holds());
    }
  }
  if (viability_diagnostics(g).covered)
    EXPECT_TRUE(check_full_viability(g, default_viability_family(w)).passed());
}

TEST_P(EnlargementProperties, AbsContinuityAndKernel) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 3300);
  auto t = fuzz_tree(rng);
  Enlargement g = random_enlargement(t, rng);
  // Increasing and adapted: nonnegative integer steps per node.
  std::vector<Vec> nodes(sz(t->num_nodes()), Vec{0});
  for (int v = 1; v < t->num_nodes(); ++v) {
    const Node& n = t->node(v);
    nodes[sz(v)] = Vec{nodes[sz(n.parent)][0] + Rational(draw(rng, 0, 2))};
  }
  EXPECT_TRUE(check_compensator_abs_continuity(Process::from_nodes(t, 1, nodes), g).holds);

  Vec p;
  Rational left = 1;
  const int n = draw(rng, 2, 5);
  for (int i = 0; i + 1 < n; ++i) {
    Rational x = draw(rng, 0, 2) == 0 ? Rational(0) : left / 2;
    p.push_back(x);
    left -= x;
  }
  p.push_back(left);
  KernelResult k = covariance_kernel(p, draw(rng, 1, 3));
  EXPECT_TRUE(k.kernel_matches);
  EXPECT_EQ(k.covariance * k.j * k.covariance, k.covariance);
}

INSTANTIATE_TEST_SUITE_P(Seeds, EnlargementProperties, ::testing::Range(0, 30));
