#include <gtest/gtest.h>

#include <set>

#include "flab/error.hpp"
#include "flab/generators.hpp"
#include "flab/representation.hpp"
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

Process bin1_walk(const TreePtr& t) {
  return fx::by_node(t, 1, {{"root", vec({"0"})}, {"u", vec({"1"})}, {"d", vec({"-1"})}});
}

// Per-node increments of dot(h, w), read off children directly.
Vec step_value(const Process& h, const Process& w, int t, int leaf) { return Vec{dot(h.at(t, leaf), w.increment(t, leaf))}; }

TreePtr fuzz_tree(std::mt19937_64& rng, int branching) {
  RandomTreeParams p;
  p.horizon = 3;
  p.max_branching = branching;
  return FilteredTree::build(random_tree_spec(rng, p));
}

}  // namespace

TEST(Representation, CheckMrpExamples) {
  auto bin = FilteredTree::build(fx::bin1());
  EXPECT_TRUE(check_mrp(bin1_walk(bin)).mrp);

  auto ter = FilteredTree::build(fx::ter1());
  MrpReport one = check_mrp(fx::ter1_w1(ter));
  EXPECT_FALSE(one.mrp);
  ASSERT_TRUE(one.failing_node.has_value());
  EXPECT_EQ(*one.failing_node, ter->root());
  EXPECT_EQ(one.witness, vec({"1", "1", "-2"}));
  // Rank 1 against the 2 needed for three children.
  EXPECT_EQ(oracle::rank(oracle::child_increments(*ter, fx::ter1_w1(ter), ter->root())), 1);

  MrpReport two = check_mrp(fx::ter1_basis(ter));
  EXPECT_TRUE(two.mrp);
  EXPECT_EQ(two.nodes.at(0).rank, 2);
}

TEST(Representation, CheckMrpRejectsNonMartingale) {
  auto bin = FilteredTree::build(fx::bin1());
  Process drift = fx::by_node(bin, 1, {{"root", vec({"0"})}, {"u", vec({"2"})}, {"d", vec({"-1"})}});
  EXPECT_EQ(kind_of([&] { check_mrp(drift); }), ErrorKind::NotAMartingale);
}

TEST(Representation, CoefficientExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Process w = fx::ter1_basis(ter);
  EXPECT_EQ(representation_coefficient(w.component(1), w).at(1, 0), vec({"0", "1"}));
  EXPECT_EQ(representation_coefficient(constant_process(ter, vec({"7"})), w).at(1, 2), vec({"0", "0"}));

  // H1 (1,-1,0) + H2 (1,1,-2) = (5,-1,-4) gives H2 = 2, H1 = 3.
  Process x = fx::by_node(ter, 1, {{"root", vec({"1"})}, {"a", vec({"6"})}, {"b", vec({"0"})}, {"c", vec({"-3"})}});
  Process h = representation_coefficient(x, w);
  EXPECT_EQ(h.at(1, 0), vec({"3", "2"}));
  for (int l = 0; l < ter->num_leaves(); ++l) EXPECT_EQ(step_value(h, w, 1, l), x.increment(1, l));

  EXPECT_EQ(kind_of([&] { representation_coefficient(x, fx::ter1_w1(ter)); }), ErrorKind::NoRepresentation);
}

TEST(Representation, MultiplicityExamples) {
  auto bin = FilteredTree::build(fx::bin1());
  EXPECT_EQ(conditional_multiplicity(*bin, bin->root(), 1).count, 2);
  auto ter = FilteredTree::build(fx::ter1());
  Multiplicity m = conditional_multiplicity(*ter, ter->root(), 2);
  EXPECT_EQ(m.count, 3);
  ASSERT_EQ(m.witness.subatoms.size(), 3u);
  EXPECT_EQ(m.witness.subatoms[0].node, ter->index_of("a"));

  Multiplicity padded = conditional_multiplicity(*ter, ter->root(), 4);
  ASSERT_EQ(padded.witness.subatoms.size(), 5u);
  EXPECT_EQ(padded.witness.subatoms[4].node, -1);
  EXPECT_EQ(padded.witness.subatoms[4].prob, 0);

  // Descending probability: y3 (1/2), y1 (1/3), y2 (1/6).
  auto two = FilteredTree::build(fx::two_period());
  Multiplicity y = conditional_multiplicity(*two, two->index_of("y"));
  ASSERT_EQ(y.witness.subatoms.size(), 3u);
  EXPECT_EQ(y.witness.subatoms[0].node, two->index_of("y3"));
  EXPECT_EQ(y.witness.subatoms[1].node, two->index_of("y1"));
  EXPECT_EQ(y.witness.subatoms[2].node, two->index_of("y2"));
  Rational total = 0;
  for (const auto& s : y.witness.subatoms) total += s.prob;
  EXPECT_EQ(total, 1);
}

TEST(Representation, SingleJumpExamples) {
  auto bin = FilteredTree::build(fx::bin1());
  Process w = bin1_walk(bin);
  StoppingTime one{{1, 1}};
  int u = bin->node(bin->index_of("u")).leaf_begin;
  std::vector<Rational> xi(2, Rational(0));
  xi[sz(u)] = 1;
  Process h = single_jump_coefficient(xi, one, w);
  EXPECT_EQ(h.at(1, 0), vec({"1/2"}));
  EXPECT_EQ(h.at(1, 1), vec({"1/2"}));

  EXPECT_EQ(single_jump_coefficient({q("3"), q("3")}, one, w), Process(bin, 1));

  std::vector<Rational> jump{w.increment(1, 0)[0], w.increment(1, 1)[0]};
  EXPECT_EQ(single_jump_coefficient(jump, one, w).at(1, 0), vec({"1"}));

  auto ter = FilteredTree::build(fx::ter1());
  EXPECT_EQ(kind_of([&] { single_jump_coefficient({q("1"), q("0"), q("0")}, StoppingTime{{1, 1, 1}}, fx::ter1_w1(ter)); }),
            ErrorKind::NoRepresentation);
  EXPECT_EQ(kind_of([&] { single_jump_coefficient({q("1")}, one, w); }), ErrorKind::DimensionMismatch);
}

TEST(Representation, ReconstructExamples) {
  auto ter = FilteredTree::build(fx::ter1());
  Reconstruction r = reconstruct_accessible(fx::ter1_basis(ter));
  EXPECT_EQ(r.d, 2);
  ASSERT_EQ(r.x2.dim(), 3);
  // (1/2)(1_a - 1/3) on a, b, c.
  EXPECT_EQ(r.x2.at(1, 0)[0], q("1/3"));
  EXPECT_EQ(r.x2.at(1, 1)[0], q("-1/6"));
  EXPECT_EQ(r.x2.at(1, 2)[0], q("-1/6"));
  ASSERT_EQ(r.witnesses.size(), 1u);
  EXPECT_EQ(r.witnesses[0].t, 1);

  // A redundant third component pads the slot with an empty subatom.
  Process w3 = fx::by_node(ter, 3,
                           {{"root", vec({"0", "0", "0"})},
                            {"a", vec({"1", "1", "0"})},
                            {"b", vec({"-1", "1", "0"})},
                            {"c", vec({"0", "-2", "0"})}});
  Reconstruction padded = reconstruct_accessible(w3);
  ASSERT_EQ(padded.x2.dim(), 4);
  EXPECT_EQ(padded.x2.component(3), Process(ter, 1));

  EXPECT_EQ(kind_of([&] { reconstruct_accessible(fx::ter1_w1(ter)); }), ErrorKind::NoRepresentation);
}

TEST(Representation, ReconstructWeightsHalveEachPeriod) {
  auto two = FilteredTree::build(fx::two_period());
  std::mt19937_64 rng(11);
  Reconstruction r = reconstruct_accessible(random_basis(two, 2, rng));
  // Slot t carries weight 2^-t: at y, the largest subatom is y3 with p = 1/2.
  int y3 = two->node(two->index_of("y3")).leaf_begin;
  EXPECT_EQ(r.x2.increment(2, y3)[0], q("1/4") * (1 - q("1/2")));
  int y1 = two->node(two->index_of("y1")).leaf_begin;
  EXPECT_EQ(r.x2.increment(2, y1)[0], q("1/4") * (0 - q("1/2")));
}

TEST(Representation, OrthogonalizeTranslationOnTer1) {
  auto ter = FilteredTree::build(fx::ter1());
  Process m = fx::ter1_w1(ter);
  Orthogonalization o = orthogonalize(m);
  EXPECT_EQ(o.cs.n, 2);
  Process h(ter, 1);
  for (int l = 0; l < 3; ++l) h.at(1, l) = vec({"5"});
  Process translated = dot_integral(translate_integrand(h, o), o.x_circ, base_filtration(ter));
  // 5 dW on a, b, c.
  EXPECT_EQ(translated.at(1, 0), vec({"5"}));
  EXPECT_EQ(translated.at(1, 1), vec({"-5"}));
  EXPECT_EQ(translated.at(1, 2), vec({"0"}));

  for (int j = 0; j < o.cs.n; ++j) {
    Process unit(ter, o.cs.n);
    for (int l = 0; l < 3; ++l) unit.at(1, l)[sz(j)] = 1;
    EXPECT_EQ(dot_integral(unit, o.x_circ, base_filtration(ter)), o.x_circ.component(j));
  }
}

TEST(Representation, CompensatedComponentsShareJumps) {
  // With jumps +1 and -1 each component moves on both children, so the
  // literal bracket is nonzero even though the raw indicator parts are disjoint.
  auto bin = FilteredTree::build(fx::bin1());
  Orthogonalization o = orthogonalize(bin1_walk(bin));
  ASSERT_EQ(o.cs.n, 2);
  Process br = bracket_matrix(o.x_circ, o.x_circ);
  EXPECT_EQ(br.at(1, 0)[1], q("-1/4"));
  EXPECT_EQ(br.at(1, 1)[1], q("-1/4"));
}

TEST(Representation, JumpConstraintExamples) {
  auto bin = FilteredTree::build(fx::bin1());
  ConstraintSystem b = jump_constraint(bin1_walk(bin));
  EXPECT_EQ(b.n, 2);
  EXPECT_EQ(*b.slot(0, 0), vec({"-1"}));
  EXPECT_EQ(*b.slot(0, 1), vec({"1"}));

  auto ter = FilteredTree::build(fx::ter1());
  EXPECT_EQ(jump_constraint(fx::ter1_basis(ter)).n, 3);
  // A constant W represents only where nothing branches.
  auto line = FilteredTree::build({1, {{"root", 0, std::nullopt, 1}, {"only", 1, "root", 1}}});
  EXPECT_EQ(jump_constraint(fx::by_node(line, 1, {{"root", vec({"2"})}, {"only", vec({"2"})}})).n, 0);
  EXPECT_EQ(kind_of([&] { jump_constraint(fx::ter1_w1(ter)); }), ErrorKind::NoRepresentation);
}

class RepresentationProperties : public ::testing::TestWithParam<int> {};

TEST_P(RepresentationProperties, BasisOnFuzzedTree) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 500);
  auto t = fuzz_tree(rng, 4);
  const int d = 3;
  Process w = random_basis(t, d, rng);
  MrpReport r = check_mrp(w);
  ASSERT_TRUE(r.mrp);
  Filtration f = base_filtration(t);

  for (const auto& nr : r.nodes) {
    EXPECT_EQ(nr.rank, oracle::rank(oracle::child_increments(*t, w, nr.node)));
    EXPECT_LE(conditional_multiplicity(*t, nr.node, d).count, d + 1);
  }

  // Round trip of the coefficient.
  Process x = dot_integral(random_predictable(t, d, rng), w, f);
  Process h = representation_coefficient(x, w);
  EXPECT_EQ(dot_integral(h, w, f), x);

  // Reconstructed family: bounded jumps, at most three values per slot, representation kept.
  Reconstruction rec = reconstruct_accessible(w);
  EXPECT_TRUE(check_mrp(rec.x2).mrp);
  for (int v = 0; v < t->num_nodes(); ++v) {
    const Node& n = t->node(v);
    if (n.children.empty()) continue;
    for (int k = 0; k < rec.x2.dim(); ++k) {
      std::set<Rational> values;
      for (int c : n.children) {
        Rational j = rec.x2.increment(n.time + 1, t->node(c).leaf_begin)[sz(k)];
        EXPECT_LE(abs(j), 1);
        values.insert(j);
      }
      EXPECT_LE(values.size(), 2u);
    }
  }
  Orthogonalization o = orthogonalize(w);
  EXPECT_TRUE(check_mrp(o.x_circ).mrp);
}

TEST_P(RepresentationProperties, SingleJumpResidual) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 900);
  auto t = fuzz_tree(rng, 3);
  Process w = random_basis(t, 2, rng);
  const int at = draw(rng, 1, t->horizon());
  std::vector<Rational> xi(sz(t->num_leaves()));
  for (int v : t->nodes_at(at)) {
    Rational value = random_rational(rng);
    for (int l = t->node(v).leaf_begin; l < t->node(v).leaf_end; ++l) xi[sz(l)] = value;
  }
  StoppingTime r{std::vector<int>(sz(t->num_leaves()), at)};
  Process h = single_jump_coefficient(xi, r, w);
  for (int s = 1; s <= t->horizon(); ++s)
    for (int l = 0; l < t->num_leaves(); ++l) {
      if (s != at) {
        EXPECT_TRUE(is_zero(h.at(s, l)));
        continue;
      }
      // xi minus its mean over the siblings of the node at time `at`.
      const Node& parent = t->node(t->ancestor(l, at - 1));
      Rational mean = 0;
      for (int c : parent.children) mean += t->node(c).branch_prob * xi[sz(t->node(c).leaf_begin)];
      EXPECT_EQ(step_value(h, w, s, l)[0], xi[sz(l)] - mean);
    }
}

TEST_P(RepresentationProperties, OrthogonalizeTranslatesAndSeparates) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 1300);
  auto t = fuzz_tree(rng, 4);
  Process m = random_martingale(t, 2, rng);
  Orthogonalization o = orthogonalize(m);
  Filtration f = base_filtration(t);
  Process h = random_predictable(t, 2, rng);
  EXPECT_EQ(dot_integral(translate_integrand(h, o), o.x_circ, f), dot_integral(h, m, f));

  // Each increment is e(alpha_k) 1{dM = alpha_k} minus its conditional mean.
  for (int v = 0; v < t->num_nodes(); ++v) {
    const Node& n = t->node(v);
    for (int k = 0; k < o.cs.n; ++k) {
      const auto& a = o.cs.slot(v, k);
      std::vector<Rational> raw;
      Rational mean = 0;
      for (int c : n.children) {
        Vec jump = m.increment(n.time + 1, t->node(c).leaf_begin);
        raw.push_back(a && jump == *a ? truncation_weight(*a) : Rational(0));
        mean += t->node(c).branch_prob * raw.back();
      }
      for (std::size_t j = 0; j < n.children.size(); ++j)
        EXPECT_EQ(o.x_circ.increment(n.time + 1, t->node(n.children[j]).leaf_begin)[sz(k)], raw[j] - mean);
    }
  }
}

TEST_P(RepresentationProperties, TooManyChildrenBreaksMrp) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(GetParam()) + 1700);
  RandomTreeParams p;
  p.horizon = 2;
  p.max_branching = 4;
  p.full_root = true;
  auto t = FilteredTree::build(random_tree_spec(rng, p));
  Process w = random_basis(t, 2, rng);
  EXPECT_EQ(conditional_multiplicity(*t, t->root()).count, 4);
  EXPECT_FALSE(check_mrp(w).mrp);
}

INSTANTIATE_TEST_SUITE_P(Seeds, RepresentationProperties, ::testing::Range(0, 40));
