#include "flab/lp.hpp"

#include "flab/error.hpp"

namespace flab::lp {
namespace {

struct Tableau {
  std::vector<Vec> rows;             // constraint coefficients over all columns
  Vec rhs;
  std::vector<std::size_t> basis;    // basic column per row
  std::size_t cols = 0;

  void pivot(std::size_t r, std::size_t c) {
    Rational inv = 1 / rows[r][c];
    for (auto& x : rows[r]) x *= inv;
    rhs[r] *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || sgn(rows[i][c]) == 0) continue;
      Rational f = rows[i][c];
      for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= f * rows[r][j];
      rhs[i] -= f * rhs[r];
    }
    basis[r] = c;
  }

  // Maximizes cost . x over the current basis; columns with allowed[j] false never enter.
  Status optimize(const Vec& cost, const std::vector<bool>& allowed) {
    for (;;) {
      std::vector<bool> basic(cols, false);
      for (auto b : basis) basic[b] = true;
      std::size_t entering = cols;
      for (std::size_t j = 0; j < cols && entering == cols; ++j) {
        if (!allowed[j] || basic[j]) continue;
        Rational reduced = cost[j];
        for (std::size_t i = 0; i < rows.size(); ++i) reduced -= cost[basis[i]] * rows[i][j];
        if (sgn(reduced) > 0) entering = j;
      }
      if (entering == cols) return Status::Optimal;
      std::size_t leaving = rows.size();
      Rational best;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (sgn(rows[i][entering]) <= 0) continue;
        Rational ratio = rhs[i] / rows[i][entering];
        if (leaving == rows.size() || ratio < best || (ratio == best && basis[i] < basis[leaving])) {
          leaving = i;
          best = ratio;
        }
      }
      if (leaving == rows.size()) return Status::Unbounded;
      pivot(leaving, entering);
    }
  }

  Rational value(const Vec& cost) const {
    Rational v = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) v += cost[basis[i]] * rhs[i];
    return v;
  }
};

}  // namespace

Solution solve(const Problem& problem) {
  const std::size_t n = problem.num_vars;
  const std::size_t m = problem.constraints.size();
  if (problem.objective.size() != n) throw Error(ErrorKind::DimensionMismatch, "lp objective length");

  std::size_t num_slack = 0, num_art = 0;
  for (const auto& c : problem.constraints) {
    if (c.coeffs.size() != n) throw Error(ErrorKind::DimensionMismatch, "lp constraint length");
    bool flip = sgn(c.rhs) < 0;
    Relation rel = c.relation;
    if (flip && rel != Relation::Equal) rel = rel == Relation::LessEqual ? Relation::GreaterEqual : Relation::LessEqual;
    if (rel != Relation::Equal) ++num_slack;
    if (rel != Relation::LessEqual) ++num_art;
  }

  Tableau t;
  t.cols = n + num_slack + num_art;
  t.rows.assign(m, zeros(t.cols));
  t.rhs.resize(m);
  t.basis.resize(m);
  std::size_t next_slack = n, next_art = n + num_slack;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& c = problem.constraints[i];
    bool flip = sgn(c.rhs) < 0;
    Relation rel = c.relation;
    if (flip && rel != Relation::Equal) rel = rel == Relation::LessEqual ? Relation::GreaterEqual : Relation::LessEqual;
    for (std::size_t j = 0; j < n; ++j) t.rows[i][j] = flip ? -c.coeffs[j] : c.coeffs[j];
    t.rhs[i] = flip ? -c.rhs : c.rhs;
    if (rel == Relation::LessEqual) {
      t.rows[i][next_slack] = 1;
      t.basis[i] = next_slack++;
    } else {
      if (rel == Relation::GreaterEqual) t.rows[i][next_slack++] = -1;
      t.rows[i][next_art] = 1;
      t.basis[i] = next_art++;
    }
  }

  const std::size_t art_begin = n + num_slack;
  std::vector<bool> all(t.cols, true);
  Vec phase1 = zeros(t.cols);
  for (std::size_t j = art_begin; j < t.cols; ++j) phase1[j] = -1;
  t.optimize(phase1, all);
  if (sgn(t.value(phase1)) < 0) return {Status::Infeasible, {}, 0};

  // Drive zero-level artificials out of the basis; drop rows that are redundant.
  for (std::size_t i = 0; i < t.rows.size();) {
    if (t.basis[i] < art_begin) {
      ++i;
      continue;
    }
    std::size_t col = art_begin;
    for (std::size_t j = 0; j < art_begin; ++j)
      if (sgn(t.rows[i][j]) != 0) {
        col = j;
        break;
      }
    if (col < art_begin) {
      t.pivot(i, col);
      ++i;
    } else {
      t.rows.erase(t.rows.begin() + static_cast<std::ptrdiff_t>(i));
      t.rhs.erase(t.rhs.begin() + static_cast<std::ptrdiff_t>(i));
      t.basis.erase(t.basis.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }

  std::vector<bool> allowed(t.cols, true);
  for (std::size_t j = art_begin; j < t.cols; ++j) allowed[j] = false;
  Vec cost = zeros(t.cols);
  for (std::size_t j = 0; j < n; ++j) cost[j] = problem.objective[j];
  if (t.optimize(cost, allowed) == Status::Unbounded) return {Status::Unbounded, {}, 0};

  Solution s;
  s.status = Status::Optimal;
  s.x = zeros(n);
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    if (t.basis[i] < n) s.x[t.basis[i]] = t.rhs[i];
  s.value = dot(problem.objective, s.x);
  return s;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

}  // namespace flab::lp
