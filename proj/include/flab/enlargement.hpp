#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flab/calculus.hpp"
#include "flab/linalg.hpp"
#include "flab/lp.hpp"
#include "flab/representation.hpp"

namespace flab {

struct DriftResult {
  Process drift;         // G-predictable, null at 0
  Process g_martingale;  // X - drift
};
// Throws NotAMartingale unless X is an F-martingale.
DriftResult drift_operator(const Process& x, const Enlargement& g);

// One LP per G atom g at t-1: weights y_i on its G_t subatoms.
struct AtomAudit {
  int t = 0;
  int atom = 0;
  std::string label;
  std::vector<std::string> subatoms;
  lp::Status status = lp::Status::Infeasible;
  Rational tau;                // optimal min_i y_i, when feasible
  std::vector<Rational> y;     // optimal weights, when feasible
  bool ok = false;             // feasible with tau > 0
  Vec separating_direction;    // w with w.(S_t - S_{t-1}) >= 0 on every subatom, > 0 on one; set when !ok
};

struct DeflatorResult {
  std::optional<Process> y;
  std::vector<AtomAudit> atoms;
  bool found() const { return y.has_value(); }
  std::vector<AtomAudit> violations() const;
};
DeflatorResult find_deflator(const Process& s, const Enlargement& g);

// Per G atom: does it meet every child of its F atom? On a finite tree, all
// atoms covering is equivalent to G = F.
struct CoverageGap {
  int t = 0;
  std::string atom;
  std::vector<std::string> missed_children;
};
struct CoverageReport {
  bool covered = true;
  std::vector<CoverageGap> gaps;
};
CoverageReport viability_diagnostics(const Enlargement& g);

struct FamilyMember {
  std::string name;
  Process s;
};
struct ViabilityReport {
  std::vector<std::pair<std::string, DeflatorResult>> members;
  CoverageReport coverage;
  bool passed() const;
};
// Doleans exponentials E(a W_k) for a = +-j/(4 max|Delta W_k|), j = 1..3.
std::vector<FamilyMember> default_viability_family(const Process& w);
ViabilityReport check_full_viability(const Enlargement& g, const std::vector<FamilyMember>& family);

struct MultiplierSubatom {
  int g_atom = 0;       // G atom at t-1 inside the F atom
  std::string label;
  Vec p_bar;            // P[A_h | G atom]
  Vec ratio;            // (1/2^t)(p_bar/p - 1), with 0/0 - 1 = 0
  Vec varsigma;         // coefficients of ratio in the basis epsilon
  Vec phi;              // 4^t varsigma
};
struct MultiplierSlot {
  int t = 0;
  int node = 0;
  Vec p;
  std::vector<Vec> epsilon;  // orthogonal basis of p's complement, d vectors
  std::vector<MultiplierSubatom> subatoms;
};
struct MultiplierSolution {
  Process n;    // d-dimensional F-martingale
  Process phi;  // d-dimensional G-predictable
  std::vector<MultiplierSlot> slots;
};
MultiplierSolution solve_drift_multiplier(const Enlargement& g, const Reconstruction& recon);

struct IdentityCheck {
  Process lhs;
  Process rhs;
  std::optional<PathPoint> mismatch;
  bool holds() const { return !mismatch; }
};
// Gamma(X) = phi . [N, X]^{F.p}, with X first represented on the reconstructed basis.
IdentityCheck verify_drift_multiplier(const MultiplierSolution& sol, const Process& x, const Enlargement& g,
                                      const Reconstruction& recon);

// Gamma(X) = -(1/Y_-) . [Y, X]^{G.p}, for a deflator Y of E(aX).
IdentityCheck verify_fbd(const Process& x, const Rational& a, const Process& y, const Enlargement& g);

struct AbsContinuityReport {
  bool holds = true;
  std::optional<std::pair<int, std::string>> witness;  // (t, G atom)
};
AbsContinuityReport check_compensator_abs_continuity(const Process& a, const Enlargement& g);

struct KernelResult {
  Matrix covariance;             // (1/4^t)(D_p - p p^T)
  std::vector<Vec> kernel;       // computed null space
  std::vector<Vec> expected;     // {a constant on I} basis: 1_I then e_h for h outside I
  bool kernel_matches = false;
  Matrix j;                      // 4^t times the pseudo-inverse on I, zero elsewhere
};
KernelResult covariance_kernel(const Vec& p, int t);

struct KernelCertificate {
  KernelResult kernel;
  Matrix f_bracket;                                // Delta [X'', X'']^{F.p} from the processes
  std::vector<std::pair<std::string, Matrix>> g_brackets;  // per G subatom
  bool f_matches_formula = false;
  bool certified = false;
};
KernelCertificate covariance_kernel(const Enlargement& g, const Reconstruction& recon, int t, int node);

// g * (mu - nu_G) = g * (mu - nu) - Gamma(g * (mu - nu)).
IdentityCheck g_star_consistency(const PredictableFunction& gfun, const JumpMeasure& mu, const Enlargement& g);

Process product(const Process& a, const Process& b);  // scalar pointwise product

}  // namespace flab
