#ifndef STRATAHJB_VERIFICATION_HPP_
#define STRATAHJB_VERIFICATION_HPP_

#include <string>
#include <vector>

#include "stratahjb/control_problem.hpp"
#include "stratahjb/solver.hpp"

namespace stratahjb {

struct GridParams {
  double box_lo = -2.0;
  double box_hi = 2.0;
  int nodes_per_axis = 81;
  int time_steps = 0;  // 0: CFL default
};

StratifiedGrid make_grid(const ControlProblem& P, const GridParams& gp);

struct CrosscheckReport {
  bool skipped = false;
  std::string skip_reason;
  bool pass = false;
  double max_discrepancy = 0.0;
  double tolerance = 0.0;
};

// Theorem-level uniqueness surrogate: the essential-Hamiltonian treatment of
// interface nodes against the tangential/layered treatment; both must produce
// the same values within scheme error when the final cost is Lipschitz and
// the interface controllability holds.
CrosscheckReport uniqueness_crosscheck(const ControlProblem& P,
                                       const GridParams& gp);

struct ComparisonReport {
  double delta = 0.0;
  double min_diff = 0.0;
  double max_diff = 0.0;
  bool pass = false;
};

// Discrete comparison principle: raising the terminal data by delta >= 0
// must raise every value by an amount in [0, delta].
ComparisonReport comparison_test(const ControlProblem& P, const GridParams& gp,
                                 double delta);

struct StabilityLevel {
  double eps = 0.0;
  double max_diff = 0.0;
};

struct StabilityReport {
  std::vector<StabilityLevel> levels;
  double fitted_constant = 0.0;
  double scheme_error = 0.0;
  bool monotone = false;
  bool bounded = false;
  bool pass = false;
};

struct StabilitySpec {
  Vec direction;          // g: constant velocity perturbation direction
  double cost_bump = 0.0;     // h == 1 scaled by eps
  double terminal_bump = 0.0; // k == 1 scaled by eps
  double eps0 = 0.2;
  int levels = 4;
};

// Perturbation ladder f + eps_n g, l + eps_n h, phi + eps_n k with
// eps_n = eps0 / 2^n: differences must shrink monotonically and stay below
// C * eps_n + scheme error with C fitted at the first level.
StabilityReport stability_test(const ControlProblem& P, const GridParams& gp,
                               const StabilitySpec& spec);

enum class CheckStatus { Pass, Warn, Fail };

struct AuditCheck {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  CheckStatus overall = CheckStatus::Pass;
};

// Sampled audit of the standing hypotheses: per-cell Lipschitz quotients,
// growth bounds, convexity of the sampled augmented dynamics, upper
// semi-continuity across interfaces, and the controllability verdicts.
AuditReport hypothesis_audit(const ControlProblem& P, uint64_t seed = 42);

// Discrete Lipschitz constant of the value restricted to [0,T] x Gamma nodes
// (neighboring nodes along interfaces and consecutive time steps).
double interface_lipschitz_constant(const ValueGrid& V);

struct OrderingReport {
  long long samples = 0;
  long long violations = 0;
  double worst = 0.0;  // most negative ordering slack observed
};

// H_Gamma <= H_E <= H_F over random (x, p) samples on cells and interfaces.
OrderingReport hamiltonian_ordering_check(const ControlProblem& P,
                                          long long samples, uint64_t seed);

}  // namespace stratahjb

#endif  // STRATAHJB_VERIFICATION_HPP_
