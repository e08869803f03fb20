#ifndef STRATAHJB_CONTROL_PROBLEM_HPP_
#define STRATAHJB_CONTROL_PROBLEM_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "stratahjb/geometry.hpp"
#include "stratahjb/vec.hpp"

namespace stratahjb {

// Finite discretization of the compact control set.
struct ControlSet {
  std::vector<Vec> samples;
  std::string descriptor;

  int size() const { return static_cast<int>(samples.size()); }
  int control_dim() const {
    return samples.empty() ? 0 : static_cast<int>(samples[0].size());
  }

  // `count` points on the circle of the given radius plus the center.
  static ControlSet ball(double radius, int count, int dim);
  static ControlSet interval(double lo, double hi, int count);
  static ControlSet finite(std::vector<Vec> samples);
};

// Velocity piece f(x,a) = S a + A x + b. Covers the config families:
// constant (S=A=0), scaled-ball (S = c I), and affine.
struct VelocityPiece {
  std::vector<Vec> S;  // d rows of length n
  std::vector<Vec> A;  // d rows of length d
  Vec b;               // length d

  Vec eval(const Vec& x, const Vec& a) const;
  static VelocityPiece constant(const Vec& v, int control_dim);
  static VelocityPiece scaled_ball(double scale, int dim);
};

// Running cost piece: polynomial in |x|, independent of the control.
struct CostPiece {
  Vec coeffs;  // l(x) = sum_k coeffs[k] * |x|^k

  double eval(const Vec& x, const Vec& /*a*/) const;
  static CostPiece constant(double c) { return CostPiece{{c}}; }
};

enum class TerminalKind { AbsX1, LinearX1, IndicatorPositiveX1, Table };
enum class RegularityMode { Lipschitz, LSC };

// Terminal cost, a function of x1 in all supported families.
struct TerminalCost {
  TerminalKind kind = TerminalKind::AbsX1;
  std::vector<double> xs;    // Table breakpoints (increasing)
  std::vector<double> vals;  // Table values, piecewise linear
  double offset = 0.0;       // additive shift (used by perturbation ladders)

  double eval(const Vec& x) const;
};

// Essential and tangential control subsets at one point (Definition-level
// feasibility data: per incident stratum, the controls whose piece velocity
// lies in the tangent cone of that stratum's closure).
struct ControlFeasibility {
  Vec x;
  int own_stratum = -1;
  std::map<int, std::vector<int>> essential;  // stratumId -> control indices
  std::vector<int> tangential;                // for the own stratum
  double tolerance = 0.0;

  std::vector<int> essential_union() const;
};

struct AugmentedVelocity {
  Vec v;
  double w = 0.0;  // -l(x,a) - r
  double r = 0.0;  // slack in [0, b(x,a)]
  int control = -1;
  int stratum = -1;
};

// Result of projecting a control with an outward normal component onto the
// interface dynamics by convex combination with an opposite-sign control.
struct TangentializeResult {
  bool feasible = false;
  Vec velocity;
  double cost_rate = 0.0;
  double weight_a = 1.0;
  double weight_b = 0.0;
  int partner = -1;
};

enum class ControllabilityVerdict { Holds, Violated, EmptyTangential };

struct InterfaceControllability {
  int stratum = -1;
  ControllabilityVerdict verdict = ControllabilityVerdict::Violated;
  double ball_radius = 0.0;             // inscribed radius of the velocity hull
  double tangential_ball_radius = 0.0;  // same, restricted to the tangent space
};

struct ControllabilityReport {
  std::string mode;  // "H2" or "H3"
  std::vector<InterfaceControllability> interfaces;
  bool holds = false;
};

// The control system (f, l, phi) on a stratification, with per-stratum smooth
// pieces defined on stratum closures. Immutable after construction; all
// evaluations are pure.
class ControlProblem {
 public:
  ControlProblem(std::shared_ptr<const Stratification> strat,
                 ControlSet controls, std::vector<VelocityPiece> velocity,
                 std::vector<CostPiece> cost, TerminalCost terminal,
                 RegularityMode terminal_mode, double cf, double cl,
                 double lambda_l, double lambda_phi, double horizon,
                 std::string name = "");

  const Stratification& strat() const { return *strat_; }
  std::shared_ptr<const Stratification> strat_ptr() const { return strat_; }
  const ControlSet& controls() const { return controls_; }
  const TerminalCost& terminal() const { return terminal_; }
  RegularityMode terminal_mode() const { return terminal_mode_; }
  double cf() const { return cf_; }
  double cl() const { return cl_; }
  double lambda_l() const { return lambda_l_; }
  double lambda_phi() const { return lambda_phi_; }
  double lambda() const { return std::max(lambda_l_, lambda_phi_); }
  double horizon() const { return T_; }
  int dim() const { return strat_->dimension(); }
  const std::string& name() const { return name_; }
  double tangency_tol() const { return tangency_tol_; }

  const VelocityPiece& velocity_piece(int stratum_id) const;
  const CostPiece& cost_piece(int stratum_id) const;

  // Piece evaluations with the growth checks of the hypotheses.
  Vec eval_f(int stratum_id, const Vec& x, int control) const;
  double eval_l(int stratum_id, const Vec& x, int control) const;
  double eval_b(int stratum_id, const Vec& x, int control) const;
  double eval_phi(const Vec& x) const { return terminal_.eval(x); }
  double cost_bound(const Vec& x) const;  // c_l (1 + |x|^lambda_l)

  std::vector<int> tangential_controls(const Vec& x) const;
  ControlFeasibility essential_controls(const Vec& x) const;
  std::vector<AugmentedVelocity> augmented_essential(const Vec& x) const;

  TangentializeResult tangentialize_control(const Vec& x, int control) const;

  ControllabilityReport check_controllability(const std::string& mode,
                                              int sample_count,
                                              uint64_t seed = 42) const;

  // Problem with f^e = f + eps*g (g constant), l^e = l + eps_l, phi^e = phi
  // + eps_phi; growth constants adjusted to keep the hypotheses valid.
  ControlProblem perturbed(const Vec& g, double eps_f, double eps_l,
                           double eps_phi) const;

  // Interior points of a stratum for sampled checks, spread over a box of the
  // given half-width around the origin.
  Vec sample_point_on_stratum(int stratum_id, double half_width,
                              uint64_t seed) const;

 private:
  std::shared_ptr<const Stratification> strat_;
  ControlSet controls_;
  std::vector<VelocityPiece> velocity_;
  std::vector<CostPiece> cost_;
  TerminalCost terminal_;
  RegularityMode terminal_mode_;
  double cf_, cl_, lambda_l_, lambda_phi_, T_;
  std::string name_;
  double tangency_tol_ = 1e-8;
};

}  // namespace stratahjb

#endif  // STRATAHJB_CONTROL_PROBLEM_HPP_
