#ifndef STRATAHJB_TRAJECTORY_HPP_
#define STRATAHJB_TRAJECTORY_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stratahjb/control_problem.hpp"
#include "stratahjb/vec.hpp"

namespace stratahjb {

struct TrajectoryEvent {
  double time = 0.0;
  int from_stratum = -1;
  int to_stratum = -1;
};

// Time-stamped state path with control log and accumulated augmented cost
// eta (eta' = -l, eta(t0) = 0). strata[i] is the stratum whose piece drives
// the motion on [times[i], times[i+1]).
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> states;
  std::vector<double> eta;
  std::vector<int> controls;
  std::vector<int> strata;
  std::vector<TrajectoryEvent> events;

  const Vec& final_state() const { return states.back(); }
  double final_eta() const { return eta.back(); }
  double running_cost() const { return -eta.back(); }
};

// Piecewise-constant control: control[i] on [breakpoints[i], breakpoints[i+1]).
struct PiecewiseControl {
  std::vector<double> breakpoints;
  std::vector<int> control;

  int at(double t) const;
  static PiecewiseControl constant(int control, double t0, double t1);
  static PiecewiseControl equispaced(const std::vector<int>& controls,
                                     double t0, double t1);
};

struct IntegrateOptions {
  int max_crossings = 10000;
  double crossing_rel_tol = 1e-10;
};

// RK4 with interface crossing detection (bisection to the crossing time),
// sliding on interfaces under tangential controls, and Zeno cap.
Trajectory integrate(const ControlProblem& P, double t0, const Vec& x0,
                     const PiecewiseControl& ctrl, double dt,
                     const IntegrateOptions& opts = {});

// Backward trajectory through (t,x): returns z(s) = y(t - s) on s in [0,h]
// with eta accumulated along z (so the forward running cost is -eta).
Trajectory integrate_backward(const ControlProblem& P, double t, const Vec& x,
                              const PiecewiseControl& ctrl, double dt,
                              double h, const IntegrateOptions& opts = {});

// phi(y(T)) + integral of l for the given control schedule.
double control_schedule_cost(const ControlProblem& P, double t0, const Vec& x0,
                             const PiecewiseControl& ctrl, double dt);

struct FilippovResult {
  Trajectory tracked;
  double measured_gap = 0.0;     // |(z,zeta)(t_end) - (y,eta)(t_end)|
  double dist_integral = 0.0;    // integral of dist((y',eta'), G_Gamma(y))
  double lipschitz = 0.0;        // L_G used in the certificate
  double certified_bound = 0.0;  // e^{L_G (t_end-a)} * dist_integral
};

// Track a reference segment by a true interface trajectory driven by
// tangential controls (greedy per-step nearest velocity). lipschitz_hint < 0
// requests an estimate from sampled difference quotients of G_Gamma.
FilippovResult filippov_project(const ControlProblem& P, int interface_stratum,
                                const Trajectory& reference,
                                double lipschitz_hint = -1.0);

std::vector<Vec> reachable_samples(const ControlProblem& P, const Vec& x,
                                   double t, int n_controls, uint64_t seed);
std::vector<Vec> reachable_tangential_samples(const ControlProblem& P,
                                              int interface_stratum,
                                              const Vec& x, double t,
                                              int n_controls, uint64_t seed);

struct OracleResult {
  double value = 0.0;
  PiecewiseControl best;
};

// Exhaustive minimum of phi(y(T)) + integral l over piecewise-constant
// controls with `depth` equispaced pieces. Upper bound on the true value.
OracleResult oracle_value(const ControlProblem& P, double t0, const Vec& x0,
                          int depth, int n_time_slices);

// Pointwise value queries against a solved grid (or any candidate value
// function); used by the DPP checks so they stay independent of the solver.
using ValueQuery = std::function<double(double t, const Vec& x)>;

struct DppOptions {
  double dt = 0.0;          // 0: h/16
  int random_schedules = 8; // extra 2-piece candidates besides all constants
  uint64_t seed = 42;
};

bool check_superoptimality(const ControlProblem& P, const ValueQuery& v,
                           double t, const Vec& x, double h, double tol,
                           const DppOptions& opts = {});
bool check_suboptimality(const ControlProblem& P, const ValueQuery& v,
                         double t, const Vec& x, double h, double tol,
                         const DppOptions& opts = {});
bool check_backward_suboptimality(const ControlProblem& P, const ValueQuery& v,
                                  double t, const Vec& x, double h, double tol,
                                  const DppOptions& opts = {});

// max over backward trajectories of |v(t-h, y(t-h)) - v(t,x)|.
double limit_property_gap(const ControlProblem& P, const ValueQuery& v,
                          double t, const Vec& x, double h,
                          const DppOptions& opts = {});

// CSV dump: time,x...,stratumId,controlIndex,eta with events as comments.
std::string trajectory_csv(const Trajectory& traj, int dim);

}  // namespace stratahjb

#endif  // STRATAHJB_TRAJECTORY_HPP_
