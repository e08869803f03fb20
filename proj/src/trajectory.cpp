#include "stratahjb/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "stratahjb/errors.hpp"
#include "stratahjb/parallel.hpp"

namespace stratahjb {

int PiecewiseControl::at(double t) const {
  // Piece i is active on [breakpoints[i], breakpoints[i+1]); the last piece
  // also covers the right endpoint.
  for (std::size_t i = 0; i + 1 < control.size(); ++i)
    if (t < breakpoints[i + 1]) return control[i];
  return control.back();
}

PiecewiseControl PiecewiseControl::constant(int c, double t0, double t1) {
  return PiecewiseControl{{t0, t1}, {c}};
}

PiecewiseControl PiecewiseControl::equispaced(const std::vector<int>& controls,
                                              double t0, double t1) {
  PiecewiseControl pc;
  const int k = static_cast<int>(controls.size());
  for (int i = 0; i <= k; ++i) pc.breakpoints.push_back(t0 + (t1 - t0) * i / k);
  pc.control = controls;
  return pc;
}

namespace {

struct AugState {
  Vec x;
  double eta;
};

// One RK4 step of (x', eta') = (f_M(x,a), -l_M(x)) with the piece frozen.
AugState rk4_step(const ControlProblem& P, int stratum, int control,
                  const AugState& s, double h) {
  const auto f = [&](const Vec& x) { return P.eval_f(stratum, x, control); };
  const auto l = [&](const Vec& x) { return P.eval_l(stratum, x, control); };
  const Vec k1 = f(s.x);
  const double e1 = -l(s.x);
  const Vec x2 = axpy(0.5 * h, k1, s.x);
  const Vec k2 = f(x2);
  const double e2 = -l(x2);
  const Vec x3 = axpy(0.5 * h, k2, s.x);
  const Vec k3 = f(x3);
  const double e3 = -l(x3);
  const Vec x4 = axpy(h, k3, s.x);
  const Vec k4 = f(x4);
  const double e4 = -l(x4);
  AugState out;
  out.x = s.x;
  for (std::size_t i = 0; i < s.x.size(); ++i)
    out.x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  out.eta = s.eta + h / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
  return out;
}

// Driving stratum for a trajectory at x under control a: the stratum whose
// piece moves the state for the next instant. On an interface this is the
// interface itself when the control is tangential (sliding); otherwise the
// destination is an incident stratum whose own piece, evaluated at x, points
// strictly into it (the crossing instant is measure zero, so the destination
// piece governs). If no stratum qualifies the side of the interface piece's
// velocity decides, which may chatter and then hits the Zeno cap.
int driving_stratum(const ControlProblem& P, const Vec& x, int control) {
  const Stratification& S = P.strat();
  const int loc = S.locate(x);
  if (S.stratum(loc).kind == StratumKind::Cell) return loc;
  const Vec floc = P.eval_f(loc, x, control);
  const ConeDescriptor tspace = S.tangent_cone(loc, x);
  if (tspace.distance(floc) <= P.tangency_tol() * (1.0 + norm2(floc)))
    return loc;

  std::vector<int> candidates = S.incident_strata(x);
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (S.stratum(a).dim != S.stratum(b).dim)
      return S.stratum(a).dim > S.stratum(b).dim;
    return a < b;
  });
  for (int sid : candidates) {
    if (sid == loc) continue;
    const auto& sig = S.stratum(sid).signature;
    const Vec f = P.eval_f(sid, x, control);
    const double scale = 1.0 + norm2(f);
    bool ok = true;
    for (int h : S.zero_planes(loc)) {
      const int axis = S.hyperplanes()[h].axis;
      if (sig[h] == 0)
        ok = ok && std::abs(f[axis]) <= P.tangency_tol() * scale;
      else
        ok = ok && f[axis] * sig[h] > 1e-12 * scale;
    }
    if (ok) return sid;
  }

  auto sig = S.stratum(loc).signature;
  const double tiny = 1e-12 * (1.0 + norm2(floc));
  for (int h : S.zero_planes(loc)) {
    const int axis = S.hyperplanes()[h].axis;
    if (std::abs(floc[axis]) > tiny) sig[h] = floc[axis] > 0.0 ? +1 : -1;
  }
  return S.stratum_id_of_signature(sig);
}

// Earliest substep at which the RK4 path leaves the closure of the driving
// stratum, or h if it stays. Bisection on the step size; the violated plane
// index is returned through `plane`.
double first_crossing(const ControlProblem& P, int stratum, int control,
                      const AugState& s, double h, double rel_tol,
                      int* plane) {
  const Stratification& S = P.strat();
  const auto& sig = S.stratum(stratum).signature;
  const auto violation = [&](const Vec& y) {
    for (std::size_t hp = 0; hp < sig.size(); ++hp) {
      if (sig[hp] == 0) continue;
      const auto& pl = S.hyperplanes()[hp];
      if ((y[pl.axis] - pl.offset) * sig[hp] < 0.0) return static_cast<int>(hp);
    }
    return -1;
  };
  const AugState end = rk4_step(P, stratum, control, s, h);
  const int viol = violation(end.x);
  if (viol < 0) {
    *plane = -1;
    return h;
  }
  double lo = 0.0, hi = h;
  int hi_plane = viol;
  for (int it = 0; it < 120 && hi - lo > rel_tol * h; ++it) {
    const double mid = 0.5 * (lo + hi);
    const AugState ms = rk4_step(P, stratum, control, s, mid);
    const int v = violation(ms.x);
    if (v < 0)
      lo = mid;
    else {
      hi = mid;
      hi_plane = v;
    }
  }
  *plane = hi_plane;
  return lo;
}

}  // namespace

Trajectory integrate(const ControlProblem& P, double t0, const Vec& x0,
                     const PiecewiseControl& ctrl, double dt,
                     const IntegrateOptions& opts) {
  if (dt <= 0.0) throw Error("integration dt must be positive");
  if (!all_finite(x0)) throw Error("initial state must be finite");
  const Stratification& S = P.strat();
  const double t_end = ctrl.breakpoints.back();

  Trajectory traj;
  double t = t0;
  AugState s{x0, 0.0};
  int control = ctrl.at(t);
  int drive = driving_stratum(P, s.x, control);
  {
    const int loc = S.locate(s.x);
    if (drive != loc) traj.events.push_back({t, loc, drive});
  }
  traj.times.push_back(t);
  traj.states.push_back(s.x);
  traj.eta.push_back(s.eta);
  traj.controls.push_back(control);
  traj.strata.push_back(drive);

  int crossings = 0;
  while (t < t_end - 1e-15 * std::max(1.0, t_end)) {
    // Control switches happen exactly at breakpoints.
    double next_break = t_end;
    for (double b : ctrl.breakpoints)
      if (b > t + 1e-15) {
        next_break = b;
        break;
      }
    const int new_control = ctrl.at(t + 1e-15);
    if (new_control != control) {
      control = new_control;
      const int nd = driving_stratum(P, s.x, control);
      if (nd != drive) {
        traj.events.push_back({t, drive, nd});
        if (++crossings > opts.max_crossings)
          throw ZenoCapExceededError("crossing cap exceeded");
        drive = nd;
      }
    }
    double h = std::min(dt, next_break - t);
    if (h <= 0.0) {
      t = next_break;
      continue;
    }
    const bool sliding = S.stratum(drive).kind != StratumKind::Cell;

    int plane = -1;
    const double tau =
        first_crossing(P, drive, control, s, h, opts.crossing_rel_tol, &plane);
    AugState next = rk4_step(P, drive, control, s, tau);
    if (sliding) {
      // Remove the O(dt^2) normal leakage: sliding keeps the stratum planes.
      next.x = S.project_to_stratum(drive, next.x);
    }
    if (plane >= 0) {
      // Land exactly on the violated plane and re-dispatch from there.
      const auto& pl = S.hyperplanes()[plane];
      next.x[pl.axis] = pl.offset;
      t += tau;
      s = next;
      const int nd = driving_stratum(P, s.x, control);
      traj.events.push_back({t, drive, nd});
      if (++crossings > opts.max_crossings)
        throw ZenoCapExceededError("crossing cap exceeded (chattering?)");
      drive = nd;
    } else {
      t += tau;
      s = next;
      // Sliding may end when the control stops being tangential (x-dependent
      // pieces); re-dispatch keeps the invariant.
      const int nd = driving_stratum(P, s.x, control);
      if (nd != drive) {
        traj.events.push_back({t, drive, nd});
        if (++crossings > opts.max_crossings)
          throw ZenoCapExceededError("crossing cap exceeded");
        drive = nd;
      }
    }
    traj.times.push_back(t);
    traj.states.push_back(s.x);
    traj.eta.push_back(s.eta);
    traj.controls.push_back(control);
    traj.strata.push_back(drive);
  }
  return traj;
}

Trajectory integrate_backward(const ControlProblem& P, double t, const Vec& x,
                              const PiecewiseControl& ctrl, double dt, double h,
                              const IntegrateOptions& opts) {
  // z(s) = y(t-s) satisfies z' = -f(z, a); costs accumulate unchanged.
  std::vector<VelocityPiece> vel;
  std::vector<CostPiece> cost;
  for (int sid = 0; sid < P.strat().num_strata(); ++sid) {
    VelocityPiece vp = P.velocity_piece(sid);
    for (auto& row : vp.S)
      for (double& v : row) v = -v;
    for (auto& row : vp.A)
      for (double& v : row) v = -v;
    for (double& v : vp.b) v = -v;
    vel.push_back(std::move(vp));
    cost.push_back(P.cost_piece(sid));
  }
  ControlProblem rev(P.strat_ptr(), P.controls(), std::move(vel),
                     std::move(cost), P.terminal(), P.terminal_mode(), P.cf(),
                     P.cl(), P.lambda_l(), P.lambda_phi(), P.horizon(),
                     P.name() + "-reversed");
  PiecewiseControl c = ctrl;
  c.breakpoints.front() = 0.0;
  c.breakpoints.back() = h;
  (void)t;
  return integrate(rev, 0.0, x, c, dt, opts);
}

double control_schedule_cost(const ControlProblem& P, double t0, const Vec& x0,
                             const PiecewiseControl& ctrl, double dt) {
  const Trajectory traj = integrate(P, t0, x0, ctrl, dt);
  return P.eval_phi(traj.final_state()) - traj.final_eta();
}

namespace {

// Distance from a candidate (v, w) pair to the sampled augmented tangential
// dynamics G_Gamma(x) = {(f(x,a), -l(x,a)-r) : a tangential, 0<=r<=b(x,a)}.
double dist_to_tangential_G(const ControlProblem& P, int interface_stratum,
                            const Vec& x, const Vec& v, double w,
                            int* best_control) {
  const Vec xp = P.strat().project_to_stratum(interface_stratum, x);
  double best = std::numeric_limits<double>::infinity();
  if (best_control) *best_control = -1;
  const ConeDescriptor tspace =
      P.strat().tangent_cone(interface_stratum, xp);
  for (int a = 0; a < P.controls().size(); ++a) {
    const Vec f = P.eval_f(interface_stratum, xp, a);
    if (tspace.distance(f) > P.tangency_tol() * (1.0 + norm2(f))) continue;
    const double l = P.eval_l(interface_stratum, xp, a);
    const double b = P.eval_b(interface_stratum, xp, a);
    // Optimal slack r* in [0,b] for the augmented coordinate.
    const double r = std::clamp(-w - l, 0.0, b);
    const double dw = w - (-l - r);
    const double d = std::sqrt(dist2(f, v) * dist2(f, v) + dw * dw);
    if (d < best) {
      best = d;
      if (best_control) *best_control = a;
    }
  }
  if (!std::isfinite(best))
    throw EmptyTangentialSetError("no tangential controls on interface");
  return best;
}

}  // namespace

FilippovResult filippov_project(const ControlProblem& P, int interface_stratum,
                                const Trajectory& reference,
                                double lipschitz_hint) {
  if (reference.times.size() < 2)
    throw Error("reference segment needs at least two samples");
  const Stratification& S = P.strat();
  if (S.stratum(interface_stratum).kind == StratumKind::Cell)
    throw NotOnInterfaceError("filippov_project needs an interface stratum");

  FilippovResult res;
  res.lipschitz = lipschitz_hint;
  if (res.lipschitz < 0.0) {
    // Difference-quotient estimate of the Lipschitz constant of G_Gamma along
    // the interface, inflated 10% as a safety margin.
    double maxq = 0.0;
    for (int k = 0; k + 1 < 16; ++k) {
      const Vec x1 = P.sample_point_on_stratum(interface_stratum, 2.0, 100 + k);
      const Vec x2 = P.sample_point_on_stratum(interface_stratum, 2.0, 200 + k);
      const double dxx = dist2(x1, x2);
      if (dxx < 1e-9) continue;
      for (int a = 0; a < P.controls().size(); ++a) {
        const Vec f1 = P.eval_f(interface_stratum, x1, a);
        const Vec f2 = P.eval_f(interface_stratum, x2, a);
        const double dl = std::abs(P.eval_l(interface_stratum, x1, a) -
                                   P.eval_l(interface_stratum, x2, a));
        maxq = std::max(maxq, (dist2(f1, f2) + dl) / dxx);
      }
    }
    res.lipschitz = 1.1 * maxq;
  }

  Trajectory z;
  Vec zx = S.project_to_stratum(interface_stratum, reference.states.front());
  double zeta = reference.eta.front();
  z.times.push_back(reference.times.front());
  z.states.push_back(zx);
  z.eta.push_back(zeta);
  z.strata.push_back(interface_stratum);
  z.controls.push_back(-1);

  double dist_integral = 0.0;
  for (std::size_t i = 0; i + 1 < reference.times.size(); ++i) {
    const double h = reference.times[i + 1] - reference.times[i];
    if (h <= 0.0) continue;
    Vec ydot = scaled(sub(reference.states[i + 1], reference.states[i]), 1.0 / h);
    const double edot = (reference.eta[i + 1] - reference.eta[i]) / h;
    dist_integral += h * dist_to_tangential_G(P, interface_stratum,
                                              reference.states[i], ydot, edot,
                                              nullptr);
    // Greedy tracking control: nearest tangential (velocity, cost) pair at z.
    int best = -1;
    dist_to_tangential_G(P, interface_stratum, zx, ydot, edot, &best);
    const Vec f = P.eval_f(interface_stratum, zx, best);
    const double l = P.eval_l(interface_stratum, zx, best);
    zx = axpy(h, f, zx);
    zx = S.project_to_stratum(interface_stratum, zx);
    zeta += -l * h;
    z.times.push_back(reference.times[i + 1]);
    z.states.push_back(zx);
    z.eta.push_back(zeta);
    z.strata.push_back(interface_stratum);
    z.controls.push_back(best);
  }

  const double dx = dist2(zx, reference.states.back());
  const double de = zeta - reference.eta.back();
  res.measured_gap = std::sqrt(dx * dx + de * de);
  res.dist_integral = dist_integral;
  const double span = reference.times.back() - reference.times.front();
  res.certified_bound = std::exp(res.lipschitz * span) * dist_integral;
  res.tracked = std::move(z);
  return res;
}

std::vector<Vec> reachable_samples(const ControlProblem& P, const Vec& x,
                                   double t, int n_controls, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, P.controls().size() - 1);
  std::uniform_int_distribution<int> npieces(1, 3);
  std::vector<Vec> out;
  for (int k = 0; k < n_controls; ++k) {
    std::vector<int> schedule(npieces(rng));
    for (int& c : schedule) c = pick(rng);
    const auto pc = PiecewiseControl::equispaced(schedule, 0.0, t);
    out.push_back(integrate(P, 0.0, x, pc, t / 16.0).final_state());
  }
  return out;
}

std::vector<Vec> reachable_tangential_samples(const ControlProblem& P,
                                              int interface_stratum,
                                              const Vec& x, double t,
                                              int n_controls, uint64_t seed) {
  const std::vector<int> tang = P.tangential_controls(x);
  if (tang.empty())
    throw EmptyTangentialSetError("no tangential controls at sample point");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(tang.size()) - 1);
  std::uniform_int_distribution<int> npieces(1, 3);
  std::vector<Vec> out;
  for (int k = 0; k < n_controls; ++k) {
    std::vector<int> schedule(npieces(rng));
    for (int& c : schedule) c = tang[pick(rng)];
    const auto pc = PiecewiseControl::equispaced(schedule, 0.0, t);
    out.push_back(integrate(P, 0.0, x, pc, t / 16.0).final_state());
  }
  (void)interface_stratum;
  return out;
}

OracleResult oracle_value(const ControlProblem& P, double t0, const Vec& x0,
                          int depth, int n_time_slices) {
  if (depth < 1) throw Error("oracle depth must be >= 1");
  const long long n = P.controls().size();
  long long paths = 1;
  for (int i = 0; i < depth; ++i) {
    paths *= n;
    if (paths * depth * std::max(n_time_slices, 1) * 4 > 10'000'000LL)
      throw BudgetExceededError("oracle enumeration too large");
  }
  const double span = P.horizon() - t0;
  if (span <= 0.0) throw Error("t0 must be before the horizon");
  const double dt = span / (depth * std::max(n_time_slices, 1));

  std::vector<double> values(static_cast<std::size_t>(paths));
  parallel_for(static_cast<std::size_t>(paths), default_exec(), [&](std::size_t p) {
    std::vector<int> schedule(depth);
    std::size_t rem = p;
    for (int i = 0; i < depth; ++i) {
      schedule[i] = static_cast<int>(rem % n);
      rem /= n;
    }
    const auto pc = PiecewiseControl::equispaced(schedule, t0, P.horizon());
    values[p] = control_schedule_cost(P, t0, x0, pc, dt);
  });

  OracleResult res;
  res.value = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t p = 0; p < values.size(); ++p)
    if (values[p] < res.value) {
      res.value = values[p];
      best = p;
    }
  std::vector<int> schedule(depth);
  std::size_t rem = best;
  for (int i = 0; i < depth; ++i) {
    schedule[i] = static_cast<int>(rem % n);
    rem /= n;
  }
  res.best = PiecewiseControl::equispaced(schedule, t0, P.horizon());
  return res;
}

namespace {

std::vector<PiecewiseControl> dpp_candidates(const ControlProblem& P,
                                             double t0, double t1,
                                             const DppOptions& opts) {
  std::vector<PiecewiseControl> cands;
  for (int a = 0; a < P.controls().size(); ++a)
    cands.push_back(PiecewiseControl::constant(a, t0, t1));
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> pick(0, P.controls().size() - 1);
  for (int k = 0; k < opts.random_schedules; ++k)
    cands.push_back(
        PiecewiseControl::equispaced({pick(rng), pick(rng)}, t0, t1));
  return cands;
}

}  // namespace

bool check_superoptimality(const ControlProblem& P, const ValueQuery& v,
                           double t, const Vec& x, double h, double tol,
                           const DppOptions& opts) {
  const double dt = opts.dt > 0.0 ? opts.dt : h / 16.0;
  const double vx = v(t, x);
  for (const auto& pc : dpp_candidates(P, t, t + h, opts)) {
    const Trajectory y = integrate(P, t, x, pc, dt);
    if (vx >= v(t + h, y.final_state()) + y.running_cost() - tol) return true;
  }
  return false;
}

bool check_suboptimality(const ControlProblem& P, const ValueQuery& v,
                         double t, const Vec& x, double h, double tol,
                         const DppOptions& opts) {
  const double dt = opts.dt > 0.0 ? opts.dt : h / 16.0;
  const double vx = v(t, x);
  for (const auto& pc : dpp_candidates(P, t, t + h, opts)) {
    const Trajectory y = integrate(P, t, x, pc, dt);
    if (vx > v(t + h, y.final_state()) + y.running_cost() + tol) return false;
  }
  return true;
}

bool check_backward_suboptimality(const ControlProblem& P, const ValueQuery& v,
                                  double t, const Vec& x, double h, double tol,
                                  const DppOptions& opts) {
  const double dt = opts.dt > 0.0 ? opts.dt : h / 16.0;
  const double vx = v(t, x);
  for (const auto& pc : dpp_candidates(P, 0.0, h, opts)) {
    const Trajectory z = integrate_backward(P, t, x, pc, dt, h);
    // v(t,x) >= v(t-h, y(t-h)) - int_{t-h}^t l
    if (vx < v(t - h, z.final_state()) - z.running_cost() - tol) return false;
  }
  return true;
}

double limit_property_gap(const ControlProblem& P, const ValueQuery& v,
                          double t, const Vec& x, double h,
                          const DppOptions& opts) {
  const double dt = opts.dt > 0.0 ? opts.dt : h / 16.0;
  const double vx = v(t, x);
  double gap = 0.0;
  for (const auto& pc : dpp_candidates(P, 0.0, h, opts)) {
    const Trajectory z = integrate_backward(P, t, x, pc, dt, h);
    gap = std::max(gap, std::abs(v(t - h, z.final_state()) - vx));
  }
  return gap;
}

std::string trajectory_csv(const Trajectory& traj, int dim) {
  std::ostringstream os;
  os.precision(17);
  os << "time";
  for (int a = 0; a < dim; ++a) os << ",x" << (a + 1);
  os << ",stratumId,controlIndex,eta\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << traj.times[i];
    for (int a = 0; a < dim; ++a) os << "," << traj.states[i][a];
    os << "," << traj.strata[i] << "," << traj.controls[i] << "," << traj.eta[i]
       << "\n";
  }
  for (const auto& e : traj.events)
    os << "# event," << e.time << "," << e.from_stratum << "," << e.to_stratum
       << "\n";
  return os.str();
}

}  // namespace stratahjb
