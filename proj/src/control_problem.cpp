#include "stratahjb/control_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "stratahjb/errors.hpp"

namespace stratahjb {

namespace {
constexpr double kPi = 3.14159265358979323846;

double snap_tiny(double v) { return std::abs(v) < 1e-14 ? 0.0 : v; }
}  // namespace

ControlSet ControlSet::ball(double radius, int count, int dim) {
  if (dim == 1) return interval(-radius, radius, count);
  if (dim != 2) throw Error("ball control set supported for dim 1 and 2");
  ControlSet cs;
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * kPi * k / count;
    cs.samples.push_back(
        {snap_tiny(radius * std::cos(theta)), snap_tiny(radius * std::sin(theta))});
  }
  cs.samples.push_back(Vec(dim, 0.0));
  cs.descriptor = "ball(" + std::to_string(radius) + "," + std::to_string(count) + ")";
  return cs;
}

ControlSet ControlSet::interval(double lo, double hi, int count) {
  if (count < 1) throw Error("interval control set needs count >= 1");
  ControlSet cs;
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
    cs.samples.push_back({snap_tiny(lo + t * (hi - lo))});
  }
  cs.descriptor = "interval(" + std::to_string(lo) + "," + std::to_string(hi) +
                  "," + std::to_string(count) + ")";
  return cs;
}

ControlSet ControlSet::finite(std::vector<Vec> samples) {
  if (samples.empty()) throw Error("finite control set must be nonempty");
  ControlSet cs;
  cs.samples = std::move(samples);
  cs.descriptor = "finite{" + std::to_string(cs.samples.size()) + "}";
  return cs;
}

Vec VelocityPiece::eval(const Vec& x, const Vec& a) const {
  const int d = static_cast<int>(b.size());
  Vec f(b);
  for (int i = 0; i < d; ++i) {
    if (!S.empty()) f[i] += dot(S[i], a);
    if (!A.empty()) f[i] += dot(A[i], x);
  }
  return f;
}

VelocityPiece VelocityPiece::constant(const Vec& v, int /*control_dim*/) {
  VelocityPiece p;
  p.b = v;
  return p;
}

VelocityPiece VelocityPiece::scaled_ball(double scale, int dim) {
  VelocityPiece p;
  p.b.assign(dim, 0.0);
  p.S.assign(dim, Vec(dim, 0.0));
  for (int i = 0; i < dim; ++i) p.S[i][i] = scale;
  return p;
}

double CostPiece::eval(const Vec& x, const Vec&) const {
  const double r = norm2(x);
  double s = 0.0, p = 1.0;
  for (double c : coeffs) {
    s += c * p;
    p *= r;
  }
  return s;
}

double TerminalCost::eval(const Vec& x) const {
  const double x1 = x[0];
  double v = 0.0;
  switch (kind) {
    case TerminalKind::AbsX1:
      v = std::abs(x1);
      break;
    case TerminalKind::LinearX1:
      v = x1;
      break;
    case TerminalKind::IndicatorPositiveX1:
      v = x1 > 0.0 ? 1.0 : 0.0;
      break;
    case TerminalKind::Table: {
      if (xs.empty()) throw Error("empty terminal table");
      if (x1 <= xs.front()) {
        v = vals.front();
      } else if (x1 >= xs.back()) {
        v = vals.back();
      } else {
        const auto it = std::upper_bound(xs.begin(), xs.end(), x1);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x1 - xs[i - 1]) / (xs[i] - xs[i - 1]);
        v = (1.0 - t) * vals[i - 1] + t * vals[i];
      }
      break;
    }
  }
  return v + offset;
}

std::vector<int> ControlFeasibility::essential_union() const {
  std::vector<int> u;
  for (const auto& [k, idxs] : essential)
    for (int i : idxs) u.push_back(i);
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

ControlProblem::ControlProblem(std::shared_ptr<const Stratification> strat,
                               ControlSet controls,
                               std::vector<VelocityPiece> velocity,
                               std::vector<CostPiece> cost,
                               TerminalCost terminal,
                               RegularityMode terminal_mode, double cf,
                               double cl, double lambda_l, double lambda_phi,
                               double horizon, std::string name)
    : strat_(std::move(strat)), controls_(std::move(controls)),
      velocity_(std::move(velocity)), cost_(std::move(cost)),
      terminal_(std::move(terminal)), terminal_mode_(terminal_mode), cf_(cf),
      cl_(cl), lambda_l_(lambda_l), lambda_phi_(lambda_phi), T_(horizon),
      name_(std::move(name)) {
  if (cf_ <= 0.0 || cl_ <= 0.0) throw Error("growth constants must be positive");
  if (lambda_l_ < 1.0 || lambda_phi_ < 1.0) throw Error("lambda must be >= 1");
  if (T_ <= 0.0) throw Error("horizon must be positive");
  if (controls_.samples.empty()) throw Error("control set must be nonempty");
}

const VelocityPiece& ControlProblem::velocity_piece(int stratum_id) const {
  if (stratum_id < 0 || stratum_id >= static_cast<int>(velocity_.size()))
    throw StratumPieceMissingError("no velocity piece for stratum " +
                                   std::to_string(stratum_id));
  return velocity_[stratum_id];
}

const CostPiece& ControlProblem::cost_piece(int stratum_id) const {
  if (stratum_id < 0 || stratum_id >= static_cast<int>(cost_.size()))
    throw StratumPieceMissingError("no cost piece for stratum " +
                                   std::to_string(stratum_id));
  return cost_[stratum_id];
}

Vec ControlProblem::eval_f(int stratum_id, const Vec& x, int control) const {
  Vec f = velocity_piece(stratum_id).eval(x, controls_.samples.at(control));
  const double bound = cf_ * (1.0 + norm2(x));
  if (norm2(f) > bound * 1.01)
    throw GrowthViolationError("velocity exceeds c_f(1+|x|) by more than 1%");
  return f;
}

double ControlProblem::eval_l(int stratum_id, const Vec& x, int control) const {
  const double l = cost_piece(stratum_id).eval(x, controls_.samples.at(control));
  const double bound = cost_bound(x);
  if (l < -1e-9 || l > bound * 1.01 + 1e-12)
    throw GrowthViolationError("running cost violates 0 <= l <= c_l(1+|x|^L)");
  return std::max(l, 0.0);
}

double ControlProblem::eval_b(int stratum_id, const Vec& x, int control) const {
  const double b = cost_bound(x) - eval_l(stratum_id, x, control);
  return std::max(b, 0.0);
}

double ControlProblem::cost_bound(const Vec& x) const {
  return cl_ * (1.0 + std::pow(norm2(x), lambda_l_));
}

std::vector<int> ControlProblem::tangential_controls(const Vec& x) const {
  const int own = strat_->locate(x);
  std::vector<int> out;
  if (strat_->stratum(own).kind == StratumKind::Cell) {
    out.resize(controls_.size());
    for (int i = 0; i < controls_.size(); ++i) out[i] = i;
    return out;
  }
  const ConeDescriptor cone = strat_->tangent_cone(own, x);
  for (int i = 0; i < controls_.size(); ++i) {
    const Vec f = eval_f(own, x, i);
    if (cone.distance(f) <= tangency_tol_ * (1.0 + norm2(f))) out.push_back(i);
  }
  return out;
}

ControlFeasibility ControlProblem::essential_controls(const Vec& x) const {
  ControlFeasibility fe;
  fe.x = x;
  fe.own_stratum = strat_->locate(x);
  fe.tolerance = tangency_tol_;
  for (int sid : strat_->incident_strata(x)) {
    const ConeDescriptor cone = strat_->tangent_cone(sid, x, sid);
    std::vector<int> admitted;
    for (int i = 0; i < controls_.size(); ++i) {
      const Vec f = eval_f(sid, x, i);
      if (cone.distance(f) <= tangency_tol_ * (1.0 + norm2(f)))
        admitted.push_back(i);
    }
    if (!admitted.empty()) fe.essential[sid] = std::move(admitted);
  }
  const auto own_it = fe.essential.find(fe.own_stratum);
  if (own_it != fe.essential.end()) fe.tangential = own_it->second;
  return fe;
}

std::vector<AugmentedVelocity> ControlProblem::augmented_essential(
    const Vec& x) const {
  const ControlFeasibility fe = essential_controls(x);
  std::vector<AugmentedVelocity> out;
  for (const auto& [sid, idxs] : fe.essential) {
    for (int i : idxs) {
      AugmentedVelocity g;
      g.v = eval_f(sid, x, i);
      const double l = eval_l(sid, x, i);
      const double b = eval_b(sid, x, i);
      g.w = -l;
      g.r = 0.0;
      g.control = i;
      g.stratum = sid;
      out.push_back(g);
      // Extreme slack representative, kept for convexity sampling of (HG).
      AugmentedVelocity ge = g;
      ge.r = b;
      ge.w = -l - b;
      out.push_back(ge);
    }
  }
  return out;
}

TangentializeResult ControlProblem::tangentialize_control(const Vec& x,
                                                          int control) const {
  const int own = strat_->locate(x);
  const Stratum& s = strat_->stratum(own);
  if (s.kind != StratumKind::Interface)
    throw NotOnInterfaceError("tangentialize_control requires a dim d-1 point");
  const int plane = strat_->zero_planes(own)[0];
  const int axis = strat_->hyperplanes()[plane].axis;

  TangentializeResult res;
  const Vec fa = eval_f(own, x, control);
  const double la = eval_l(own, x, control);
  const double na = fa[axis];
  if (std::abs(na) <= tangency_tol_ * (1.0 + norm2(fa))) {
    res.feasible = true;
    res.velocity = fa;
    res.cost_rate = -la;
    return res;
  }

  // Most transversal opposite-sign sample gives the best conditioned mix.
  int best = -1;
  double best_nb = 0.0;
  for (int i = 0; i < controls_.size(); ++i) {
    const double nb = eval_f(own, x, i)[axis];
    if (na * nb < 0.0 && std::abs(nb) > std::abs(best_nb)) {
      best = i;
      best_nb = nb;
    }
  }
  if (best < 0) return res;  // Infeasible: no opposite-sign sample.

  const Vec fb = eval_f(own, x, best);
  const double lb = eval_l(own, x, best);
  const double wa = std::abs(best_nb) / (std::abs(na) + std::abs(best_nb));
  const double wb = std::abs(na) / (std::abs(na) + std::abs(best_nb));
  res.feasible = true;
  res.velocity = add(scaled(fa, wa), scaled(fb, wb));
  res.velocity[axis] = (std::abs(best_nb) * na + std::abs(na) * best_nb) /
                       (std::abs(na) + std::abs(best_nb));  // exact zero
  res.cost_rate = -(wa * la + wb * lb);
  res.weight_a = wa;
  res.weight_b = wb;
  res.partner = best;
  return res;
}

Vec ControlProblem::sample_point_on_stratum(int stratum_id, double half_width,
                                            uint64_t seed) const {
  std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (stratum_id + 1)));
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  const Stratum& s = strat_->stratum(stratum_id);
  const auto& planes = strat_->hyperplanes();

  // Per axis, the signature pins a 1-d region; draw a point inside it.
  Vec x(dim(), 0.0);
  for (int a = 0; a < dim(); ++a) {
    std::vector<std::pair<double, int8_t>> sides;  // (offset, signature entry)
    bool on_plane = false;
    double on_offset = 0.0;
    for (std::size_t h = 0; h < planes.size(); ++h) {
      if (planes[h].axis != a) continue;
      if (s.signature[h] == 0) {
        on_plane = true;
        on_offset = planes[h].offset;
      } else {
        sides.emplace_back(planes[h].offset, s.signature[h]);
      }
    }
    if (on_plane) {
      x[a] = on_offset;
      continue;
    }
    double lo = -half_width, hi = half_width;
    for (const auto& [off, sg] : sides) {
      if (sg > 0)
        lo = std::max(lo, off);
      else
        hi = std::min(hi, off);
    }
    if (hi <= lo) hi = lo + 1.0;  // region sticks out of the sampling box
    x[a] = lo + u01(rng) * (hi - lo);
  }
  if (strat_->locate(x) != stratum_id)
    throw Error("failed to sample interior point of stratum");
  return x;
}

namespace {

// Largest r with B(0,r) inside the convex hull of the points, estimated via
// support functions over sampled directions. Negative support means the
// origin is outside; radius is clamped at 0.
// Largest r with B(0,r) contained in the convex hull of the points,
// restricted to the given coordinate axes. Exact for one and two axes (the
// grids only support d <= 2): in the plane the minimum of the support
// function is attained at a hull edge normal.
double inscribed_radius(const std::vector<Vec>& pts, int /*dim*/,
                        const std::vector<int>& free_axes,
                        uint64_t /*seed*/) {
  if (pts.empty() || free_axes.empty()) return 0.0;
  if (free_axes.size() == 1) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec& p : pts) {
      lo = std::min(lo, p[free_axes[0]]);
      hi = std::max(hi, p[free_axes[0]]);
    }
    return std::max(std::min(hi, -lo), 0.0);
  }

  struct P2 {
    double x, y;
  };
  std::vector<P2> q;
  for (const Vec& p : pts) q.push_back({p[free_axes[0]], p[free_axes[1]]});
  std::sort(q.begin(), q.end(), [](const P2& a, const P2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  q.erase(std::unique(q.begin(), q.end(),
                      [](const P2& a, const P2& b) {
                        return a.x == b.x && a.y == b.y;
                      }),
          q.end());
  if (q.size() < 3) return 0.0;
  const auto cross = [](const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  // Monotone chain, counter-clockwise hull.
  std::vector<P2> hull(2 * q.size());
  std::size_t k = 0;
  for (const P2& p : q) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = q.rbegin() + 1; it != q.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return 0.0;
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const P2& a = hull[i];
    const P2& b = hull[(i + 1) % hull.size()];
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len = std::sqrt(ex * ex + ey * ey);
    if (len < 1e-300) continue;
    // Signed distance of the origin to the edge line (inside is positive).
    r = std::min(r, (ex * (-a.y) - ey * (-a.x)) / len);
  }
  return std::max(r, 0.0);
}

}  // namespace

ControllabilityReport ControlProblem::check_controllability(
    const std::string& mode, int sample_count, uint64_t seed) const {
  ControllabilityReport report;
  report.mode = mode;
  report.holds = true;
  std::vector<int> all_axes(dim());
  for (int a = 0; a < dim(); ++a) all_axes[a] = a;

  for (const Stratum& s : strat_->strata()) {
    if (s.kind == StratumKind::Cell) continue;
    InterfaceControllability ic;
    ic.stratum = s.id;
    double min_ball = std::numeric_limits<double>::infinity();
    double min_tan_ball = std::numeric_limits<double>::infinity();
    bool tangential_all_empty = true;
    bool tangential_any_empty = false;
    std::vector<int> tan_axes;
    for (int k = 0; k < sample_count; ++k) {
      const Vec x = sample_point_on_stratum(s.id, 2.0, seed + k);
      std::vector<Vec> vels;
      for (int i = 0; i < controls_.size(); ++i) vels.push_back(eval_f(s.id, x, i));
      min_ball = std::min(min_ball, inscribed_radius(vels, dim(), all_axes, seed));
      const ConeDescriptor cone = strat_->tangent_cone(s.id, x);
      tan_axes.clear();
      for (int a = 0; a < dim(); ++a)
        if (cone.axes[a] == ConeAxis::Free) tan_axes.push_back(a);
      std::vector<Vec> tan_vels;
      for (const Vec& v : vels)
        if (cone.distance(v) <= tangency_tol_ * (1.0 + norm2(v)))
          tan_vels.push_back(v);
      if (tan_vels.empty()) {
        tangential_any_empty = true;
      } else {
        tangential_all_empty = false;
        // A 0-dimensional tangent space with a tangential control is
        // vacuously controllable along the stratum.
        if (!tan_axes.empty())
          min_tan_ball = std::min(
              min_tan_ball, inscribed_radius(tan_vels, dim(), tan_axes, seed));
      }
    }
    ic.ball_radius = std::isfinite(min_ball) ? min_ball : 0.0;
    ic.tangential_ball_radius =
        tangential_any_empty ? 0.0
        : std::isfinite(min_tan_ball)
            ? min_tan_ball
            : std::numeric_limits<double>::infinity();

    const double tol = 1e-9;
    if (mode == "H2") {
      ic.verdict = ic.ball_radius > tol ? ControllabilityVerdict::Holds
                                        : ControllabilityVerdict::Violated;
    } else {  // H3: per stratum, either uniformly empty tangential or a ball.
      if (tangential_all_empty)
        ic.verdict = ControllabilityVerdict::EmptyTangential;
      else if (!tangential_any_empty && ic.ball_radius > tol)
        ic.verdict = ControllabilityVerdict::Holds;
      else
        ic.verdict = ControllabilityVerdict::Violated;
    }
    if (ic.verdict == ControllabilityVerdict::Violated) report.holds = false;
    report.interfaces.push_back(ic);
  }
  return report;
}

ControlProblem ControlProblem::perturbed(const Vec& g, double eps_f,
                                         double eps_l, double eps_phi) const {
  std::vector<VelocityPiece> vel = velocity_;
  for (auto& p : vel)
    for (int i = 0; i < dim(); ++i) p.b[i] += eps_f * g[i];
  std::vector<CostPiece> cost = cost_;
  for (auto& c : cost) {
    if (c.coeffs.empty()) c.coeffs.push_back(0.0);
    c.coeffs[0] += eps_l;
  }
  TerminalCost phi = terminal_;
  phi.offset += eps_phi;
  return ControlProblem(strat_, controls_, std::move(vel), std::move(cost),
                        std::move(phi), terminal_mode_,
                        cf_ + std::abs(eps_f) * norm2(g), cl_ + std::abs(eps_l),
                        lambda_l_, lambda_phi_, T_, name_ + "+eps");
}

}  // namespace stratahjb
