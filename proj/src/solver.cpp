#include "stratahjb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stratahjb/errors.hpp"

namespace stratahjb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int ValueGrid::num_slots_of(int node) const {
  if (mode_ == SolveMode::Continuous) return 1;
  return node_slot_begin_[node + 1] - node_slot_begin_[node];
}

int ValueGrid::slot_index(int node, int stratum) const {
  if (mode_ == SolveMode::Continuous) return node;
  for (int s = node_slot_begin_[node]; s < node_slot_begin_[node + 1]; ++s)
    if (slot_stratum_[s] == stratum) return s;
  return -1;
}

double ValueGrid::node_value(int step, int node) const {
  if (mode_ == SolveMode::Continuous) return values_[step][node];
  double v = kInf;
  for (int s = node_slot_begin_[node]; s < node_slot_begin_[node + 1]; ++s)
    v = std::min(v, values_[step][s]);
  return v;
}

namespace {

double bilinear(const std::vector<double>& vals, const int c[4], double fx,
                double fy) {
  return (1.0 - fy) * ((1.0 - fx) * vals[c[0]] + fx * vals[c[1]]) +
         fy * ((1.0 - fx) * vals[c[2]] + fx * vals[c[3]]);
}

}  // namespace

double ValueGrid::query(double t, const Vec& x) const {
  const StratifiedGrid& G = *grid_;
  const double T = G.horizon();
  if (t < -1e-9 || t > T + 1e-9)
    throw GridOutOfRangeError("query time outside [0,T]");
  for (int a = 0; a < G.dim(); ++a)
    if (x[a] < G.box_lo() - 1e-9 || x[a] > G.box_hi() + 1e-9)
      throw GridOutOfRangeError("query point outside the box");

  const double tau = std::clamp(t, 0.0, T) / G.dt();
  const int n0 = std::clamp(static_cast<int>(std::floor(tau)), 0,
                            G.time_steps() - 1);
  const double th = tau - n0;

  const auto st = G.stencil_for(x);
  int corners[4];
  G.corner_nodes(st, corners);

  const auto spatial = [&](int step) {
    if (mode_ == SolveMode::Continuous)
      return bilinear(values_[step], corners, st.frac[0], st.frac[1]);
    // Envelope over the strata incident to the point's stratum.
    const int mx = G.locate_foot(x);
    double best = kInf;
    for (int sid : strat_->incident_strata_of(mx)) {
      int cs[4];
      bool usable = true;
      for (int k = 0; k < 4; ++k) {
        cs[k] = slot_index(corners[k], sid);
        if (cs[k] < 0) {
          // Zero-weight corners may legitimately miss the layer.
          const double w =
              (k % 2 == 0 ? 1.0 - st.frac[0] : st.frac[0]) *
              (k < 2 ? 1.0 - st.frac[1] : st.frac[1]);
          if (w > 0.0)
            usable = false;
          else
            cs[k] = slot_index(corners[0], sid) >= 0 ? slot_index(corners[0], sid)
                                                     : 0;
        }
      }
      if (!usable) continue;
      best = std::min(best, bilinear(values_[step], cs, st.frac[0], st.frac[1]));
    }
    return best;
  };

  const double v0 = spatial(n0);
  const double v1 = spatial(n0 + 1);
  return (1.0 - th) * v0 + th * v1;
}

double ValueGrid::max_error_vs(
    const std::function<double(double, const Vec&)>& reference, double band,
    const std::function<double(double, const Vec&)>& kink_distance) const {
  const StratifiedGrid& G = *grid_;
  double err = 0.0;
  for (int n = 0; n <= G.time_steps(); ++n) {
    const double t = n * G.dt();
    for (int i = 0; i < G.num_nodes(); ++i) {
      const Vec x = G.node_coords(i);
      if (band >= 0.0 && kink_distance(t, x) <= band) continue;
      err = std::max(err, std::abs(node_value(n, i) - reference(t, x)));
    }
  }
  return err;
}

Solver::Solver(const ControlProblem& problem,
               std::shared_ptr<const StratifiedGrid> grid, Exec exec)
    : P_(problem), G_(std::move(grid)), exec_(exec) {}

void Solver::build_value_layout(ValueGrid& V, SolveMode mode) const {
  V.mode_ = mode;
  V.grid_ = G_;
  V.strat_ = P_.strat_ptr();
  const int nn = G_->num_nodes();
  if (mode == SolveMode::Continuous) {
    V.num_values_ = nn;
    return;
  }
  V.node_slot_begin_.assign(nn + 1, 0);
  for (int i = 0; i < nn; ++i) {
    const auto inc = P_.strat().incident_strata_of(G_->node_stratum(i));
    V.node_slot_begin_[i + 1] = V.node_slot_begin_[i] + static_cast<int>(inc.size());
    for (int sid : inc) {
      V.slot_node_.push_back(i);
      V.slot_stratum_.push_back(sid);
    }
  }
  V.num_values_ = static_cast<int>(V.slot_node_.size());
}

void Solver::fill_terminal(ValueGrid& V, SolveMode mode) const {
  auto& layer = V.values_.back();
  if (mode == SolveMode::Continuous) {
    for (int i = 0; i < G_->num_nodes(); ++i)
      layer[i] = P_.eval_phi(G_->node_coords(i));
    return;
  }
  const auto& planes = P_.strat().hyperplanes();
  for (int s = 0; s < V.num_values(); ++s) {
    const int node = V.slot_node_[s];
    const int sid = V.slot_stratum_[s];
    const Vec x = G_->node_coords(node);
    if (P_.terminal_mode() == RegularityMode::Lipschitz ||
        sid == G_->node_stratum(node)) {
      layer[s] = P_.eval_phi(x);
      continue;
    }
    // One-sided limit of the lsc terminal cost: nudge into the slot stratum.
    Vec xn = x;
    const auto& sig = P_.strat().stratum(sid).signature;
    const double eps = 1e-7 * (1.0 + norm2(x));
    for (int h : P_.strat().zero_planes(G_->node_stratum(node)))
      if (sig[h] != 0) xn[planes[h].axis] += eps * sig[h];
    layer[s] = P_.eval_phi(xn);
  }
}

ValueGrid Solver::run(SolveMode mode) {
  ValueGrid V;
  build_value_layout(V, mode);
  const int N = G_->time_steps();
  V.values_.assign(N + 1, std::vector<double>(V.num_values(), 0.0));
  fill_terminal(V, mode);

  if (mode == SolveMode::Continuous &&
      P_.terminal_mode() != RegularityMode::Lipschitz)
    throw Error("solve_continuous requires a Lipschitz terminal cost");
  if (mode == SolveMode::Continuous) {
    try {
      const auto rep = P_.check_controllability("H2", 4);
      if (!rep.holds)
        V.warnings.push_back("H2 interface controllability violated");
    } catch (const Error& e) {
      V.warnings.push_back(std::string("H2 check failed: ") + e.what());
    }
  }
  if (G_->hyperplane_outside_box())
    V.warnings.push_back("hyperplane outside the computational box");

  const double dt = G_->dt();
  const Stratification& S = P_.strat();

  // Precomputed per-value update plans: the dynamics are autonomous, so the
  // admissible (velocity, cost) pairs and their interpolation stencils are
  // the same at every time step.
  std::vector<PlanEntry> entries;
  std::vector<int> entry_begin(V.num_values() + 1, 0);
  std::vector<int> siblings;           // slots to min against at t_n (LSC)
  std::vector<int> sibling_begin(V.num_values() + 1, 0);
  long long clamped = 0;

  const auto push_entry = [&](const Vec& foot, double stage_cost,
                              SolveMode m) {
    PlanEntry e;
    e.stage_cost = stage_cost;
    const auto st = G_->stencil_for(foot);
    if (st.clamped) ++clamped;
    int corners[4];
    G_->corner_nodes(st, corners);
    e.fx = st.frac[0];
    e.fy = st.frac[1];
    if (m == SolveMode::Continuous) {
      for (int k = 0; k < 4; ++k) e.c[k] = corners[k];
    } else {
      Vec fc(foot);
      for (int a = 0; a < G_->dim(); ++a)
        fc[a] = std::clamp(fc[a], G_->box_lo(), G_->box_hi());
      const int mz = G_->locate_foot(fc);
      int fallback = -1;
      for (int k = 0; k < 4; ++k) {
        const int cs = V.slot_index(corners[k], mz);
        if (cs >= 0 && fallback < 0) fallback = cs;
      }
      for (int k = 0; k < 4; ++k) {
        int cs = V.slot_index(corners[k], mz);
        if (cs < 0) {
          const double w = (k % 2 == 0 ? 1.0 - e.fx : e.fx) *
                           (k < 2 ? 1.0 - e.fy : e.fy);
          if (std::abs(w) > 1e-15)
            throw Error("internal: stencil corner misses the foot layer");
          cs = fallback;
        }
        e.c[k] = cs;
      }
    }
    entries.push_back(e);
  };

  for (int vi = 0; vi < V.num_values(); ++vi) {
    const int node = mode == SolveMode::Continuous ? vi : V.slot_node(vi);
    const int node_sid = G_->node_stratum(node);
    const Vec x = G_->node_coords(node);

    if (mode == SolveMode::Continuous) {
      if (S.stratum(node_sid).kind == StratumKind::Cell) {
        for (int a = 0; a < P_.controls().size(); ++a) {
          const Vec f = P_.eval_f(node_sid, x, a);
          push_entry(axpy(dt, f, x), dt * P_.eval_l(node_sid, x, a), mode);
        }
      } else {
        // Essential admissible set: every incident piece restricted to the
        // tangent cone of its closure.
        for (int sid : S.incident_strata_of(node_sid)) {
          const ConeDescriptor cone = S.tangent_cone(sid, x, sid);
          for (int a = 0; a < P_.controls().size(); ++a) {
            const Vec f = P_.eval_f(sid, x, a);
            if (cone.distance(f) > P_.tangency_tol() * (1.0 + norm2(f)))
              continue;
            push_entry(axpy(dt, f, x), dt * P_.eval_l(sid, x, a), mode);
          }
        }
        if (entries.size() == static_cast<std::size_t>(entry_begin[vi]))
          throw EmptyEssentialSetError(
              "no essential controls at an interface node");
      }
    } else {
      const int sid = V.slot_stratum(vi);
      if (S.stratum(sid).kind == StratumKind::Cell) {
        for (int a = 0; a < P_.controls().size(); ++a) {
          const Vec f = P_.eval_f(sid, x, a);
          push_entry(axpy(dt, f, x), dt * P_.eval_l(sid, x, a), mode);
        }
      } else {
        const ConeDescriptor tspace = S.tangent_cone(sid, x);
        for (int a = 0; a < P_.controls().size(); ++a) {
          const Vec f = P_.eval_f(sid, x, a);
          if (tspace.distance(f) > P_.tangency_tol() * (1.0 + norm2(f)))
            continue;
          Vec foot = axpy(dt, f, x);
          // Sliding feet stay exactly on the interface planes.
          foot = S.project_to_stratum(sid, foot);
          push_entry(foot, dt * P_.eval_l(sid, x, a), mode);
        }
        // Trajectories may leave the interface into any incident stratum of
        // higher dimension; realized by the infimum over those layers.
        const auto& sig_s = S.stratum(sid).signature;
        for (int other = V.node_slot_begin_[node];
             other < V.node_slot_begin_[node + 1]; ++other) {
          const int osid = V.slot_stratum_[other];
          if (osid == sid) continue;
          if (S.in_closure(sig_s, S.stratum(osid).signature))
            siblings.push_back(other);
        }
      }
    }
    entry_begin[vi + 1] = static_cast<int>(entries.size());
    sibling_begin[vi + 1] = static_cast<int>(siblings.size());
  }

  V.update_count =
      static_cast<long long>(entries.size()) * static_cast<long long>(N);
  V.clamp_count = clamped * static_cast<long long>(N);
  if (!entries.empty() &&
      static_cast<double>(clamped) / static_cast<double>(entries.size()) > 0.05)
    throw BoxTooSmallError("more than 5% of foot points leave the box");

  // Update order: cell-type values are independent given t_{n+1}; interface
  // layers then take their sibling infima dimension by dimension.
  std::vector<int> cell_values, iface_values;
  for (int vi = 0; vi < V.num_values(); ++vi) {
    const int sid = mode == SolveMode::Continuous
                        ? G_->node_stratum(vi)
                        : V.slot_stratum(vi);
    if (mode == SolveMode::Continuous ||
        S.stratum(sid).kind == StratumKind::Cell)
      cell_values.push_back(vi);
    else
      iface_values.push_back(vi);
  }
  std::stable_sort(iface_values.begin(), iface_values.end(), [&](int a, int b) {
    return S.stratum(V.slot_stratum(a)).dim > S.stratum(V.slot_stratum(b)).dim;
  });
  std::vector<std::pair<int, int>> iface_ranges;  // [begin,end) per dim class
  for (std::size_t i = 0; i < iface_values.size();) {
    std::size_t j = i;
    const int dim = S.stratum(V.slot_stratum(iface_values[i])).dim;
    while (j < iface_values.size() &&
           S.stratum(V.slot_stratum(iface_values[j])).dim == dim)
      ++j;
    iface_ranges.emplace_back(static_cast<int>(i), static_cast<int>(j));
    i = j;
  }

  const auto update_value = [&](int vi, const std::vector<double>& prev,
                                const std::vector<double>& cur) {
    double best = kInf;
    for (int e = entry_begin[vi]; e < entry_begin[vi + 1]; ++e) {
      const PlanEntry& pe = entries[e];
      best = std::min(best,
                      pe.stage_cost + bilinear(prev, pe.c, pe.fx, pe.fy));
    }
    for (int s = sibling_begin[vi]; s < sibling_begin[vi + 1]; ++s)
      best = std::min(best, cur[siblings[s]]);
    return best;
  };

  for (int n = N - 1; n >= 0; --n) {
    const std::vector<double>& prev = V.values_[n + 1];
    std::vector<double>& cur = V.values_[n];
    parallel_for(cell_values.size(), exec_, [&](std::size_t k) {
      const int vi = cell_values[k];
      cur[vi] = update_value(vi, prev, cur);
    });
    for (const auto& [b, e] : iface_ranges) {
      parallel_for(static_cast<std::size_t>(e - b), exec_, [&](std::size_t k) {
        const int vi = iface_values[b + static_cast<int>(k)];
        cur[vi] = update_value(vi, prev, cur);
      });
    }
  }
  return V;
}

ValueGrid Solver::solve_continuous() { return run(SolveMode::Continuous); }
ValueGrid Solver::solve_lsc() { return run(SolveMode::LSC); }

ValueGrid solve_continuous(const ControlProblem& P,
                           std::shared_ptr<const StratifiedGrid> grid,
                           Exec exec) {
  return Solver(P, std::move(grid), exec).solve_continuous();
}

ValueGrid solve_lsc(const ControlProblem& P,
                    std::shared_ptr<const StratifiedGrid> grid, Exec exec) {
  return Solver(P, std::move(grid), exec).solve_lsc();
}

int default_time_steps(const ControlProblem& P, double box_lo, double box_hi,
                       int nodes_per_axis) {
  const double dx = (box_hi - box_lo) / (nodes_per_axis - 1);
  const double corner =
      std::sqrt(static_cast<double>(P.dim())) *
      std::max(std::abs(box_lo), std::abs(box_hi));
  const double speed = P.cf() * (1.0 + corner);
  return std::max(1, static_cast<int>(std::ceil(P.horizon() * speed / dx)));
}

}  // namespace stratahjb
