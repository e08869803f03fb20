#include "stratahjb/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "stratahjb/errors.hpp"
#include "stratahjb/hamiltonians.hpp"

namespace stratahjb {

StratifiedGrid make_grid(const ControlProblem& P, const GridParams& gp) {
  const int N = gp.time_steps > 0
                    ? gp.time_steps
                    : default_time_steps(P, gp.box_lo, gp.box_hi,
                                         gp.nodes_per_axis);
  return StratifiedGrid(P.strat_ptr(), gp.box_lo, gp.box_hi,
                        gp.nodes_per_axis, N, P.horizon());
}

CrosscheckReport uniqueness_crosscheck(const ControlProblem& P,
                                       const GridParams& gp) {
  CrosscheckReport rep;
  const auto h2 = P.check_controllability("H2", 8);
  if (!h2.holds) {
    rep.skipped = true;
    rep.skip_reason = "H2 interface controllability violated";
    return rep;
  }
  if (P.terminal_mode() != RegularityMode::Lipschitz) {
    rep.skipped = true;
    rep.skip_reason = "terminal cost not Lipschitz";
    return rep;
  }
  auto grid = std::make_shared<const StratifiedGrid>(make_grid(P, gp));
  const ValueGrid a = solve_continuous(P, grid);
  const ValueGrid b = solve_lsc(P, grid);
  double disc = 0.0;
  for (int n = 0; n <= grid->time_steps(); ++n)
    for (int i = 0; i < grid->num_nodes(); ++i)
      disc = std::max(disc, std::abs(a.node_value(n, i) - b.node_value(n, i)));
  rep.max_discrepancy = disc;
  rep.tolerance = 3.0 * (grid->max_dx() + grid->dt());
  rep.pass = disc <= rep.tolerance;
  return rep;
}

ComparisonReport comparison_test(const ControlProblem& P, const GridParams& gp,
                                 double delta) {
  ComparisonReport rep;
  rep.delta = delta;
  auto grid = std::make_shared<const StratifiedGrid>(make_grid(P, gp));
  const bool lsc = P.terminal_mode() == RegularityMode::LSC;
  const ControlProblem shifted = P.perturbed(Vec(P.dim(), 0.0), 0.0, 0.0, delta);
  const ValueGrid v0 = lsc ? solve_lsc(P, grid) : solve_continuous(P, grid);
  const ValueGrid v1 =
      lsc ? solve_lsc(shifted, grid) : solve_continuous(shifted, grid);
  rep.min_diff = std::numeric_limits<double>::infinity();
  rep.max_diff = -rep.min_diff;
  for (int n = 0; n <= grid->time_steps(); ++n) {
    const auto& a = v0.layer(n);
    const auto& b = v1.layer(n);
    for (std::size_t i = 0; i < a.size(); ++i) {
      rep.min_diff = std::min(rep.min_diff, b[i] - a[i]);
      rep.max_diff = std::max(rep.max_diff, b[i] - a[i]);
    }
  }
  rep.pass = rep.min_diff >= -1e-12 && rep.max_diff <= delta + 1e-12;
  return rep;
}

StabilityReport stability_test(const ControlProblem& P, const GridParams& gp,
                               const StabilitySpec& spec) {
  StabilityReport rep;
  auto grid = std::make_shared<const StratifiedGrid>(make_grid(P, gp));
  rep.scheme_error = grid->max_dx() + grid->dt();
  const ValueGrid base = solve_continuous(P, grid);

  for (int n = 0; n <= spec.levels; ++n) {
    const double eps = spec.eps0 / std::pow(2.0, n);
    const ControlProblem Pn =
        P.perturbed(spec.direction, eps, eps * spec.cost_bump,
                    eps * spec.terminal_bump);
    const ValueGrid vn = solve_continuous(Pn, grid);
    double diff = 0.0;
    for (int s = 0; s <= grid->time_steps(); ++s) {
      const auto& a = base.layer(s);
      const auto& b = vn.layer(s);
      for (std::size_t i = 0; i < a.size(); ++i)
        diff = std::max(diff, std::abs(b[i] - a[i]));
    }
    rep.levels.push_back({eps, diff});
  }

  const double tol3 = 3.0 * rep.scheme_error;
  rep.fitted_constant =
      spec.eps0 > 0.0
          ? std::max(0.0, (rep.levels.front().max_diff - tol3) /
                              rep.levels.front().eps)
          : 0.0;
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.levels.size(); ++i)
    if (rep.levels[i].max_diff >
        rep.levels[i - 1].max_diff + rep.scheme_error)
      rep.monotone = false;
  rep.bounded = true;
  for (const auto& lv : rep.levels)
    if (lv.max_diff > rep.fitted_constant * lv.eps + tol3 + 1e-12)
      rep.bounded = false;
  rep.pass = rep.monotone && rep.bounded;
  return rep;
}

namespace {

void add_check(AuditReport& rep, const std::string& name, CheckStatus st,
               const std::string& detail) {
  rep.checks.push_back({name, st, detail});
  if (st == CheckStatus::Fail)
    rep.overall = CheckStatus::Fail;
  else if (st == CheckStatus::Warn && rep.overall == CheckStatus::Pass)
    rep.overall = CheckStatus::Warn;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

AuditReport hypothesis_audit(const ControlProblem& P, uint64_t seed) {
  AuditReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-2.0, 2.0);
  const Stratification& S = P.strat();
  const int d = P.dim();

  // A section that throws is reported as a failed check, not a crash.
  const auto guarded = [&rep](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      add_check(rep, name, CheckStatus::Fail, std::string("error: ") + e.what());
    }
  };

  // (HF)(ii)/(HL)(ii): per-piece Lipschitz difference quotients stay bounded.
  // Raw piece evaluations: growth is audited separately below.
  guarded("HF/HL piecewise Lipschitz", [&] {
    double maxq = 0.0;
    bool finite = true;
    for (const Stratum& s : S.strata()) {
      for (int k = 0; k < 16; ++k) {
        const Vec x1 = P.sample_point_on_stratum(s.id, 2.0, seed + 11 * k);
        const Vec x2 = P.sample_point_on_stratum(s.id, 2.0, seed + 13 * k + 7);
        const double dx = dist2(x1, x2);
        if (dx < 1e-9) continue;
        for (int a = 0; a < P.controls().size(); ++a) {
          const Vec& ca = P.controls().samples[a];
          const double q =
              (dist2(P.velocity_piece(s.id).eval(x1, ca),
                     P.velocity_piece(s.id).eval(x2, ca)) +
               std::abs(P.cost_piece(s.id).eval(x1, ca) -
                        P.cost_piece(s.id).eval(x2, ca))) /
              dx;
          if (!std::isfinite(q)) finite = false;
          maxq = std::max(maxq, q);
        }
      }
    }
    add_check(rep, "HF/HL piecewise Lipschitz", finite ? CheckStatus::Pass
                                                       : CheckStatus::Fail,
              "max difference quotient " + fmt(maxq));
  });

  // (HF)(iii)/(HL)(iii): growth bounds and sign of the running cost, plus
  // slack b >= 0 with clamp accounting.
  {
    long long clamps = 0, total = 0, fail = 0;
    for (int k = 0; k < 256; ++k) {
      Vec x(d);
      for (int a = 0; a < d; ++a) x[a] = ux(rng);
      const int sid = S.locate(x);
      for (int a = 0; a < P.controls().size(); ++a) {
        ++total;
        try {
          (void)P.eval_f(sid, x, a);
          const double l = P.eval_l(sid, x, a);
          const double b = P.cost_bound(x) - l;
          if (b < 0.0) ++clamps;
        } catch (const GrowthViolationError&) {
          ++fail;
        }
      }
    }
    const bool bad = fail > 0 || clamps > total / 1000;
    add_check(rep, "growth bounds (HF iii / HL iii)",
              bad ? CheckStatus::Fail : CheckStatus::Pass,
              "violations " + std::to_string(fail) + ", slack clamps " +
                  std::to_string(clamps) + "/" + std::to_string(total));
  }

  // (HG): random two-point convex combinations of sampled G(x) elements stay
  // in the sampled hull (support-function test).
  guarded("HG convex images (sampled)", [&] {
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
      Vec x(d);
      for (int a = 0; a < d; ++a) x[a] = ux(rng);
      const int sid = S.locate(x);
      std::vector<Vec> gpts;
      for (int a = 0; a < P.controls().size(); ++a) {
        const Vec f = P.eval_f(sid, x, a);
        const double l = P.eval_l(sid, x, a);
        const double b = P.eval_b(sid, x, a);
        for (double r : {0.0, 0.5 * b, b}) {
          Vec g(f);
          g.push_back(-l - r);
          gpts.push_back(g);
        }
      }
      std::uniform_int_distribution<std::size_t> pick(0, gpts.size() - 1);
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      for (int m = 0; m < 16; ++m) {
        const Vec& p1 = gpts[pick(rng)];
        const Vec& p2 = gpts[pick(rng)];
        const double th = u01(rng);
        const Vec mid = add(scaled(p1, th), scaled(p2, 1.0 - th));
        // Support-function margin over random directions.
        std::normal_distribution<double> nd(0.0, 1.0);
        for (int dir = 0; dir < 64; ++dir) {
          Vec u(d + 1);
          double nm = 0.0;
          for (double& v : u) {
            v = nd(rng);
            nm += v * v;
          }
          nm = std::sqrt(nm);
          for (double& v : u) v /= nm;
          double support = -std::numeric_limits<double>::infinity();
          for (const Vec& g : gpts) support = std::max(support, dot(u, g));
          worst = std::max(worst, dot(u, mid) - support);
        }
      }
    }
    add_check(rep, "HG convex images (sampled)",
              worst <= 1e-6 ? CheckStatus::Pass : CheckStatus::Fail,
              "worst hull margin " + fmt(worst));
  });

  // (HF)(i) upper semi-continuity probe: velocities from a cell approaching
  // an interface point land inside the realized interface multifunction.
  guarded("HF(i) usc across interfaces", [&] {
    double worst = 0.0;
    for (const Stratum& s : S.strata()) {
      if (s.kind == StratumKind::Cell) continue;
      for (int k = 0; k < 8; ++k) {
        const Vec x = P.sample_point_on_stratum(s.id, 2.0, seed + 77 * k);
        for (int cell : S.incident_strata_of(s.id)) {
          if (S.stratum(cell).kind != StratumKind::Cell) continue;
          for (int a = 0; a < P.controls().size(); ++a) {
            const Vec lim = P.eval_f(cell, x, a);  // extension value at x
            // Distance to the union of incident piece values at x.
            double best = std::numeric_limits<double>::infinity();
            for (int sid2 : S.incident_strata_of(s.id))
              for (int a2 = 0; a2 < P.controls().size(); ++a2)
                best = std::min(best, dist2(lim, P.eval_f(sid2, x, a2)));
            worst = std::max(worst, best);
          }
        }
      }
    }
    add_check(rep, "HF(i) usc across interfaces",
              worst <= 1e-6 ? CheckStatus::Pass : CheckStatus::Fail,
              "worst limit distance " + fmt(worst));
  });

  // Controllability verdicts.
  guarded("controllability", [&] {
    const auto h2 = P.check_controllability("H2", 16, seed);
    double r1 = std::numeric_limits<double>::infinity();
    double p1 = std::numeric_limits<double>::infinity();
    for (const auto& ic : h2.interfaces) {
      r1 = std::min(r1, ic.ball_radius);
      p1 = std::min(p1, ic.tangential_ball_radius);
    }
    if (h2.interfaces.empty()) r1 = p1 = 0.0;
    add_check(rep, "H2 interface controllability",
              h2.holds ? CheckStatus::Pass : CheckStatus::Fail,
              "inscribed radius " + fmt(r1));
    add_check(rep, "P1 tangential controllability",
              p1 > 1e-9 ? CheckStatus::Pass : CheckStatus::Fail,
              "tangential inscribed radius " + fmt(p1));
    const auto h3 = P.check_controllability("H3", 16, seed);
    std::string detail;
    for (const auto& ic : h3.interfaces) {
      detail += "stratum " + std::to_string(ic.stratum) + ": ";
      detail += ic.verdict == ControllabilityVerdict::EmptyTangential
                    ? "empty-tangential; "
                : ic.verdict == ControllabilityVerdict::Holds
                    ? "ball(" + fmt(ic.ball_radius) + "); "
                    : "violated; ";
    }
    add_check(rep, "H3 per-interface controllability",
              h3.holds ? CheckStatus::Pass : CheckStatus::Fail, detail);
  });
  return rep;
}

double interface_lipschitz_constant(const ValueGrid& V) {
  const StratifiedGrid& G = V.grid();
  const Stratification& S = G.strat();
  double lip = 0.0;
  for (int n = 0; n <= G.time_steps(); ++n) {
    for (int i = 0; i < G.num_nodes(); ++i) {
      if (S.stratum(G.node_stratum(i)).kind == StratumKind::Cell) continue;
      const Vec x = G.node_coords(i);
      if (n + 1 <= G.time_steps())
        lip = std::max(lip, std::abs(V.node_value(n + 1, i) -
                                     V.node_value(n, i)) /
                                G.dt());
      // Spatial neighbors along each axis that stay on an interface.
      const auto idx = G.multi_index(i);
      for (int a = 0; a < G.dim(); ++a) {
        if (idx[a] + 1 >= G.nodes_on_axis(a)) continue;
        auto jdx = idx;
        jdx[a] += 1;
        const int j = G.flat_index(jdx);
        if (S.stratum(G.node_stratum(j)).kind == StratumKind::Cell) continue;
        const double dx = G.coords(a)[jdx[a]] - G.coords(a)[idx[a]];
        lip = std::max(lip, std::abs(V.node_value(n, j) - V.node_value(n, i)) /
                                dx);
      }
      (void)x;
    }
  }
  return lip;
}

OrderingReport hamiltonian_ordering_check(const ControlProblem& P,
                                          long long samples, uint64_t seed) {
  OrderingReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> np(0.0, 1.0);
  std::uniform_real_distribution<double> uscale(0.1, 3.0);
  const Stratification& S = P.strat();
  std::vector<int> ifaces;
  for (const Stratum& s : S.strata())
    if (s.kind != StratumKind::Cell) ifaces.push_back(s.id);
  std::vector<int> cells;
  for (const Stratum& s : S.strata())
    if (s.kind == StratumKind::Cell) cells.push_back(s.id);

  for (long long k = 0; k < samples; ++k) {
    const bool on_iface = !ifaces.empty() && (k % 2 == 0);
    const int sid = on_iface ? ifaces[k / 2 % ifaces.size()]
                             : cells[k / 2 % cells.size()];
    const Vec x = P.sample_point_on_stratum(sid, 2.0, seed + 1000 + k);
    Vec p(P.dim());
    const double sc = uscale(rng);
    for (double& v : p) v = sc * np(rng);

    const double hf = hamiltonian_F(P, x, p);
    const double he = hamiltonian_E(P, x, p);
    const double tol = 1e-12 * std::max(1.0, std::abs(hf));
    ++rep.samples;
    double slack = hf - he;
    if (on_iface) {
      const double hg = hamiltonian_Gamma(P, sid, x, p);
      if (std::isfinite(hg)) slack = std::min(slack, he - hg);
    }
    if (slack < -tol) {
      ++rep.violations;
      rep.worst = std::min(rep.worst, slack);
    }
  }
  return rep;
}

}  // namespace stratahjb
