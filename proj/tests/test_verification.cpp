#include <doctest.h>

#include <cmath>

#include "stratahjb/config.hpp"
#include "stratahjb/verification.hpp"

using namespace stratahjb;

TEST_SUITE("verification") {

TEST_CASE("uniqueness crosscheck passes on example E") {
  auto P = builtin_problem("exampleE");
  GridParams gp;
  gp.nodes_per_axis = 61;
  gp.time_steps = 80;
  const auto rep = uniqueness_crosscheck(*P, gp);
  REQUIRE(!rep.skipped);
  CHECK(rep.pass);
  CHECK(rep.max_discrepancy <= rep.tolerance);
}

TEST_CASE("uniqueness crosscheck is skipped when H2 fails") {
  auto P = builtin_problem("exampleA");
  GridParams gp;
  gp.nodes_per_axis = 41;
  gp.time_steps = 50;
  const auto rep = uniqueness_crosscheck(*P, gp);
  CHECK(rep.skipped);
  CHECK(rep.skip_reason.find("H2") != std::string::npos);
}

TEST_CASE("comparison test ordering is exact") {
  auto P = builtin_problem("exampleE");
  GridParams gp;
  gp.nodes_per_axis = 41;
  gp.time_steps = 50;
  for (double delta : {0.0, 0.1, 0.3}) {
    const auto rep = comparison_test(*P, gp, delta);
    CHECK(rep.pass);
    CHECK(rep.min_diff >= -1e-12);
    CHECK(rep.max_diff <= delta + 1e-12);
  }
  // Layered mode: per-layer ordering on the lsc problem.
  auto F = builtin_problem("exampleF");
  GridParams gf;
  gf.nodes_per_axis = 101;
  gf.time_steps = 25;
  const auto repf = comparison_test(*F, gf, 0.3);
  CHECK(repf.pass);
}

TEST_CASE("stability ladder on example E") {
  auto P = builtin_problem("exampleE");
  GridParams gp;
  gp.nodes_per_axis = 41;
  gp.time_steps = 50;
  StabilitySpec spec;
  spec.direction = {1.0, 0.0};
  spec.cost_bump = 1.0;
  spec.terminal_bump = 1.0;
  spec.eps0 = 0.2;
  spec.levels = 3;
  const auto rep = stability_test(*P, gp, spec);
  CHECK(rep.pass);
  REQUIRE(rep.levels.size() == 4);
  for (std::size_t i = 1; i < rep.levels.size(); ++i)
    CHECK(rep.levels[i].max_diff <=
          rep.levels[i - 1].max_diff + rep.scheme_error);

  // eps0 = 0: all levels coincide with the base run.
  StabilitySpec zero = spec;
  zero.eps0 = 0.0;
  zero.levels = 1;
  const auto rep0 = stability_test(*P, gp, zero);
  for (const auto& lv : rep0.levels) CHECK(lv.max_diff == 0.0);

  // Terminal-only perturbation shifts values by exactly eps.
  StabilitySpec phional;
  phional.direction = {0.0, 0.0};
  phional.cost_bump = 0.0;
  phional.terminal_bump = 1.0;
  phional.eps0 = 0.2;
  phional.levels = 2;
  const auto repp = stability_test(*P, gp, phional);
  for (const auto& lv : repp.levels)
    CHECK(std::abs(lv.max_diff - lv.eps) <= 1e-9);
}

TEST_CASE("hypothesis audit verdicts per problem") {
  {
    const auto rep = hypothesis_audit(*builtin_problem("exampleE"));
    CHECK(rep.overall == CheckStatus::Pass);
  }
  {
    // Forced one-dimensional flow: H2 fails, H3 holds by empty tangential.
    const auto rep = hypothesis_audit(*builtin_problem("exampleB"));
    bool h2_fail = false, h3_pass = false;
    for (const auto& c : rep.checks) {
      if (c.name.find("H2") != std::string::npos)
        h2_fail = c.status == CheckStatus::Fail;
      if (c.name.find("H3") != std::string::npos)
        h3_pass = c.status == CheckStatus::Pass &&
                  c.detail.find("empty-tangential") != std::string::npos;
    }
    CHECK(h2_fail);
    CHECK(h3_pass);
  }
  {
    // The paper two-domain example: tangential controllability fails.
    const auto rep = hypothesis_audit(*builtin_problem("exampleA"));
    bool p1_fail = false;
    for (const auto& c : rep.checks)
      if (c.name.find("P1") != std::string::npos)
        p1_fail = c.status == CheckStatus::Fail;
    CHECK(p1_fail);
  }
}

TEST_CASE("audit flags an injected negative running cost") {
  auto strat = std::make_shared<Stratification>(
      1, std::vector<Hyperplane>{{0, 0.0}});
  auto controls = ControlSet::interval(-1.0, 1.0, 5);
  VelocityPiece vp;
  vp.b = {0.0};
  vp.S = {{1.0}};
  std::vector<VelocityPiece> vel(3, vp);
  std::vector<CostPiece> cost(3, CostPiece::constant(-0.5));
  TerminalCost phi;
  phi.kind = TerminalKind::AbsX1;
  ControlProblem P(strat, controls, vel, cost, phi, RegularityMode::Lipschitz,
                   1.0, 1.0, 1.0, 1.0, 1.0);
  const auto rep = hypothesis_audit(P);
  CHECK(rep.overall == CheckStatus::Fail);
}

TEST_CASE("hamiltonian ordering holds on every builtin") {
  for (const char* name :
       {"exampleA", "exampleB", "exampleE", "exampleF", "ball-eikonal"}) {
    const auto rep =
        hamiltonian_ordering_check(*builtin_problem(name), 1000, 5);
    CHECK_MESSAGE(rep.violations == 0, name);
  }
}

TEST_CASE("interface lipschitz constant is grid stable on example E") {
  auto P = builtin_problem("exampleE");
  GridParams a;
  a.nodes_per_axis = 41;
  a.time_steps = 50;
  GridParams b;
  b.nodes_per_axis = 81;
  b.time_steps = 100;
  const auto Va = solve_continuous(
      *P, std::make_shared<const StratifiedGrid>(make_grid(*P, a)));
  const auto Vb = solve_continuous(
      *P, std::make_shared<const StratifiedGrid>(make_grid(*P, b)));
  const double la = interface_lipschitz_constant(Va);
  const double lb = interface_lipschitz_constant(Vb);
  CHECK(std::abs(la - lb) <= 0.1 * std::max(la, lb));
}

}  // TEST_SUITE
