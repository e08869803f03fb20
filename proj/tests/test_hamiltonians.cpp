#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "stratahjb/config.hpp"
#include "stratahjb/errors.hpp"
#include "stratahjb/hamiltonians.hpp"
#include "stratahjb/verification.hpp"

using namespace stratahjb;

TEST_SUITE("hamiltonians") {

TEST_CASE("example A values on the interface") {
  auto P = builtin_problem("exampleA");
  const Vec x{0.0, 0.2};
  const int iface = P->strat().stratum_id_of_signature({0});

  // Oracle: enumerate the three essential velocities by hand.
  // essential velocities {(-1,0), (1,0), (0,0)}, l = 0.
  {
    const Vec p{2.0, 5.0};
    double he = -1e300;
    for (const Vec& v : {Vec{-1.0, 0.0}, Vec{1.0, 0.0}, Vec{0.0, 0.0}})
      he = std::max(he, -dot(p, v));
    CHECK(he == doctest::Approx(2.0));
    CHECK(hamiltonian_E(*P, x, p) == doctest::Approx(2.0));
    // Interface multifunction {(u,0)} over sampled u in [-1,1].
    CHECK(hamiltonian_F(*P, x, p) == doctest::Approx(2.0));
    // Tangential set is {u = 0} with zero cost.
    CHECK(hamiltonian_Gamma(*P, iface, x, p) == doctest::Approx(0.0));
  }
  {
    const Vec p{-3.0, 1.0};
    CHECK(hamiltonian_E(*P, x, p) == doctest::Approx(3.0));
  }
}

TEST_CASE("H_F with p = 0 is minus the minimal cost") {
  auto strat = std::make_shared<Stratification>(
      1, std::vector<Hyperplane>{});
  auto controls = ControlSet::interval(-1.0, 1.0, 11);
  VelocityPiece vp;
  vp.b = {0.0};
  vp.S = {{1.0}};
  std::vector<VelocityPiece> vel{vp};
  std::vector<CostPiece> cost{CostPiece::constant(1.0)};
  TerminalCost phi;
  ControlProblem P(strat, controls, vel, cost, phi, RegularityMode::Lipschitz,
                   1.0, 2.0, 1.0, 1.0, 1.0);
  CHECK(hamiltonian_F(P, {0.3}, {0.0}) == doctest::Approx(-1.0));
  // l == 1, f arbitrary: H(x, p) = |p| - 1 in one dimension.
  CHECK(hamiltonian_F(P, {0.3}, {2.0}) == doctest::Approx(2.0 - 1.0));
}

TEST_CASE("H_E equals H_F at cell points") {
  auto P = builtin_problem("exampleE");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 100; ++k) {
    Vec x{u(rng), u(rng)};
    if (std::abs(x[0]) < 1e-6) x[0] = 0.5;
    const Vec p{u(rng), u(rng)};
    CHECK(hamiltonian_E(*P, x, p) == doctest::Approx(hamiltonian_F(*P, x, p)));
  }
}

TEST_CASE("empty essential set is reported on an interface") {
  // Both cells point out of their closures and the interface piece is
  // transversal: no essential control exists at the junction point.
  auto strat = std::make_shared<Stratification>(
      1, std::vector<Hyperplane>{{0, 0.0}});
  auto controls = ControlSet::finite({{1.0}});
  std::vector<VelocityPiece> vel(3);
  vel[0] = VelocityPiece::constant({1.0}, 1);
  vel[1] = VelocityPiece::constant({1.0}, 1);
  vel[2] = VelocityPiece::constant({-1.0}, 1);
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::AbsX1;
  ControlProblem P(strat, controls, vel, cost, phi, RegularityMode::Lipschitz,
                   1.0, 1.0, 1.0, 1.0, 1.0);
  CHECK_THROWS_AS(hamiltonian_E(P, {0.0}, {1.0}), EmptyEssentialSetError);
  // In the cells it cannot occur.
  CHECK(hamiltonian_E(P, {0.5}, {1.0}) == doctest::Approx(1.0));
}

TEST_CASE("empty tangential set gives minus infinity") {
  auto P = builtin_problem("exampleB");
  const int iface = P->strat().stratum_id_of_signature({0});
  CHECK(hamiltonian_Gamma(*P, iface, {0.0}, {1.0}) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(hamiltonian_Gamma(*P, iface, {0.5}, {1.0}),
                  NotOnInterfaceError);
}

TEST_CASE("tangential sup on example E tracks the costate") {
  auto P = builtin_problem("exampleE");
  const int iface = P->strat().stratum_id_of_signature({0});
  const Vec x{0.0, 0.3};
  // p aligned with e2: sup over tangential samples (0,0),(0,+-1) of -p.f.
  CHECK(hamiltonian_Gamma(*P, iface, x, {0.0, 2.5}) == doctest::Approx(2.5));
  CHECK(hamiltonian_Gamma(*P, iface, x, {0.0, -4.0}) == doctest::Approx(4.0));
}

TEST_CASE("ordering, convexity, homogeneity on samples") {
  for (const char* name : {"exampleA", "exampleE", "exampleF", "ball-eikonal"}) {
    auto P = builtin_problem(name);
    const auto rep = hamiltonian_ordering_check(*P, 500, 99);
    CHECK_MESSAGE(rep.violations == 0, name);

    // Midpoint convexity in p and positive homogeneity (l == 0 problems).
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 1.0);
    const int d = P->dim();
    for (int k = 0; k < 50; ++k) {
      Vec x(d);
      for (double& v : x) v = g(rng);
      Vec p(d), q(d);
      for (double& v : p) v = g(rng);
      for (double& v : q) v = g(rng);
      Vec mid(d);
      for (int i = 0; i < d; ++i) mid[i] = 0.5 * (p[i] + q[i]);
      const double hm = hamiltonian_F(*P, x, mid);
      CHECK(hm <= 0.5 * hamiltonian_F(*P, x, p) +
                      0.5 * hamiltonian_F(*P, x, q) + 1e-12);
      const double lam = 1.0 + std::abs(g(rng));
      Vec lp(d);
      for (int i = 0; i < d; ++i) lp[i] = lam * p[i];
      CHECK(hamiltonian_F(*P, x, lp) ==
            doctest::Approx(lam * hamiltonian_F(*P, x, p)).epsilon(1e-9));
    }
  }
}

}  // TEST_SUITE
