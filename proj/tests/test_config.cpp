#include <doctest.h>

#include "stratahjb/config.hpp"
#include "stratahjb/errors.hpp"
#include "stratahjb/solver.hpp"

using namespace stratahjb;

TEST_SUITE("config") {

TEST_CASE("builtin names") {
  for (const char* name :
       {"exampleA", "exampleB", "exampleE", "exampleF", "ball-eikonal"})
    CHECK(builtin_problem(name)->name() == name);
  CHECK_THROWS_AS(builtin_problem("nope"), ConfigParseError);
}

TEST_CASE("builtin reference with control override") {
  const std::string cfg = R"(
[problem]
name = exampleE
)";
  auto P = parse_problem_config(cfg, 16);
  CHECK(P->name() == "exampleE");
  CHECK(P->controls().size() == 17);  // 16 on the circle plus the center
}

TEST_CASE("generic problem spec") {
  const std::string cfg = R"(
# two cells of R with opposite drifts and a transversal interface piece
[problem]
name = drift-pair
dimension = 1
horizon = 1.0
cf = 2.0
cl = 1.0
lambda_l = 1.0
lambda_phi = 1.0

[hyperplane]
axis = 0
offset = 0.25

[controls]
family = interval
lo = -1.0
hi = 1.0
count = 5

[stratum]
signature = -1
velocity = scaled-ball
scale = 1.0
cost = constant
value = 0.5

[stratum]
signature = 0
velocity = constant
vector = 1.0

[stratum]
signature = 1
velocity = affine
vector = 0.0
scale = 1.0
matrix = -0.5

[terminal]
kind = abs-x1
mode = lipschitz
)";
  auto P = parse_problem_config(cfg);
  CHECK(P->name() == "drift-pair");
  CHECK(P->strat().num_strata() == 3);
  const int left = P->strat().stratum_id_of_signature({-1});
  const int right = P->strat().stratum_id_of_signature({+1});
  CHECK(P->eval_l(left, {0.0}, 0) == doctest::Approx(0.5));
  // affine piece: f = a - 0.5 x
  CHECK(P->eval_f(right, {1.0}, 4)[0] == doctest::Approx(1.0 - 0.5));
  // Round-trip through the solver at desk scale.
  auto G = std::make_shared<const StratifiedGrid>(P->strat_ptr(), -1.0, 1.0,
                                                  21, 40, 1.0);
  CHECK_NOTHROW(solve_continuous(*P, G));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(parse_problem_config("[problem]\ndimension = x\n"),
                  ConfigParseError);
  CHECK_THROWS_AS(parse_problem_config("key = 1\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_problem_config("[nope]\na = 1\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_problem_config(""), ConfigParseError);
  // Missing stratum section must be rejected, not defaulted.
  const std::string missing = R"(
[problem]
dimension = 1
horizon = 1
cf = 1
cl = 1
lambda_l = 1
lambda_phi = 1
[hyperplane]
axis = 0
offset = 0
[controls]
family = interval
lo = -1
hi = 1
count = 3
[stratum]
signature = -1
velocity = constant
vector = 1
[terminal]
kind = abs-x1
)";
  CHECK_THROWS_AS(parse_problem_config(missing), ConfigParseError);
}

TEST_CASE("table terminal cost") {
  const std::string cfg = R"(
[problem]
dimension = 1
horizon = 1
cf = 1
cl = 1
lambda_l = 1
lambda_phi = 1
[controls]
family = interval
lo = -1
hi = 1
count = 3
[stratum]
signature =
velocity = constant
vector = 0.0
[terminal]
kind = table
xs = -1, 0, 1
vals = 2, 0, 2
)";
  // No hyperplanes: single stratum with empty signature.
  auto P = parse_problem_config(cfg);
  CHECK(P->eval_phi({-0.5}) == doctest::Approx(1.0));
  CHECK(P->eval_phi({5.0}) == doctest::Approx(2.0));
}

}  // TEST_SUITE
