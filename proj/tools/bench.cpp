// Benchmark of the time-step sweep kernels: serial reference vs OpenMP, with
// a checksum comparison so the parallel path is known to be bit-identical.

#include <chrono>
#include <cstdio>
#include <memory>
#include <string>

#include "stratahjb/config.hpp"
#include "stratahjb/solver.hpp"

using namespace stratahjb;

namespace {

double checksum(const ValueGrid& V) {
  double s = 0.0;
  for (int n = 0; n <= V.grid().time_steps(); ++n)
    for (double v : V.layer(n)) s += v;
  return s;
}

template <typename SolveFn>
void bench_case(const std::string& label, SolveFn&& solve) {
  const auto run = [&](Exec exec) {
    const auto t0 = std::chrono::steady_clock::now();
    const ValueGrid V = solve(exec);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return std::pair<double, double>(secs, checksum(V));
  };
  const auto [ts, cs] = run(Exec::Serial);
  const auto [tp, cp] = run(Exec::OpenMP);
  std::printf("%-28s serial %8.3fs  openmp %8.3fs  speedup %5.2fx  %s\n",
              label.c_str(), ts, tp, ts / tp,
              cs == cp ? "checksums equal" : "CHECKSUM MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  const bool large = argc > 1 && std::string(argv[1]) == "--large";

  for (const int nodes : large ? std::vector<int>{81, 161}
                               : std::vector<int>{41, 81}) {
    auto P = builtin_problem("exampleE");
    auto G = std::make_shared<const StratifiedGrid>(
        P->strat_ptr(), -2.0, 2.0, nodes, large ? 200 : 100, 1.0);
    bench_case("exampleE continuous n=" + std::to_string(nodes),
               [&](Exec e) { return solve_continuous(*P, G, e); });
    bench_case("exampleE lsc layered n=" + std::to_string(nodes),
               [&](Exec e) { return solve_lsc(*P, G, e); });
  }
  {
    auto P = builtin_problem("exampleF");
    auto G = std::make_shared<const StratifiedGrid>(P->strat_ptr(), -2.0, 2.0,
                                                    401, 100, 1.0);
    bench_case("exampleF lsc 1d n=401",
               [&](Exec e) { return solve_lsc(*P, G, e); });
  }
  return 0;
}
