// stratahjb command line front end: solve / oracle / verify / stability /
// audit on a problem config. Exit codes: 0 ok, 1 fail verdict, 2 usage or
// config error.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stratahjb/config.hpp"
#include "stratahjb/errors.hpp"
#include "stratahjb/solver.hpp"
#include "stratahjb/trajectory.hpp"
#include "stratahjb/verification.hpp"

using nlohmann::json;
using namespace stratahjb;

namespace {

struct GridFlags {
  int nodes = 81;
  int timesteps = 0;
  std::string box = "-2,2";
  int controls = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--grid", nodes, "nodes per axis");
    cmd->add_option("--timesteps", timesteps, "time steps (0: CFL default)");
    cmd->add_option("--box", box, "computational box lo,hi");
    cmd->add_option("--controls", controls,
                    "control sample count override (0: config value)");
  }

  GridParams params() const {
    GridParams gp;
    const auto comma = box.find(',');
    if (comma == std::string::npos)
      throw ConfigParseError("--box expects lo,hi");
    gp.box_lo = std::stod(box.substr(0, comma));
    gp.box_hi = std::stod(box.substr(comma + 1));
    gp.nodes_per_axis = nodes;
    gp.time_steps = timesteps;
    return gp;
  }
};

std::string csv_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

std::string grid_csv(const ValueGrid& V, bool full) {
  const StratifiedGrid& G = V.grid();
  std::string csv = "t";
  for (int a = 0; a < G.dim(); ++a) csv += ",x" + std::to_string(a + 1);
  csv += ",stratumId,layerId,value\n";
  std::vector<int> steps;
  if (full)
    for (int n = 0; n <= G.time_steps(); ++n) steps.push_back(n);
  else
    steps = {0, G.time_steps()};
  for (int n : steps) {
    const double t = n * G.dt();
    for (int i = 0; i < G.num_nodes(); ++i) {
      const Vec x = G.node_coords(i);
      const auto emit = [&](int layer, double value) {
        csv += csv_double(t);
        for (int a = 0; a < G.dim(); ++a) csv += "," + csv_double(x[a]);
        csv += "," + std::to_string(G.node_stratum(i)) + "," +
               std::to_string(layer) + "," + csv_double(value) + "\n";
      };
      if (V.mode() == SolveMode::Continuous) {
        emit(G.node_stratum(i), V.layer(n)[i]);
      } else {
        for (int sid : G.strat().incident_strata_of(G.node_stratum(i)))
          emit(sid, V.layer(n)[V.slot_index(i, sid)]);
      }
    }
  }
  return csv;
}

json problem_json(const ControlProblem& P) {
  json j;
  j["name"] = P.name();
  j["dimension"] = P.dim();
  j["horizon"] = P.horizon();
  j["controls"] = P.controls().descriptor;
  j["control_count"] = P.controls().size();
  json planes = json::array();
  for (const auto& h : P.strat().hyperplanes())
    planes.push_back({{"axis", h.axis}, {"offset", h.offset}});
  j["hyperplanes"] = planes;
  return j;
}

int cmd_solve(const std::string& config, const GridFlags& gf,
              const std::string& mode, const std::string& out_dir,
              uint64_t seed, bool full_grid) {
  auto P = load_problem_config(config, gf.controls);
  const GridParams gp = gf.params();
  auto grid = std::make_shared<const StratifiedGrid>(make_grid(*P, gp));

  const bool lsc = mode == "lsc" ||
                   (mode == "auto" && P->terminal_mode() == RegularityMode::LSC);
  if (mode == "continuous" && P->terminal_mode() == RegularityMode::LSC)
    throw ConfigParseError("continuous mode needs a Lipschitz terminal cost");
  const auto t0 = std::chrono::steady_clock::now();
  const ValueGrid V = lsc ? solve_lsc(*P, grid) : solve_continuous(*P, grid);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/grid.csv", grid_csv(V, full_grid));

  json rep;
  rep["problem"] = problem_json(*P);
  rep["mode"] = lsc ? "lsc" : "continuous";
  rep["grid"] = {{"nodes_per_axis", gp.nodes_per_axis},
                 {"time_steps", grid->time_steps()},
                 {"box", {gp.box_lo, gp.box_hi}},
                 {"dt", grid->dt()},
                 {"max_dx", grid->max_dx()}};
  rep["seed"] = seed;
  rep["runtime_seconds"] = secs;
  rep["clamp_count"] = V.clamp_count;
  rep["update_count"] = V.update_count;
  rep["warnings"] = V.warnings;
  if (const auto cf = closed_form_for(P->name(), P->horizon())) {
    const double band = 2.0 * grid->max_dx();
    rep["closed_form"] = {
        {"band", band},
        {"max_error_off_band",
         V.max_error_vs(cf->value, band, cf->kink_distance)},
        {"max_error_everywhere",
         V.max_error_vs(cf->value, -1.0, cf->kink_distance)}};
  }
  write_file(out_dir + "/report.json", rep.dump(2) + "\n");
  std::cout << "solved " << P->name() << " (" << rep["mode"].get<std::string>()
            << "), wrote " << out_dir << "/grid.csv\n";
  return 0;
}

int cmd_oracle(const std::string& config, const std::string& at, int depth,
               int slices, int controls, const std::string& dump_traj) {
  auto P = load_problem_config(config, controls);
  std::vector<double> coords;
  std::stringstream ss(at);
  std::string item;
  while (std::getline(ss, item, ',')) coords.push_back(std::stod(item));
  if (static_cast<int>(coords.size()) != P->dim() + 1)
    throw ConfigParseError("--at expects t,x1[,x2]");
  const double t0 = coords[0];
  const Vec x0(coords.begin() + 1, coords.end());

  const auto res = oracle_value(*P, t0, x0, depth, slices);
  std::cout.precision(12);
  std::cout << "oracle value " << res.value << "\n";
  std::cout << "best schedule:";
  for (std::size_t i = 0; i < res.best.control.size(); ++i) {
    std::cout << " [" << res.best.breakpoints[i] << ","
              << res.best.breakpoints[i + 1] << ") a" << res.best.control[i]
              << "=(";
    const Vec& a = P->controls().samples[res.best.control[i]];
    for (std::size_t k = 0; k < a.size(); ++k)
      std::cout << (k ? "," : "") << a[k];
    std::cout << ")";
  }
  std::cout << "\n";
  if (!dump_traj.empty()) {
    const auto traj =
        integrate(*P, t0, x0, res.best, (P->horizon() - t0) / 256.0);
    write_file(dump_traj, trajectory_csv(traj, P->dim()));
    std::cout << "trajectory written to " << dump_traj << "\n";
  }
  return 0;
}

int cmd_verify(const std::string& config, const GridFlags& gf,
               const std::string& out_dir) {
  auto P = load_problem_config(config, gf.controls);
  const auto rep = uniqueness_crosscheck(*P, gf.params());
  json j;
  j["problem"] = problem_json(*P);
  j["uniqueness_crosscheck"] = {{"skipped", rep.skipped},
                                {"skip_reason", rep.skip_reason},
                                {"pass", rep.pass},
                                {"max_discrepancy", rep.max_discrepancy},
                                {"tolerance", rep.tolerance}};
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/verify.json", j.dump(2) + "\n");
  }
  if (rep.skipped) {
    std::cout << "uniqueness_crosscheck SKIPPED: " << rep.skip_reason << "\n";
    return 0;
  }
  std::cout << "uniqueness_crosscheck " << (rep.pass ? "PASS" : "FAIL")
            << " (max discrepancy " << rep.max_discrepancy << ", tol "
            << rep.tolerance << ")\n";
  return rep.pass ? 0 : 1;
}

int cmd_stability(const std::string& config, const GridFlags& gf, double eps0,
                  int levels, const std::string& out_dir) {
  auto P = load_problem_config(config, gf.controls);
  StabilitySpec spec;
  spec.direction = Vec(P->dim(), 0.0);
  spec.direction[0] = 1.0;
  spec.cost_bump = 1.0;
  spec.terminal_bump = 1.0;
  spec.eps0 = eps0;
  spec.levels = levels;
  const auto rep = stability_test(*P, gf.params(), spec);
  json j;
  j["problem"] = problem_json(*P);
  j["fitted_constant"] = rep.fitted_constant;
  j["scheme_error"] = rep.scheme_error;
  j["monotone"] = rep.monotone;
  j["bounded"] = rep.bounded;
  j["pass"] = rep.pass;
  json lv = json::array();
  for (const auto& l : rep.levels)
    lv.push_back({{"eps", l.eps}, {"max_diff", l.max_diff}});
  j["levels"] = lv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/stability.json", j.dump(2) + "\n");
  }
  for (const auto& l : rep.levels)
    std::cout << "eps " << l.eps << " -> max|u_n - u| " << l.max_diff << "\n";
  std::cout << "stability " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int cmd_audit(const std::string& config, uint64_t seed,
              const std::string& out_dir) {
  auto P = load_problem_config(config);
  const auto rep = hypothesis_audit(*P, seed);
  json j;
  j["problem"] = problem_json(*P);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    const char* st = c.status == CheckStatus::Pass   ? "PASS"
                     : c.status == CheckStatus::Warn ? "WARN"
                                                     : "FAIL";
    checks.push_back({{"name", c.name}, {"status", st}, {"detail", c.detail}});
    std::cout << st << "  " << c.name << " (" << c.detail << ")\n";
  }
  j["checks"] = checks;
  j["overall"] = rep.overall == CheckStatus::Pass   ? "PASS"
                 : rep.overall == CheckStatus::Warn ? "WARN"
                                                    : "FAIL";
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/audit.json", j.dump(2) + "\n");
  }
  std::cout << "audit overall " << j["overall"].get<std::string>() << "\n";
  return rep.overall == CheckStatus::Fail ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-horizon HJB solver on stratified multi-domains"};
  app.require_subcommand(1);

  std::string config, mode = "auto", out_dir = "out", at, dump_traj;
  uint64_t seed = 42;
  int depth = 2, slices = 4, levels = 4;
  double eps0 = 0.2;
  bool full_grid = false;
  GridFlags gf;

  auto* solve = app.add_subcommand("solve", "solve the HJB system on a grid");
  solve->add_option("config", config)->required();
  gf.attach(solve);
  solve->add_option("--mode", mode, "auto|continuous|lsc")
      ->check(CLI::IsMember({"auto", "continuous", "lsc"}));
  solve->add_option("--out", out_dir, "output directory");
  solve->add_option("--seed", seed);
  solve->add_flag("--full-grid", full_grid, "write every time slice");

  auto* oracle = app.add_subcommand("oracle", "brute-force value at a point");
  oracle->add_option("config", config)->required();
  oracle->add_option("--at", at, "t,x1[,x2]")->required();
  oracle->add_option("--depth", depth, "control pieces");
  oracle->add_option("--slices", slices, "integration slices per piece");
  oracle->add_option("--controls", gf.controls);
  oracle->add_option("--dump-traj", dump_traj, "CSV path for best trajectory");

  auto* verify = app.add_subcommand("verify", "uniqueness cross-check");
  verify->add_option("config", config)->required();
  gf.attach(verify);
  verify->add_option("--out", out_dir);

  auto* stability = app.add_subcommand("stability", "perturbation ladder");
  stability->add_option("config", config)->required();
  gf.attach(stability);
  stability->add_option("--eps0", eps0);
  stability->add_option("--levels", levels);
  stability->add_option("--out", out_dir);

  auto* audit = app.add_subcommand("audit", "hypothesis audit");
  audit->add_option("config", config)->required();
  audit->add_option("--seed", seed);
  audit->add_option("--out", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed())
      return cmd_solve(config, gf, mode, out_dir, seed, full_grid);
    if (oracle->parsed())
      return cmd_oracle(config, at, depth, slices, gf.controls, dump_traj);
    if (verify->parsed()) return cmd_verify(config, gf, out_dir);
    if (stability->parsed())
      return cmd_stability(config, gf, eps0, levels, out_dir);
    if (audit->parsed()) return cmd_audit(config, seed, out_dir);
  } catch (const ConfigParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
