#include "stratahjb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "stratahjb/errors.hpp"

namespace stratahjb {

namespace {

std::shared_ptr<const Stratification> one_plane(int d) {
  return std::make_shared<Stratification>(d,
                                          std::vector<Hyperplane>{{0, 0.0}});
}

std::shared_ptr<ControlProblem> make_exampleA(int count) {
  auto strat = one_plane(2);
  auto controls = ControlSet::interval(-1.0, 1.0, count > 0 ? count : 21);
  // Strata sorted by signature: (-1)=0, (0)=1, (+1)=2.
  std::vector<VelocityPiece> vel(3);
  vel[0] = VelocityPiece::constant({-1.0, 0.0}, 1);
  vel[2] = VelocityPiece::constant({1.0, 0.0}, 1);
  VelocityPiece gamma;
  gamma.b = {0.0, 0.0};
  gamma.S = {{1.0}, {0.0}};  // f(x,u) = (u, 0)
  vel[1] = gamma;
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::AbsX1;
  return std::make_shared<ControlProblem>(
      strat, controls, vel, cost, phi, RegularityMode::Lipschitz, 1.0, 1.0,
      1.0, 1.0, 1.0, "exampleA");
}

std::shared_ptr<ControlProblem> make_exampleB(int /*count*/) {
  auto strat = one_plane(1);
  auto controls = ControlSet::finite({{1.0}});
  std::vector<VelocityPiece> vel(3, VelocityPiece::constant({1.0}, 1));
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::IndicatorPositiveX1;
  return std::make_shared<ControlProblem>(
      strat, controls, vel, cost, phi, RegularityMode::LSC, 1.0, 1.0, 1.0,
      1.0, 1.0, "exampleB");
}

std::shared_ptr<ControlProblem> make_exampleE(int count) {
  auto strat = one_plane(2);
  auto controls = ControlSet::ball(1.0, count > 0 ? count : 32, 2);
  std::vector<VelocityPiece> vel(3);
  vel[0] = VelocityPiece::scaled_ball(1.0, 2);
  vel[1] = VelocityPiece::scaled_ball(1.0, 2);
  vel[2] = VelocityPiece::scaled_ball(2.0, 2);
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::LinearX1;
  return std::make_shared<ControlProblem>(
      strat, controls, vel, cost, phi, RegularityMode::Lipschitz, 2.0, 1.0,
      1.0, 1.0, 1.0, "exampleE");
}

std::shared_ptr<ControlProblem> make_exampleF(int count) {
  auto strat = one_plane(1);
  auto controls = ControlSet::interval(-1.0, 1.0, count > 0 ? count : 21);
  VelocityPiece p;
  p.b = {0.0};
  p.S = {{1.0}};  // f(x,u) = u
  std::vector<VelocityPiece> vel(3, p);
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::IndicatorPositiveX1;
  return std::make_shared<ControlProblem>(
      strat, controls, vel, cost, phi, RegularityMode::LSC, 1.0, 1.0, 1.0,
      1.0, 1.0, "exampleF");
}

std::shared_ptr<ControlProblem> make_ball_eikonal(int count) {
  auto strat = one_plane(2);
  auto controls = ControlSet::ball(1.0, count > 0 ? count : 32, 2);
  std::vector<VelocityPiece> vel(3, VelocityPiece::scaled_ball(1.0, 2));
  std::vector<CostPiece> cost(3, CostPiece::constant(0.0));
  TerminalCost phi;
  phi.kind = TerminalKind::AbsX1;
  return std::make_shared<ControlProblem>(
      strat, controls, vel, cost, phi, RegularityMode::Lipschitz, 1.0, 1.0,
      1.0, 1.0, 1.0, "ball-eikonal");
}

}  // namespace

bool is_builtin_problem(const std::string& name) {
  return name == "exampleA" || name == "exampleB" || name == "exampleE" ||
         name == "exampleF" || name == "ball-eikonal";
}

std::shared_ptr<ControlProblem> builtin_problem(const std::string& name,
                                                int control_count) {
  if (name == "exampleA") return make_exampleA(control_count);
  if (name == "exampleB") return make_exampleB(control_count);
  if (name == "exampleE") return make_exampleE(control_count);
  if (name == "exampleF") return make_exampleF(control_count);
  if (name == "ball-eikonal") return make_ball_eikonal(control_count);
  throw ConfigParseError("unknown builtin problem: " + name);
}

namespace {

struct Section {
  std::string name;
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) > 0; }
  std::string str(const std::string& k) const {
    const auto it = kv.find(k);
    if (it == kv.end())
      throw ConfigParseError("missing key '" + k + "' in [" + name + "]");
    return it->second;
  }
  double num(const std::string& k) const {
    try {
      return std::stod(str(k));
    } catch (const std::exception&) {
      throw ConfigParseError("bad number for '" + k + "' in [" + name + "]");
    }
  }
  int integer(const std::string& k) const {
    return static_cast<int>(std::llround(num(k)));
  }
};

std::vector<Section> parse_sections(const std::string& text) {
  std::vector<Section> sections;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigParseError("malformed section: " + line);
      sections.push_back({line.substr(1, line.size() - 2), {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigParseError("expected key = value: " + line);
    if (sections.empty()) throw ConfigParseError("key before any section");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t");
      s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
    };
    trim(key);
    trim(val);
    sections.back().kv[key] = val;
  }
  return sections;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

VelocityPiece parse_velocity(const Section& s, int d, int n) {
  const std::string family = s.str("velocity");
  if (family == "constant") {
    const auto v = parse_list(s.str("vector"));
    if (static_cast<int>(v.size()) != d)
      throw ConfigParseError("constant velocity vector has wrong dimension");
    return VelocityPiece::constant(v, n);
  }
  if (family == "scaled-ball") {
    if (n != d)
      throw ConfigParseError("scaled-ball velocity needs control dim == d");
    return VelocityPiece::scaled_ball(s.num("scale"), d);
  }
  if (family == "affine") {
    VelocityPiece p;
    p.b = s.has("vector") ? parse_list(s.str("vector")) : Vec(d, 0.0);
    const double scale = s.has("scale") ? s.num("scale") : 0.0;
    if (scale != 0.0) {
      if (n != d) throw ConfigParseError("affine control scale needs n == d");
      p.S.assign(d, Vec(n, 0.0));
      for (int i = 0; i < d; ++i) p.S[i][i] = scale;
    }
    if (s.has("matrix")) {
      const auto m = parse_list(s.str("matrix"));
      if (static_cast<int>(m.size()) != d * d)
        throw ConfigParseError("affine matrix needs d*d entries");
      p.A.assign(d, Vec(d));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) p.A[i][j] = m[i * d + j];
    }
    if (static_cast<int>(p.b.size()) != d)
      throw ConfigParseError("affine velocity vector has wrong dimension");
    return p;
  }
  throw ConfigParseError("unknown velocity family: " + family);
}

CostPiece parse_cost(const Section& s) {
  const std::string family = s.has("cost") ? s.str("cost") : "constant";
  if (family == "constant")
    return CostPiece::constant(s.has("value") ? s.num("value") : 0.0);
  if (family == "polynomial")
    return CostPiece{parse_list(s.str("coeffs"))};
  throw ConfigParseError("unknown cost family: " + family);
}

}  // namespace

std::shared_ptr<ControlProblem> parse_problem_config(const std::string& text,
                                                     int control_count) {
  const auto sections = parse_sections(text);
  const Section* problem = nullptr;
  const Section* controls = nullptr;
  const Section* terminal = nullptr;
  std::vector<const Section*> hyperplanes, strata;
  for (const auto& s : sections) {
    if (s.name == "problem") problem = &s;
    else if (s.name == "controls") controls = &s;
    else if (s.name == "terminal") terminal = &s;
    else if (s.name == "hyperplane") hyperplanes.push_back(&s);
    else if (s.name == "stratum") strata.push_back(&s);
    else if (s.name != "grid")
      throw ConfigParseError("unknown section [" + s.name + "]");
  }
  if (problem == nullptr) throw ConfigParseError("missing [problem] section");

  if (problem->has("name") && is_builtin_problem(problem->str("name")) &&
      hyperplanes.empty() && strata.empty())
    return builtin_problem(problem->str("name"), control_count);

  const int d = problem->integer("dimension");
  std::vector<Hyperplane> planes;
  for (const Section* h : hyperplanes)
    planes.push_back({h->integer("axis"), h->num("offset")});
  const double snap = problem->has("snap_tolerance")
                          ? problem->num("snap_tolerance")
                          : 1e-9;
  auto strat = std::make_shared<Stratification>(d, planes, snap);

  if (controls == nullptr) throw ConfigParseError("missing [controls] section");
  ControlSet cs;
  const std::string family = controls->str("family");
  const int count = control_count > 0 ? control_count
                    : controls->has("count") ? controls->integer("count")
                                             : 21;
  if (family == "ball")
    cs = ControlSet::ball(controls->num("radius"), count, d);
  else if (family == "interval")
    cs = ControlSet::interval(controls->num("lo"), controls->num("hi"), count);
  else if (family == "finite") {
    std::vector<Vec> samples;
    const auto flat = parse_list(controls->str("samples"));
    const int n = controls->has("control_dim") ? controls->integer("control_dim") : 1;
    if (flat.size() % n != 0)
      throw ConfigParseError("finite samples length not divisible by control_dim");
    for (std::size_t i = 0; i < flat.size(); i += n)
      samples.push_back(Vec(flat.begin() + i, flat.begin() + i + n));
    cs = ControlSet::finite(samples);
  } else {
    throw ConfigParseError("unknown control family: " + family);
  }
  const int n = cs.control_dim();

  std::vector<VelocityPiece> vel(strat->num_strata());
  std::vector<CostPiece> cost(strat->num_strata(), CostPiece::constant(0.0));
  std::vector<bool> have(strat->num_strata(), false);
  for (const Section* s : strata) {
    const auto sigs = parse_list(s->str("signature"));
    std::vector<int8_t> sig;
    for (double v : sigs) sig.push_back(static_cast<int8_t>(v));
    const int id = strat->stratum_id_of_signature(sig);
    vel[id] = parse_velocity(*s, d, n);
    cost[id] = parse_cost(*s);
    have[id] = true;
  }
  // A [stratum] with signature "default" would be ambiguous; instead an
  // omitted stratum is an error so configs stay explicit.
  for (int i = 0; i < strat->num_strata(); ++i)
    if (!have[i])
      throw ConfigParseError("no [stratum] section for stratum id " +
                             std::to_string(i));

  if (terminal == nullptr) throw ConfigParseError("missing [terminal] section");
  TerminalCost phi;
  const std::string kind = terminal->str("kind");
  if (kind == "abs-x1") phi.kind = TerminalKind::AbsX1;
  else if (kind == "linear-x1") phi.kind = TerminalKind::LinearX1;
  else if (kind == "indicator-positive-x1")
    phi.kind = TerminalKind::IndicatorPositiveX1;
  else if (kind == "table") {
    phi.kind = TerminalKind::Table;
    phi.xs = parse_list(terminal->str("xs"));
    phi.vals = parse_list(terminal->str("vals"));
    if (phi.xs.size() != phi.vals.size() || phi.xs.size() < 2)
      throw ConfigParseError("terminal table needs matching xs/vals lists");
  } else {
    throw ConfigParseError("unknown terminal kind: " + kind);
  }
  const std::string mode =
      terminal->has("mode") ? terminal->str("mode") : "lipschitz";
  const RegularityMode rmode = mode == "lsc" ? RegularityMode::LSC
                               : mode == "lipschitz"
                                   ? RegularityMode::Lipschitz
                                   : throw ConfigParseError("unknown terminal mode");

  return std::make_shared<ControlProblem>(
      strat, cs, vel, cost, phi, rmode, problem->num("cf"),
      problem->num("cl"), problem->num("lambda_l"), problem->num("lambda_phi"),
      problem->num("horizon"),
      problem->has("name") ? problem->str("name") : "custom");
}

std::shared_ptr<ControlProblem> load_problem_config(const std::string& path,
                                                    int control_count) {
  std::ifstream in(path);
  if (!in) throw ConfigParseError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_problem_config(ss.str(), control_count);
}

std::optional<ClosedForm> closed_form_for(const std::string& name,
                                          double T) {
  if (name == "exampleE") {
    ClosedForm cf;
    cf.value = [T](double t, const Vec& x) {
      const double x1 = x[0], r = T - t;
      if (x1 >= 2.0 * r) return x1 - 2.0 * r;
      if (x1 >= 0.0) return 0.5 * x1 - r;
      return x1 - r;
    };
    cf.kink_distance = [T](double t, const Vec& x) {
      const double r = T - t;
      return std::min(std::abs(x[0]), std::abs(x[0] - 2.0 * r));
    };
    return cf;
  }
  if (name == "exampleA") {
    ClosedForm cf;
    cf.value = [T](double t, const Vec& x) {
      return T - t + std::abs(x[0]);
    };
    cf.kink_distance = [](double, const Vec& x) { return std::abs(x[0]); };
    return cf;
  }
  if (name == "exampleB") {
    ClosedForm cf;
    cf.value = [T](double t, const Vec& x) {
      return x[0] + (T - t) > 0.0 ? 1.0 : 0.0;
    };
    cf.kink_distance = [T](double t, const Vec& x) {
      return std::abs(x[0] + (T - t));
    };
    return cf;
  }
  if (name == "exampleF") {
    ClosedForm cf;
    cf.value = [T](double t, const Vec& x) {
      return x[0] > T - t ? 1.0 : 0.0;
    };
    cf.kink_distance = [T](double t, const Vec& x) {
      return std::abs(x[0] - (T - t));
    };
    return cf;
  }
  if (name == "ball-eikonal") {
    ClosedForm cf;
    cf.value = [T](double t, const Vec& x) {
      return std::max(std::abs(x[0]) - (T - t), 0.0);
    };
    cf.kink_distance = [T](double t, const Vec& x) {
      return std::abs(std::abs(x[0]) - (T - t));
    };
    return cf;
  }
  return std::nullopt;
}

}  // namespace stratahjb
