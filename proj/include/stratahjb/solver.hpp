#ifndef STRATAHJB_SOLVER_HPP_
#define STRATAHJB_SOLVER_HPP_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "stratahjb/control_problem.hpp"
#include "stratahjb/grid.hpp"
#include "stratahjb/parallel.hpp"

namespace stratahjb {

enum class SolveMode { Continuous, LSC };

// Value function on the space-time grid. Continuous mode keeps one value per
// node. LSC mode keeps one value per (node, incident stratum) slot so a node
// on an interface carries its own value plus the one-sided limit from each
// adjacent stratum closure; pointwise queries return the lower envelope.
class ValueGrid {
 public:
  SolveMode mode() const { return mode_; }
  const StratifiedGrid& grid() const { return *grid_; }
  int num_values() const { return num_values_; }
  int num_slots_of(int node) const;
  int slot_index(int node, int stratum) const;  // -1 if absent
  int slot_stratum(int slot) const { return slot_stratum_[slot]; }
  int slot_node(int slot) const { return slot_node_[slot]; }

  const std::vector<double>& layer(int step) const { return values_[step]; }
  std::vector<double>& layer(int step) { return values_[step]; }

  // Pointwise value at a node (lower envelope over slots in LSC mode).
  double node_value(int step, int node) const;

  // Space-time interpolation query; one-sided stencils, linear in time.
  double query(double t, const Vec& x) const;

  // Max |v - reference| over all nodes and time levels, skipping points with
  // kink_distance(t,x) <= band. Pass band < 0 to disable the exclusion.
  double max_error_vs(
      const std::function<double(double, const Vec&)>& reference, double band,
      const std::function<double(double, const Vec&)>& kink_distance) const;

  long long clamp_count = 0;       // foot points clamped into the box
  long long update_count = 0;      // total (value, control) updates
  std::vector<std::string> warnings;

 private:
  friend class Solver;
  SolveMode mode_ = SolveMode::Continuous;
  std::shared_ptr<const StratifiedGrid> grid_;
  std::shared_ptr<const Stratification> strat_;
  int num_values_ = 0;
  std::vector<std::vector<double>> values_;  // [step][value index]
  // Slot layout (LSC): CSR over nodes.
  std::vector<int> node_slot_begin_;
  std::vector<int> slot_node_;
  std::vector<int> slot_stratum_;
};

class Solver {
 public:
  Solver(const ControlProblem& problem,
         std::shared_ptr<const StratifiedGrid> grid,
         Exec exec = default_exec());

  // Backward semi-Lagrangian sweep with the essential admissible set at
  // interface nodes (junction system with H^E).
  ValueGrid solve_continuous();

  // Layered sweep for the lsc bilateral system: cell-closure layers evolve
  // with the cell controls, interface layers with tangential controls plus
  // the infimum over incident higher-dimensional layers at the same node.
  ValueGrid solve_lsc();

 private:
  struct PlanEntry {
    double stage_cost = 0.0;
    double fx = 0.0, fy = 0.0;
    int c[4] = {0, 0, 0, 0};  // value indices of the stencil corners
  };

  ValueGrid run(SolveMode mode);
  void build_value_layout(ValueGrid& V, SolveMode mode) const;
  void fill_terminal(ValueGrid& V, SolveMode mode) const;

  const ControlProblem& P_;
  std::shared_ptr<const StratifiedGrid> G_;
  Exec exec_;
};

ValueGrid solve_continuous(const ControlProblem& P,
                           std::shared_ptr<const StratifiedGrid> grid,
                           Exec exec = default_exec());
ValueGrid solve_lsc(const ControlProblem& P,
                    std::shared_ptr<const StratifiedGrid> grid,
                    Exec exec = default_exec());

// Default CFL-like time step count: dt <= dx / (c_f (1 + |box|)).
int default_time_steps(const ControlProblem& P, double box_lo, double box_hi,
                       int nodes_per_axis);

}  // namespace stratahjb

#endif  // STRATAHJB_SOLVER_HPP_
