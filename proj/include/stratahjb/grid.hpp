#ifndef STRATAHJB_GRID_HPP_
#define STRATAHJB_GRID_HPP_

#include <memory>
#include <vector>

#include "stratahjb/geometry.hpp"
#include "stratahjb/vec.hpp"

namespace stratahjb {

// Space-time grid aligned with the stratification: every hyperplane offset
// inside the box is an exact grid plane, so interpolation stencils never mix
// nodes across an interface. Supported for d in {1, 2}.
class StratifiedGrid {
 public:
  StratifiedGrid(std::shared_ptr<const Stratification> strat, double box_lo,
                 double box_hi, int nodes_per_axis, int time_steps,
                 double horizon);

  int dim() const { return d_; }
  int time_steps() const { return N_; }
  double dt() const { return dt_; }
  double horizon() const { return T_; }
  double box_lo() const { return lo_; }
  double box_hi() const { return hi_; }
  const Stratification& strat() const { return *strat_; }
  std::shared_ptr<const Stratification> strat_ptr() const { return strat_; }
  bool hyperplane_outside_box() const { return plane_outside_; }

  const std::vector<double>& coords(int axis) const { return coords_[axis]; }
  int nodes_on_axis(int axis) const {
    return static_cast<int>(coords_[axis].size());
  }
  int num_nodes() const { return num_nodes_; }

  int flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(int flat) const;
  Vec node_coords(int flat) const;
  int node_stratum(int flat) const { return node_stratum_[flat]; }

  // Max and min spacing over all axes (the grid is uniform away from
  // inserted planes; adjacent spacing ratio stays <= 2 by construction).
  double max_dx() const { return max_dx_; }
  double min_dx() const { return min_dx_; }

  // Interpolation stencil for a point, with plane-snapping so that a foot on
  // an interface only uses nodes on that interface. Returns false if the
  // point needed clamping into the box.
  struct Stencil {
    int base[2] = {0, 0};   // lower corner index per axis
    double frac[2] = {0.0, 0.0};
    bool clamped = false;
  };
  Stencil stencil_for(const Vec& z) const;

  // Stratum of an off-grid point with a tight absolute snap band (used to
  // classify interpolation foot points).
  int locate_foot(const Vec& z) const;

  // Corner nodes of a stencil in bilinear order (00, 10, 01, 11).
  void corner_nodes(const Stencil& st, int out[4]) const;

 private:
  std::shared_ptr<const Stratification> strat_;
  int d_;
  double lo_, hi_, T_, dt_;
  int N_;
  std::vector<std::vector<double>> coords_;
  std::vector<int> node_stratum_;
  int num_nodes_ = 0;
  double max_dx_ = 0.0, min_dx_ = 0.0;
  bool plane_outside_ = false;
};

StratifiedGrid build_grid(std::shared_ptr<const Stratification> strat,
                          double box_lo, double box_hi, int nodes_per_axis,
                          int time_steps, double horizon);

}  // namespace stratahjb

#endif  // STRATAHJB_GRID_HPP_
