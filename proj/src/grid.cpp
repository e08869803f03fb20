#include "stratahjb/grid.hpp"

#include <algorithm>
#include <cmath>

#include "stratahjb/errors.hpp"

namespace stratahjb {

StratifiedGrid::StratifiedGrid(std::shared_ptr<const Stratification> strat,
                               double box_lo, double box_hi,
                               int nodes_per_axis, int time_steps,
                               double horizon)
    : strat_(std::move(strat)), d_(strat_->dimension()), lo_(box_lo),
      hi_(box_hi), T_(horizon), N_(time_steps) {
  if (d_ > 2) throw Error("grids support d in {1,2}");
  if (nodes_per_axis < 2) throw Error("need at least 2 nodes per axis");
  if (N_ < 1) throw Error("need at least one time step");
  if (!(hi_ > lo_)) throw Error("empty box");
  dt_ = T_ / N_;

  coords_.resize(d_);
  const double base_dx = (hi_ - lo_) / (nodes_per_axis - 1);
  for (int a = 0; a < d_; ++a) {
    auto& c = coords_[a];
    c.resize(nodes_per_axis);
    for (int i = 0; i < nodes_per_axis; ++i) c[i] = lo_ + i * base_dx;
    c.front() = lo_;
    c.back() = hi_;
    // Insert each hyperplane offset as an exact grid plane. A node within
    // dx/3 of the offset is moved instead of inserting, which keeps the
    // adjacent spacing ratio at most 2.
    for (const Hyperplane& h : strat_->hyperplanes()) {
      if (h.axis != a) continue;
      if (h.offset < lo_ || h.offset > hi_) {
        plane_outside_ = true;
        continue;
      }
      auto it = std::lower_bound(c.begin(), c.end(), h.offset);
      if (it != c.end() && *it == h.offset) continue;
      double* nearest = nullptr;
      if (it != c.end()) nearest = &*it;
      if (it != c.begin() &&
          (nearest == nullptr ||
           h.offset - *(it - 1) < *nearest - h.offset))
        nearest = &*(it - 1);
      if (nearest != nullptr && std::abs(*nearest - h.offset) <= base_dx / 3.0 &&
          *nearest != lo_ && *nearest != hi_) {
        *nearest = h.offset;
      } else {
        c.insert(it, h.offset);
      }
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }

  max_dx_ = 0.0;
  min_dx_ = std::numeric_limits<double>::infinity();
  for (int a = 0; a < d_; ++a)
    for (std::size_t i = 0; i + 1 < coords_[a].size(); ++i) {
      const double dx = coords_[a][i + 1] - coords_[a][i];
      max_dx_ = std::max(max_dx_, dx);
      min_dx_ = std::min(min_dx_, dx);
    }

  num_nodes_ = 1;
  for (int a = 0; a < d_; ++a) num_nodes_ *= nodes_on_axis(a);

  // Node classification is exact: plane offsets are grid coordinates.
  node_stratum_.resize(num_nodes_);
  const auto& planes = strat_->hyperplanes();
  for (int i = 0; i < num_nodes_; ++i) {
    const Vec x = node_coords(i);
    std::vector<int8_t> sig(planes.size());
    for (std::size_t h = 0; h < planes.size(); ++h) {
      const double c = x[planes[h].axis];
      sig[h] = c == planes[h].offset ? 0 : (c > planes[h].offset ? +1 : -1);
    }
    node_stratum_[i] = strat_->stratum_id_of_signature(sig);
  }
}

int StratifiedGrid::flat_index(const std::vector<int>& idx) const {
  int f = 0;
  for (int a = d_ - 1; a >= 0; --a) f = f * nodes_on_axis(a) + idx[a];
  return f;
}

std::vector<int> StratifiedGrid::multi_index(int flat) const {
  std::vector<int> idx(d_);
  for (int a = 0; a < d_; ++a) {
    idx[a] = flat % nodes_on_axis(a);
    flat /= nodes_on_axis(a);
  }
  return idx;
}

Vec StratifiedGrid::node_coords(int flat) const {
  const auto idx = multi_index(flat);
  Vec x(d_);
  for (int a = 0; a < d_; ++a) x[a] = coords_[a][idx[a]];
  return x;
}

StratifiedGrid::Stencil StratifiedGrid::stencil_for(const Vec& z) const {
  Stencil st;
  for (int a = 0; a < d_; ++a) {
    const auto& c = coords_[a];
    double za = z[a];
    // Outside the box: one-sided linear extrapolation from the boundary
    // cell, limited to one cell width, and counted as a clamp event.
    if (za < c.front()) {
      st.clamped = true;
      za = std::max(za, c.front() - (c[1] - c[0]));
    } else if (za > c.back()) {
      st.clamped = true;
      const std::size_t n = c.size();
      za = std::min(za, c.back() + (c[n - 1] - c[n - 2]));
    }
    auto it = std::upper_bound(c.begin(), c.end(), za);
    int j = static_cast<int>(it - c.begin()) - 1;
    j = std::clamp(j, 0, static_cast<int>(c.size()) - 2);
    double frac = (za - c[j]) / (c[j + 1] - c[j]);
    // Snap onto grid planes so the stencil never carries weight across an
    // interface; plane offsets are exact coordinates.
    for (const Hyperplane& h : strat_->hyperplanes()) {
      if (h.axis != a) continue;
      if (std::abs(za - h.offset) <= 1e-12 * (1.0 + std::abs(h.offset))) {
        const auto pit = std::lower_bound(c.begin(), c.end(), h.offset);
        if (pit != c.end() && *pit == h.offset) {
          j = std::clamp(static_cast<int>(pit - c.begin()), 0,
                         static_cast<int>(c.size()) - 2);
          frac = j == static_cast<int>(pit - c.begin()) ? 0.0 : 1.0;
        }
      }
    }
    st.base[a] = j;
    st.frac[a] = frac;
  }
  return st;
}

int StratifiedGrid::locate_foot(const Vec& z) const {
  const auto& planes = strat_->hyperplanes();
  std::vector<int8_t> sig(planes.size());
  for (std::size_t h = 0; h < planes.size(); ++h) {
    const double c = z[planes[h].axis];
    const double tol = 1e-12 * (1.0 + std::abs(planes[h].offset));
    sig[h] = std::abs(c - planes[h].offset) <= tol
                 ? 0
                 : (c > planes[h].offset ? +1 : -1);
  }
  return strat_->stratum_id_of_signature(sig);
}

void StratifiedGrid::corner_nodes(const Stencil& st, int out[4]) const {
  if (d_ == 1) {
    out[0] = st.base[0];
    out[1] = st.base[0] + 1;
    out[2] = out[0];
    out[3] = out[1];
    return;
  }
  const int nx = nodes_on_axis(0);
  const int row0 = st.base[1] * nx;
  const int row1 = (st.base[1] + 1) * nx;
  out[0] = row0 + st.base[0];
  out[1] = row0 + st.base[0] + 1;
  out[2] = row1 + st.base[0];
  out[3] = row1 + st.base[0] + 1;
}

StratifiedGrid build_grid(std::shared_ptr<const Stratification> strat,
                          double box_lo, double box_hi, int nodes_per_axis,
                          int time_steps, double horizon) {
  return StratifiedGrid(std::move(strat), box_lo, box_hi, nodes_per_axis,
                        time_steps, horizon);
}

}  // namespace stratahjb
