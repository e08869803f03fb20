#ifndef STRATAHJB_GEOMETRY_HPP_
#define STRATAHJB_GEOMETRY_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stratahjb/vec.hpp"

namespace stratahjb {

// Axis-aligned hyperplane {x[axis] == offset} with exterior normal +e_axis.
struct Hyperplane {
  int axis = 0;
  double offset = 0.0;
};

enum class StratumKind { Cell, Interface, Intersection };

// One stratum of the decomposition, identified by its sign signature: one
// entry per hyperplane, -1/+1 for the open side, 0 for "on the plane".
struct Stratum {
  int id = 0;
  std::vector<int8_t> signature;
  int dim = 0;
  StratumKind kind = StratumKind::Cell;
};

// Per-axis constraint of a tangent cone. Cones here are products over axes of
// R, {0}, [0,inf) or (-inf,0], which covers tangent spaces of strata and
// tangent cones of stratum closures at boundary points.
enum class ConeAxis : uint8_t { Free, Zero, NonNeg, NonPos };

struct ConeDescriptor {
  std::vector<ConeAxis> axes;

  // Euclidean distance from v to the cone (closed form per axis).
  double distance(const Vec& v) const;
  bool contains(const Vec& v, double tol) const { return distance(v) <= tol; }
  int dim() const;  // dimension of the largest linear subspace == #Free axes
};

// The cellular decomposition of R^d induced by a finite set of axis-aligned
// hyperplanes. Immutable after construction; all queries are pure.
class Stratification {
 public:
  Stratification(int dimension, std::vector<Hyperplane> hyperplanes,
                 double snap_tolerance = 1e-9);

  int dimension() const { return d_; }
  const std::vector<Hyperplane>& hyperplanes() const { return hyperplanes_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  const Stratum& stratum(int id) const { return strata_.at(id); }
  int num_strata() const { return static_cast<int>(strata_.size()); }
  double snap_tolerance() const { return snap_tol_; }

  // Effective membership band of hyperplane h: snapTolerance * (1 + |offset|).
  double plane_tolerance(int h) const;

  // Signature of the point under the snap rule: per axis, at most the nearest
  // hyperplane is treated as "on".
  std::vector<int8_t> signature_of(const Vec& x) const;
  int locate(const Vec& x) const;
  int stratum_id_of_signature(const std::vector<int8_t>& sig) const;

  // True iff `inner` is contained in the closure of `outer`, i.e. the inner
  // signature is obtained from the outer one by zeroing entries.
  bool in_closure(const std::vector<int8_t>& inner_sig,
                  const std::vector<int8_t>& outer_sig) const;
  bool point_in_closure(const Vec& x, int stratum_id) const;

  // All strata whose closure contains x (always includes locate(x)).
  std::vector<int> incident_strata(const Vec& x) const;
  // Same, keyed by stratum: all S' with `stratum_id` contained in closure(S').
  std::vector<int> incident_strata_of(int stratum_id) const;

  // Tangent space of the stratum at x (constant along the stratum). With
  // `closure_of` set, the tangent cone of closure(closure_of) at x instead.
  ConeDescriptor tangent_cone(int stratum_id, const Vec& x,
                              int closure_of = -1) const;

  // Euclidean projection onto the affine closure of the stratum.
  Vec project_to_stratum(int stratum_id, const Vec& x) const;
  double distance_to_stratum(int stratum_id, const Vec& x) const;

  // Axes on which the stratum lies on some hyperplane, with that plane index.
  const std::vector<int>& zero_planes(int stratum_id) const {
    return zero_planes_[stratum_id];
  }

 private:
  int d_;
  std::vector<Hyperplane> hyperplanes_;
  double snap_tol_;
  std::vector<Stratum> strata_;
  std::vector<std::vector<int>> planes_by_axis_;  // sorted by offset
  std::map<std::vector<int8_t>, int> id_by_signature_;
  std::vector<std::vector<int>> zero_planes_;
};

Stratification build_stratification(const std::vector<Hyperplane>& hyperplanes,
                                    double snap_tolerance, int dimension);

}  // namespace stratahjb

#endif  // STRATAHJB_GEOMETRY_HPP_
