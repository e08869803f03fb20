#include "stratahjb/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "stratahjb/errors.hpp"

namespace stratahjb {

double ConeDescriptor::distance(const Vec& v) const {
  double s = 0.0;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    double p = 0.0;
    switch (axes[a]) {
      case ConeAxis::Free:
        break;
      case ConeAxis::Zero:
        p = v[a];
        break;
      case ConeAxis::NonNeg:
        p = std::min(v[a], 0.0);
        break;
      case ConeAxis::NonPos:
        p = std::max(v[a], 0.0);
        break;
    }
    s += p * p;
  }
  return std::sqrt(s);
}

int ConeDescriptor::dim() const {
  int n = 0;
  for (ConeAxis c : axes)
    if (c == ConeAxis::Free) ++n;
  return n;
}

Stratification::Stratification(int dimension,
                               std::vector<Hyperplane> hyperplanes,
                               double snap_tolerance)
    : d_(dimension), hyperplanes_(std::move(hyperplanes)),
      snap_tol_(snap_tolerance) {
  if (d_ < 1)
    throw NonPositiveDimensionError("stratification dimension must be >= 1");
  if (snap_tol_ < 0.0) throw Error("snapTolerance must be >= 0");

  const int q = static_cast<int>(hyperplanes_.size());
  for (int h = 0; h < q; ++h) {
    if (hyperplanes_[h].axis < 0 || hyperplanes_[h].axis >= d_)
      throw Error("hyperplane axis out of range");
    for (int g = 0; g < h; ++g)
      if (hyperplanes_[g].axis == hyperplanes_[h].axis &&
          hyperplanes_[g].offset == hyperplanes_[h].offset)
        throw DuplicateHyperplaneError("duplicate hyperplane");
  }

  planes_by_axis_.assign(d_, {});
  for (int h = 0; h < q; ++h) planes_by_axis_[hyperplanes_[h].axis].push_back(h);
  for (auto& planes : planes_by_axis_)
    std::sort(planes.begin(), planes.end(), [&](int a, int b) {
      return hyperplanes_[a].offset < hyperplanes_[b].offset;
    });

  // Enumerate all per-axis regions. Axis with n planes has 2n+1 regions:
  // even index = open interval, odd index = on the corresponding plane.
  std::vector<int> region(d_, 0);
  std::vector<std::vector<int8_t>> signatures;
  while (true) {
    std::vector<int8_t> sig(q, 0);
    for (int a = 0; a < d_; ++a) {
      const auto& planes = planes_by_axis_[a];
      const int r = region[a];
      for (int i = 0; i < static_cast<int>(planes.size()); ++i) {
        int8_t s;
        if (r == 2 * i + 1)
          s = 0;
        else if (r <= 2 * i)
          s = -1;
        else
          s = +1;
        sig[planes[i]] = s;
      }
    }
    signatures.push_back(std::move(sig));
    int a = 0;
    for (; a < d_; ++a) {
      const int limit = 2 * static_cast<int>(planes_by_axis_[a].size());
      if (region[a] < limit) {
        ++region[a];
        break;
      }
      region[a] = 0;
    }
    if (a == d_) break;
  }

  std::sort(signatures.begin(), signatures.end());
  strata_.reserve(signatures.size());
  for (std::size_t i = 0; i < signatures.size(); ++i) {
    Stratum s;
    s.id = static_cast<int>(i);
    s.signature = signatures[i];
    int zeros = 0;
    for (int8_t e : s.signature)
      if (e == 0) ++zeros;
    s.dim = d_ - zeros;
    s.kind = zeros == 0 ? StratumKind::Cell
             : zeros == 1 ? StratumKind::Interface
                          : StratumKind::Intersection;
    id_by_signature_[s.signature] = s.id;
    strata_.push_back(std::move(s));
  }

  zero_planes_.resize(strata_.size());
  for (const Stratum& s : strata_)
    for (int h = 0; h < q; ++h)
      if (s.signature[h] == 0) zero_planes_[s.id].push_back(h);
}

double Stratification::plane_tolerance(int h) const {
  return snap_tol_ * (1.0 + std::abs(hyperplanes_[h].offset));
}

std::vector<int8_t> Stratification::signature_of(const Vec& x) const {
  std::vector<int8_t> sig(hyperplanes_.size(), 0);
  for (int a = 0; a < d_; ++a) {
    const auto& planes = planes_by_axis_[a];
    if (planes.empty()) continue;
    // Snap at most to the nearest plane of this axis.
    int nearest = -1;
    double best = 0.0;
    for (int h : planes) {
      const double dist = std::abs(x[a] - hyperplanes_[h].offset);
      if (nearest < 0 || dist < best) {
        nearest = h;
        best = dist;
      }
    }
    const bool on = best <= plane_tolerance(nearest);
    const double xa = on ? hyperplanes_[nearest].offset : x[a];
    for (int h : planes) {
      if (on && h == nearest)
        sig[h] = 0;
      else
        sig[h] = xa >= hyperplanes_[h].offset ? +1 : -1;
    }
  }
  return sig;
}

int Stratification::locate(const Vec& x) const {
  return stratum_id_of_signature(signature_of(x));
}

int Stratification::stratum_id_of_signature(
    const std::vector<int8_t>& sig) const {
  const auto it = id_by_signature_.find(sig);
  if (it == id_by_signature_.end()) throw Error("signature has no stratum");
  return it->second;
}

bool Stratification::in_closure(const std::vector<int8_t>& inner_sig,
                                const std::vector<int8_t>& outer_sig) const {
  for (std::size_t h = 0; h < inner_sig.size(); ++h)
    if (inner_sig[h] != outer_sig[h] && inner_sig[h] != 0) return false;
  return true;
}

bool Stratification::point_in_closure(const Vec& x, int stratum_id) const {
  return in_closure(signature_of(x), strata_.at(stratum_id).signature);
}

std::vector<int> Stratification::incident_strata(const Vec& x) const {
  const auto sig = signature_of(x);
  std::vector<int> out;
  for (const Stratum& s : strata_)
    if (in_closure(sig, s.signature)) out.push_back(s.id);
  return out;
}

std::vector<int> Stratification::incident_strata_of(int stratum_id) const {
  const auto& sig = strata_.at(stratum_id).signature;
  std::vector<int> out;
  for (const Stratum& s : strata_)
    if (in_closure(sig, s.signature)) out.push_back(s.id);
  return out;
}

ConeDescriptor Stratification::tangent_cone(int stratum_id, const Vec& x,
                                            int closure_of) const {
  const int target = closure_of >= 0 ? closure_of : stratum_id;
  const auto xsig = signature_of(x);
  const auto& tsig = strata_.at(target).signature;
  if (!in_closure(xsig, tsig))
    throw PointNotInClosureError("point is not in the closure of the stratum");

  ConeDescriptor cone;
  cone.axes.assign(d_, ConeAxis::Free);
  for (std::size_t h = 0; h < tsig.size(); ++h) {
    const int a = hyperplanes_[h].axis;
    if (tsig[h] == 0) {
      cone.axes[a] = ConeAxis::Zero;
    } else if (closure_of >= 0 && xsig[h] == 0) {
      // x sits on a plane bounding the target stratum: half-space constraint.
      if (cone.axes[a] == ConeAxis::Free)
        cone.axes[a] = tsig[h] > 0 ? ConeAxis::NonNeg : ConeAxis::NonPos;
    }
  }
  // Without closure_of this is the tangent space: only the Zero constraints.
  if (closure_of < 0)
    for (auto& c : cone.axes)
      if (c != ConeAxis::Zero) c = ConeAxis::Free;
  return cone;
}

Vec Stratification::project_to_stratum(int stratum_id, const Vec& x) const {
  Vec p(x);
  for (int h : zero_planes_[stratum_id])
    p[hyperplanes_[h].axis] = hyperplanes_[h].offset;
  return p;
}

double Stratification::distance_to_stratum(int stratum_id, const Vec& x) const {
  return dist2(x, project_to_stratum(stratum_id, x));
}

Stratification build_stratification(const std::vector<Hyperplane>& hyperplanes,
                                    double snap_tolerance, int dimension) {
  return Stratification(dimension, hyperplanes, snap_tolerance);
}

}  // namespace stratahjb
