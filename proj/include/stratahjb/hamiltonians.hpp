#ifndef STRATAHJB_HAMILTONIANS_HPP_
#define STRATAHJB_HAMILTONIANS_HPP_

#include "stratahjb/control_problem.hpp"
#include "stratahjb/vec.hpp"

namespace stratahjb {

// The three Hamiltonians over the discretized control set.
//
// At a point of a lower-dimensional stratum the dynamics multifunction is
// realized as the union of the continuity extensions of every incident
// stratum piece, which keeps the sampled sups ordered
//   H_Gamma <= H_E <= H_F
// exactly (each is a max over a subset of the same (velocity, cost) terms).

// sup over all controls and all incident pieces of -p.f - l.
double hamiltonian_F(const ControlProblem& P, const Vec& x, const Vec& p);

// sup restricted to the essential controls; each control is evaluated with
// the piece that admitted it.
double hamiltonian_E(const ControlProblem& P, const Vec& x, const Vec& p);

// sup over the tangential controls of the interface's own piece. Returns
// -infinity when the tangential set is empty.
double hamiltonian_Gamma(const ControlProblem& P, int interface_stratum,
                         const Vec& x, const Vec& p);

}  // namespace stratahjb

#endif  // STRATAHJB_HAMILTONIANS_HPP_
