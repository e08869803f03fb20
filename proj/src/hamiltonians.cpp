#include "stratahjb/hamiltonians.hpp"

#include <limits>

#include "stratahjb/errors.hpp"

namespace stratahjb {

namespace {
double term(const ControlProblem& P, int sid, const Vec& x, const Vec& p,
            int a) {
  return -dot(p, P.eval_f(sid, x, a)) - P.eval_l(sid, x, a);
}
}  // namespace

double hamiltonian_F(const ControlProblem& P, const Vec& x, const Vec& p) {
  double h = -std::numeric_limits<double>::infinity();
  for (int sid : P.strat().incident_strata(x))
    for (int a = 0; a < P.controls().size(); ++a)
      h = std::max(h, term(P, sid, x, p, a));
  return h;
}

double hamiltonian_E(const ControlProblem& P, const Vec& x, const Vec& p) {
  const ControlFeasibility fe = P.essential_controls(x);
  if (fe.essential.empty())
    throw EmptyEssentialSetError("essential control set empty at query point");
  double h = -std::numeric_limits<double>::infinity();
  for (const auto& [sid, idxs] : fe.essential)
    for (int a : idxs) h = std::max(h, term(P, sid, x, p, a));
  return h;
}

double hamiltonian_Gamma(const ControlProblem& P, int interface_stratum,
                         const Vec& x, const Vec& p) {
  const Stratum& s = P.strat().stratum(interface_stratum);
  if (s.kind == StratumKind::Cell)
    throw NotOnInterfaceError("H_Gamma needs an interface stratum");
  if (P.strat().locate(x) != interface_stratum)
    throw NotOnInterfaceError("query point is not on the interface stratum");
  double h = -std::numeric_limits<double>::infinity();
  for (int a : P.tangential_controls(x))
    h = std::max(h, term(P, interface_stratum, x, p, a));
  return h;
}

}  // namespace stratahjb
