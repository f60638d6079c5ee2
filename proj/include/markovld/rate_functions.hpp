#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "markovld/chain.hpp"
#include "markovld/extended_real.hpp"
#include "markovld/trajectory.hpp"

namespace markovld {

struct SolverDiagnostics {
  std::size_t iterations = 0;
  /// KKT stationarity of the final iterate (barrier-scaled gradient norm).
  double stationarity = 0.0;
  bool converged = true;
  std::string method = "closed-form";
};

struct RateEvaluation {
  ExtendedReal value;
  std::optional<ProbabilityMeasure> optimal_mu;
  std::optional<Flow> optimal_flow;
  std::optional<Current> optimal_current;
  SolverDiagnostics diagnostics;
};

/// Phi(q, p) = q log(q/p) - (q - p), with Phi(0, p) = p and Phi(q, 0) = +inf
/// for q > 0. Throws NegativeArgument.
ExtendedReal phi(double q, double p);

/// Psi(u, ubar, a) = u [asinh(u/a) - asinh(ubar/a)] - [sqrt(a^2+u^2) - sqrt(a^2+ubar^2)]
/// for a > 0 and Phi(u, ubar) for a = 0. Throws DomainError for a = 0 with a
/// negative argument and NegativeArgument for a < 0.
ExtendedReal psi(double u, double ubar, double a);

/// I(mu, Q): +inf unless div Q = 0, else sum_E Phi(Q, mu r).
RateEvaluation flow_rate_I(const Chain& chain, const ProbabilityMeasure& mu, const Flow& q);

/// Q^{J,mu}(y,z) = [J + sqrt(J^2 + 4 mu(y) mu(z) r(y,z) r(z,y))] / 2.
/// Throws NegativeCurrentOnOneWayEdge.
Flow optimal_flow_QJmu(const Chain& chain, const ProbabilityMeasure& mu, const Current& j);

enum class CurrentFormula { Rff, RffBis };

/// Itilde(mu, J), either as I(mu, Q^{J,mu}) or as the Psi sum.
RateEvaluation current_rate_Itilde(const Chain& chain, const ProbabilityMeasure& mu, const Current& j,
                                   CurrentFormula formula = CurrentFormula::Rff);

/// Itilde(mu, J) - Itilde(mu, -J) + 1/2 <J, w_pi>; 0 when both rates are
/// infinite, +inf when exactly one is. Requires E = E_s.
double check_gc_symmetry(const Chain& chain, const ProbabilityMeasure& mu, const Current& j);

/// Ihat(J) = inf over mu of Itilde(mu, J). Throws InfeasibleCurrent.
RateEvaluation current_rate_contracted(const Chain& chain, const Current& j);

/// iota(u) = inf { Itilde(mu, J) : div J = 0, 1/2 <J, w_pi> = u }. Requires
/// E = E_s; throws InfeasibleLevel for u != 0 on a reversible chain.
RateEvaluation gc_rate_iota(const Chain& chain, double u);

/// inf { I(mu, Q) : <mu, state_weights> + <Q, edge_weights> = level }.
/// Throws InfeasibleLevel outside the attainable range.
RateEvaluation scalar_contraction(const Chain& chain, const ObservableSpec& obs, double level);

}  // namespace markovld
