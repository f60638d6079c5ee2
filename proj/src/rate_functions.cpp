#include "markovld/rate_functions.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "markovld/convex_solver.hpp"
#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"

namespace markovld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_d(double q, double p) {
  if (q == 0.0) return p;
  if (p == 0.0) return kInf;
  return q * std::log(q / p) - (q - p);
}

ExtendedReal to_extended(double v) { return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::infinity(); }

void require_measure(const Chain& chain, const ProbabilityMeasure& mu) {
  if (mu.size() != chain.num_states()) throw Error(ErrorCode::InvalidArgument, "measure size does not match chain");
}

/// Current along the directed edge that exists on a one-way unordered edge.
double along_existing(const UndirectedEdge& ue, double j_lo_hi) { return ue.forward != npos ? j_lo_hi : -j_lo_hi; }

bool current_feasible(const Chain& chain, const Current& j) {
  if (!divergence_free(divergence(chain, j), j.l1_half())) return false;
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    const auto& ue = chain.undirected(u);
    if (!ue.two_way() && along_existing(ue, j.values[u]) < 0.0) return false;
  }
  return true;
}

struct EdgePair {
  double qf, qb, s, log_ratio;  // log_ratio = log(qf / p) = dg/dj
};

// Optimal lift on a two-way edge with p = mu_lo r_f, pb = mu_hi r_b (both > 0).
EdgePair lift(double j, double p, double pb) {
  double prod = p * pb;
  double s = std::sqrt(j * j + 4.0 * prod);
  EdgePair e{};
  e.s = s;
  if (j >= 0.0) {
    e.qf = 0.5 * (j + s);
    e.qb = prod / e.qf;
    e.log_ratio = std::log(e.qf / p);
  } else {
    e.qb = 0.5 * (s - j);
    e.qf = prod / e.qb;
    e.log_ratio = -std::log(e.qb / pb);
  }
  return e;
}

// Itilde(mu, J) for strictly positive mu and a feasible J, with the
// derivatives in (mu, J-per-unordered-edge).
struct ItildeDerivs {
  double value = 0.0;
  Eigen::VectorXd g_mu, g_j;
  Eigen::MatrixXd h_mumu, h_muj, h_jj;  // h_jj is diagonal
};

ItildeDerivs itilde_smooth(const Chain& chain, const Eigen::VectorXd& mu, const Eigen::VectorXd& j, bool want_derivs) {
  const Eigen::Index n = static_cast<Eigen::Index>(chain.num_states());
  const Eigen::Index U = static_cast<Eigen::Index>(chain.num_undirected());
  ItildeDerivs out;
  if (want_derivs) {
    out.g_mu = Eigen::VectorXd::Zero(n);
    out.g_j = Eigen::VectorXd::Zero(U);
    out.h_mumu = Eigen::MatrixXd::Zero(n, n);
    out.h_muj = Eigen::MatrixXd::Zero(n, U);
    out.h_jj = Eigen::MatrixXd::Zero(U, U);
  }
  for (Eigen::Index u = 0; u < U; ++u) {
    const auto& ue = chain.undirected(static_cast<std::size_t>(u));
    const Eigen::Index lo = static_cast<Eigen::Index>(ue.lo), hi = static_cast<Eigen::Index>(ue.hi);
    if (ue.two_way()) {
      double rf = chain.edge(ue.forward).rate, rb = chain.edge(ue.backward).rate;
      double p = mu(lo) * rf, pb = mu(hi) * rb;
      EdgePair e = lift(j(u), p, pb);
      out.value += j(u) * e.log_ratio - e.s + p + pb;
      if (!want_derivs) continue;
      out.g_mu(lo) += rf - e.qf / mu(lo);
      out.g_mu(hi) += rb - e.qb / mu(hi);
      out.g_j(u) += e.log_ratio;
      double vlo = -e.qf / mu(lo), vhi = e.qb / mu(hi);
      out.h_mumu(lo, lo) += vlo * vlo / e.s;
      out.h_mumu(hi, hi) += vhi * vhi / e.s;
      out.h_mumu(lo, hi) += vlo * vhi / e.s;
      out.h_mumu(hi, lo) += vlo * vhi / e.s;
      out.h_muj(lo, u) += vlo / e.s;
      out.h_muj(hi, u) += vhi / e.s;
      out.h_jj(u, u) += 1.0 / e.s;
    } else {
      std::size_t ed = ue.forward != npos ? ue.forward : ue.backward;
      const Eigen::Index y = static_cast<Eigen::Index>(chain.edge(ed).from);
      double r = chain.edge(ed).rate;
      double c = along_existing(ue, j(u));
      double p = mu(y) * r;
      out.value += phi_d(c, p);
      if (!want_derivs) continue;
      out.g_mu(y) += r - c / mu(y);
      if (c > 0.0) {
        double sign = ue.forward != npos ? 1.0 : -1.0;
        out.g_j(u) += sign * std::log(c / p);
        out.h_mumu(y, y) += c / (mu(y) * mu(y));
        out.h_muj(y, u) += -sign / mu(y);
        out.h_jj(u, u) += 1.0 / c;
      }
    }
  }
  return out;
}

Eigen::VectorXd to_eigen(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

ProbabilityMeasure measure_from(const Eigen::VectorXd& mu) {
  std::vector<double> w = to_std(mu);
  for (double& x : w) x = std::max(x, 0.0);
  return ProbabilityMeasure::normalized(std::move(w));
}

SolverDiagnostics diagnostics_of(const SolverResult& r) {
  SolverDiagnostics d;
  d.iterations = r.iterations;
  d.stationarity = r.stationarity;
  d.converged = r.converged;
  d.method = "barrier-newton";
  return d;
}

}  // namespace

ExtendedReal phi(double q, double p) {
  if (!(q >= 0.0) || !(p >= 0.0)) throw Error(ErrorCode::NegativeArgument, "phi requires q, p >= 0");
  return to_extended(phi_d(q, p));
}

ExtendedReal psi(double u, double ubar, double a) {
  if (!(a >= 0.0)) throw Error(ErrorCode::NegativeArgument, "psi requires a >= 0");
  if (a == 0.0) {
    if (u < 0.0 || ubar < 0.0) throw Error(ErrorCode::DomainError, "psi with a = 0 requires u, ubar >= 0");
    return phi(u, ubar);
  }
  double v = u * (std::asinh(u / a) - std::asinh(ubar / a)) - (std::hypot(a, u) - std::hypot(a, ubar));
  return ExtendedReal(std::max(v, 0.0));
}

RateEvaluation flow_rate_I(const Chain& chain, const ProbabilityMeasure& mu, const Flow& q) {
  require_measure(chain, mu);
  q.validate(chain);
  RateEvaluation r;
  if (!divergence_free(divergence(chain, q), q.l1_norm())) {
    r.value = ExtendedReal::infinity();
    return r;
  }
  ExtendedReal total(0.0);
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    total += phi(q.values[e], mu[chain.edge(e).from] * chain.edge(e).rate);
  }
  r.value = total;
  return r;
}

Flow optimal_flow_QJmu(const Chain& chain, const ProbabilityMeasure& mu, const Current& j) {
  require_measure(chain, mu);
  j.validate(chain);
  Flow q = Flow::zero(chain);
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    const auto& ue = chain.undirected(u);
    double ju = j.values[u];
    if (!ue.two_way()) {
      double c = along_existing(ue, ju);
      if (c < 0.0) {
        throw Error(ErrorCode::NegativeCurrentOnOneWayEdge, "negative current on one-way edge " + chain.label(ue.lo) +
                                                                "-" + chain.label(ue.hi));
      }
      q.values[ue.forward != npos ? ue.forward : ue.backward] = c;
      continue;
    }
    double prod = mu[ue.lo] * chain.edge(ue.forward).rate * mu[ue.hi] * chain.edge(ue.backward).rate;
    double s = std::sqrt(ju * ju + 4.0 * prod);
    double qf, qb;
    if (ju >= 0.0) {
      qf = 0.5 * (ju + s);
      qb = qf > 0.0 ? prod / qf : 0.0;
    } else {
      qb = 0.5 * (s - ju);
      qf = prod / qb;
    }
    q.values[ue.forward] = qf;
    q.values[ue.backward] = qb;
  }
  return q;
}

RateEvaluation current_rate_Itilde(const Chain& chain, const ProbabilityMeasure& mu, const Current& j,
                                   CurrentFormula formula) {
  require_measure(chain, mu);
  j.validate(chain);
  RateEvaluation r;
  if (!current_feasible(chain, j)) {
    r.value = ExtendedReal::infinity();
    return r;
  }
  ExtendedReal total(0.0);
  if (formula == CurrentFormula::Rff) {
    Flow q = optimal_flow_QJmu(chain, mu, j);
    for (std::size_t e = 0; e < chain.num_edges(); ++e) {
      total += phi(q.values[e], mu[chain.edge(e).from] * chain.edge(e).rate);
    }
    r.optimal_flow = std::move(q);
  } else {
    for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
      const auto& ue = chain.undirected(u);
      if (!ue.two_way()) {
        std::size_t e = ue.forward != npos ? ue.forward : ue.backward;
        total += psi(along_existing(ue, j.values[u]), mu[chain.edge(e).from] * chain.edge(e).rate, 0.0);
        continue;
      }
      double pf = mu[ue.lo] * chain.edge(ue.forward).rate, pb = mu[ue.hi] * chain.edge(ue.backward).rate;
      double ubar = pf - pb;
      double a = 2.0 * std::sqrt(pf * pb);
      double uu = j.values[u];
      if (a > 0.0) {
        total += psi(uu, ubar, a);
      } else if (uu * ubar < 0.0) {
        total += ExtendedReal::infinity();
      } else {
        total += phi(std::abs(uu), std::abs(ubar));
      }
    }
  }
  r.value = total;
  return r;
}

double check_gc_symmetry(const Chain& chain, const ProbabilityMeasure& mu, const Current& j) {
  chain.require_symmetric("check_gc_symmetry");
  auto w = w_pi(chain, invariant_measure(chain));
  ExtendedReal plus = current_rate_Itilde(chain, mu, j).value;
  ExtendedReal minus = current_rate_Itilde(chain, mu, -j).value;
  if (!plus.is_finite() && !minus.is_finite()) return 0.0;
  if (!plus.is_finite() || !minus.is_finite()) return kInf;
  double half = 0.0;
  for (std::size_t u = 0; u < j.values.size(); ++u) half += j.values[u] * w.values[u];
  return plus.value() - minus.value() + half;
}

RateEvaluation current_rate_contracted(const Chain& chain, const Current& j) {
  j.validate(chain);
  if (!current_feasible(chain, j)) {
    throw Error(ErrorCode::InfeasibleCurrent, "current must be divergence free and nonnegative on one-way edges");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(chain.num_states());
  const Eigen::VectorXd jv = to_eigen(j.values);
  ConvexProblem prob;
  prob.dim = chain.num_states();
  prob.positive.assign(prob.dim, true);
  prob.A = Eigen::MatrixXd::Ones(1, n);
  prob.b = Eigen::VectorXd::Ones(1);
  prob.value = [&](const Eigen::VectorXd& mu) { return itilde_smooth(chain, mu, jv, false).value; };
  prob.derivatives = [&](const Eigen::VectorXd& mu, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    auto d = itilde_smooth(chain, mu, jv, true);
    g = d.g_mu;
    h = d.h_mumu;
  };
  SolverResult res = solve_convex(prob, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));

  RateEvaluation r;
  ProbabilityMeasure mu = measure_from(res.x);
  RateEvaluation exact = current_rate_Itilde(chain, mu, j);
  r.value = exact.value;
  r.optimal_flow = std::move(exact.optimal_flow);
  r.optimal_mu = std::move(mu);
  r.optimal_current = j;
  r.diagnostics = diagnostics_of(res);
  return r;
}

RateEvaluation gc_rate_iota(const Chain& chain, double u) {
  chain.require_symmetric("gc_rate_iota");
  if (!std::isfinite(u)) throw Error(ErrorCode::InvalidArgument, "level must be finite");
  ProbabilityMeasure pi = invariant_measure(chain);
  FundamentalBasis basis(chain, StateIndex{0});
  const std::size_t K = basis.size();
  const Eigen::Index n = static_cast<Eigen::Index>(chain.num_states());
  const Eigen::Index k = static_cast<Eigen::Index>(K);
  const Eigen::Index U = static_cast<Eigen::Index>(chain.num_undirected());

  Eigen::VectorXd aff(k);
  double aff_scale = 0.0;
  for (std::size_t c = 0; c < K; ++c) {
    aff(static_cast<Eigen::Index>(c)) = affinity(chain, basis.cycle(c), pi).value();
    aff_scale = std::max(aff_scale, std::abs(aff(static_cast<Eigen::Index>(c))));
  }
  if (aff_scale <= 1e-14) {
    if (u != 0.0) throw Error(ErrorCode::InfeasibleLevel, "reversible chain: only u = 0 is attainable");
    RateEvaluation r;
    r.value = ExtendedReal(0.0);
    r.optimal_mu = pi;
    r.optimal_current = Current::zero(chain);
    r.optimal_flow = reference_flow(chain, pi);
    return r;
  }

  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(U, k);
  for (std::size_t c = 0; c < K; ++c) {
    auto s = edge_counts(chain, basis.cycle(c));
    for (Eigen::Index e = 0; e < U; ++e) B(e, static_cast<Eigen::Index>(c)) = static_cast<double>(s[static_cast<std::size_t>(e)]);
  }

  ConvexProblem prob;
  prob.dim = static_cast<std::size_t>(n + k);
  prob.positive.assign(prob.dim, false);
  for (Eigen::Index i = 0; i < n; ++i) prob.positive[static_cast<std::size_t>(i)] = true;
  prob.A = Eigen::MatrixXd::Zero(2, n + k);
  prob.A.row(0).head(n).setOnes();
  prob.A.row(1).tail(k) = aff.transpose();
  prob.b = Eigen::Vector2d(1.0, u);
  prob.value = [&](const Eigen::VectorXd& x) {
    return itilde_smooth(chain, x.head(n), B * x.tail(k), false).value;
  };
  prob.derivatives = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    auto d = itilde_smooth(chain, x.head(n), B * x.tail(k), true);
    g.resize(n + k);
    g.head(n) = d.g_mu;
    g.tail(k) = B.transpose() * d.g_j;
    h.resize(n + k, n + k);
    h.topLeftCorner(n, n) = d.h_mumu;
    h.topRightCorner(n, k) = d.h_muj * B;
    h.bottomLeftCorner(k, n) = (d.h_muj * B).transpose();
    h.bottomRightCorner(k, k) = B.transpose() * d.h_jj * B;
  };

  Eigen::VectorXd x0(n + k);
  x0.head(n) = to_eigen(pi.mass());
  Current jpi = reference_current(chain, pi);
  for (std::size_t c = 0; c < K; ++c) x0(n + static_cast<Eigen::Index>(c)) = jpi.values[basis.chords()[c].undirected];
  SolverResult res = solve_convex(prob, x0);

  RateEvaluation r;
  ProbabilityMeasure mu = measure_from(res.x.head(n));
  Current j = assemble_current(chain, basis, to_std(res.x.tail(k)));
  RateEvaluation exact = current_rate_Itilde(chain, mu, j);
  r.value = exact.value;
  r.optimal_flow = std::move(exact.optimal_flow);
  r.optimal_mu = std::move(mu);
  r.optimal_current = std::move(j);
  r.diagnostics = diagnostics_of(res);
  return r;
}

namespace {

// Bellman-Ford from a virtual source joined to every state with weight 0.
// Returns false on a negative cycle; otherwise fills shortest distances.
bool shortest_potentials(const Chain& chain, const std::vector<double>& w, std::vector<double>& dist) {
  const std::size_t n = chain.num_states();
  dist.assign(n, 0.0);
  double scale = 1.0;
  for (double x : w) scale = std::max(scale, std::abs(x));
  const double eps = 1e-12 * scale;
  for (std::size_t round = 0; round <= n; ++round) {
    bool changed = false;
    for (std::size_t e = 0; e < chain.num_edges(); ++e) {
      const auto& ed = chain.edge(e);
      if (dist[ed.from] + w[e] < dist[ed.to] - eps) {
        dist[ed.to] = dist[ed.from] + w[e];
        changed = true;
      }
    }
    if (!changed) return true;
  }
  return false;
}

// Edges of `keep` lying on a cycle inside the subgraph they span.
std::vector<bool> cyclic_edges(const Chain& chain, const std::vector<bool>& keep) {
  const std::size_t n = chain.num_states();
  // reachability closure in the kept subgraph; n is small here
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    if (keep[e]) reach[chain.edge(e).from][chain.edge(e).to] = true;
  }
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!reach[i][m]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (reach[m][j]) reach[i][j] = true;
      }
    }
  }
  std::vector<bool> out(chain.num_edges(), false);
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    out[e] = keep[e] && reach[chain.edge(e).to][chain.edge(e).from];
  }
  return out;
}

}  // namespace

RateEvaluation scalar_contraction(const Chain& chain, const ObservableSpec& obs, double level) {
  obs.validate(chain);
  if (!std::isfinite(level)) throw Error(ErrorCode::InvalidArgument, "level must be finite");
  const std::size_t n = chain.num_states(), m = chain.num_edges();
  std::vector<double> sw(n), ew(m);
  for (std::size_t x = 0; x < n; ++x) sw[x] = obs.state_weight(x);
  for (std::size_t e = 0; e < m; ++e) ew[e] = obs.edge_weight(e);

  double sw_min = *std::min_element(sw.begin(), sw.end());
  double sw_max = *std::max_element(sw.begin(), sw.end());
  std::vector<double> dist_low, dist_high, neg_ew(m);
  for (std::size_t e = 0; e < m; ++e) neg_ew[e] = -ew[e];
  const bool bounded_below = shortest_potentials(chain, ew, dist_low);
  const bool bounded_above = shortest_potentials(chain, neg_ew, dist_high);
  const double low = bounded_below ? sw_min : -kInf;
  const double high = bounded_above ? sw_max : kInf;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)); };

  if ((level < low && !near(level, low)) || (level > high && !near(level, high))) {
    throw Error(ErrorCode::InfeasibleLevel, "level " + std::to_string(level) + " outside the attainable range [" +
                                                std::to_string(low) + ", " + std::to_string(high) + "]");
  }

  // Restrict to a face of the feasible set when the level is an endpoint.
  std::vector<bool> state_free(n, true), edge_free(m, true);
  bool level_row = true;
  if (std::isfinite(low) && std::isfinite(high) && near(low, high)) {
    level_row = false;
  } else {
    const bool at_low = std::isfinite(low) && near(level, low);
    const bool at_high = !at_low && std::isfinite(high) && near(level, high);
    if (at_low || at_high) {
      level_row = false;
      const double target = at_low ? sw_min : sw_max;
      const auto& dist = at_low ? dist_low : dist_high;
      const auto& w = at_low ? ew : neg_ew;
      double wscale = 1.0;
      for (double x : ew) wscale = std::max(wscale, std::abs(x));
      for (std::size_t x = 0; x < n; ++x) state_free[x] = near(sw[x], target);
      std::vector<bool> tight(m);
      for (std::size_t e = 0; e < m; ++e) {
        const auto& ed = chain.edge(e);
        double reduced = w[e] + dist[ed.from] - dist[ed.to];
        tight[e] = std::abs(reduced) <= 1e-10 * wscale && state_free[ed.from] && state_free[ed.to];
      }
      edge_free = cyclic_edges(chain, tight);
    }
  }

  // Variable layout: free states, then free edges.
  std::vector<Eigen::Index> state_var(n, -1), edge_var(m, -1);
  Eigen::Index dim = 0;
  for (std::size_t x = 0; x < n; ++x) {
    if (state_free[x]) state_var[x] = dim++;
  }
  const Eigen::Index n_mu = dim;
  for (std::size_t e = 0; e < m; ++e) {
    if (edge_free[e]) edge_var[e] = dim++;
  }

  const Eigen::Index rows = 1 + static_cast<Eigen::Index>(n) + (level_row ? 1 : 0);
  ConvexProblem prob;
  prob.dim = static_cast<std::size_t>(dim);
  prob.positive.assign(prob.dim, true);
  prob.A = Eigen::MatrixXd::Zero(rows, dim);
  prob.b = Eigen::VectorXd::Zero(rows);
  for (std::size_t x = 0; x < n; ++x) {
    if (state_var[x] >= 0) prob.A(0, state_var[x]) = 1.0;
  }
  prob.b(0) = 1.0;
  for (std::size_t e = 0; e < m; ++e) {
    if (edge_var[e] < 0) continue;
    prob.A(1 + static_cast<Eigen::Index>(chain.edge(e).from), edge_var[e]) += 1.0;
    prob.A(1 + static_cast<Eigen::Index>(chain.edge(e).to), edge_var[e]) -= 1.0;
  }
  if (level_row) {
    const Eigen::Index r = rows - 1;
    for (std::size_t x = 0; x < n; ++x) {
      if (state_var[x] >= 0) prob.A(r, state_var[x]) = sw[x];
    }
    for (std::size_t e = 0; e < m; ++e) {
      if (edge_var[e] >= 0) prob.A(r, edge_var[e]) = ew[e];
    }
    prob.b(r) = level;
  }

  auto mu_of = [&](const Eigen::VectorXd& v, std::size_t x) { return state_var[x] >= 0 ? v(state_var[x]) : 0.0; };
  prob.value = [&](const Eigen::VectorXd& v) {
    double s = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      double p = mu_of(v, chain.edge(e).from) * chain.edge(e).rate;
      s += edge_var[e] >= 0 ? phi_d(v(edge_var[e]), p) : p;
    }
    return s;
  };
  prob.derivatives = [&](const Eigen::VectorXd& v, Eigen::VectorXd& g, Eigen::MatrixXd& h) {
    g = Eigen::VectorXd::Zero(dim);
    h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t e = 0; e < m; ++e) {
      const auto& ed = chain.edge(e);
      Eigen::Index iy = state_var[ed.from];
      if (iy < 0) continue;
      double mu = v(iy);
      if (edge_var[e] < 0) {
        g(iy) += ed.rate;
        continue;
      }
      Eigen::Index iq = edge_var[e];
      double q = v(iq);
      g(iq) += std::log(q / (mu * ed.rate));
      g(iy) += ed.rate - q / mu;
      h(iq, iq) += 1.0 / q;
      h(iq, iy) -= 1.0 / mu;
      h(iy, iq) -= 1.0 / mu;
      h(iy, iy) += q / (mu * mu);
    }
  };

  Eigen::VectorXd x0(dim);
  for (Eigen::Index i = 0; i < n_mu; ++i) x0(i) = 1.0 / static_cast<double>(n_mu);
  for (std::size_t e = 0; e < m; ++e) {
    if (edge_var[e] >= 0) x0(edge_var[e]) = x0(state_var[chain.edge(e).from]) * chain.edge(e).rate;
  }
  SolverResult res = solve_convex(prob, x0);

  RateEvaluation r;
  std::vector<double> mu_full(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) mu_full[x] = std::max(0.0, mu_of(res.x, x));
  ProbabilityMeasure mu = ProbabilityMeasure::normalized(std::move(mu_full));
  Flow q = Flow::zero(chain);
  for (std::size_t e = 0; e < m; ++e) q.values[e] = edge_var[e] >= 0 ? std::max(0.0, res.x(edge_var[e])) : 0.0;
  ExtendedReal total(0.0);
  for (std::size_t e = 0; e < m; ++e) total += phi(q.values[e], mu[chain.edge(e).from] * chain.edge(e).rate);
  r.value = total;
  r.optimal_mu = std::move(mu);
  r.optimal_current = current_of(chain, q);
  r.optimal_flow = std::move(q);
  r.diagnostics = diagnostics_of(res);
  return r;
}

}  // namespace markovld
