#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "markovld/chain.hpp"
#include "markovld/cycle_space.hpp"

namespace testing_support {

/// Random connected graph on n states: a Hamiltonian ring plus `extra` chords,
/// every edge present in both directions, rates log-uniform in [0.2, 5].
inline markovld::Chain random_symmetric_chain(std::mt19937_64& gen, std::size_t n, std::size_t extra) {
  std::uniform_real_distribution<double> lr(std::log(0.2), std::log(5.0));
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<markovld::RawEdge> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b || used[a][b]) return;
    used[a][b] = used[b][a] = true;
    edges.push_back({std::to_string(a), std::to_string(b), std::exp(lr(gen))});
    edges.push_back({std::to_string(b), std::to_string(a), std::exp(lr(gen))});
  };
  for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) add(pick(gen), pick(gen));
  std::vector<std::string> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back(std::to_string(i));
  return markovld::Chain::build(edges, states);
}

/// Reversible chain: rates r(y,z) = sqrt(pi(z)/pi(y)) * c({y,z}).
inline markovld::Chain random_reversible_chain(std::mt19937_64& gen, std::size_t n, std::size_t extra) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> h(n);
  for (auto& x : h) x = u(gen);
  markovld::Chain base = random_symmetric_chain(gen, n, extra);
  std::vector<markovld::RawEdge> edges;
  for (const auto& ue : base.undirected_edges()) {
    double c = std::exp(u(gen));
    edges.push_back({base.label(ue.lo), base.label(ue.hi), c * std::exp(0.5 * (h[ue.hi] - h[ue.lo]))});
    edges.push_back({base.label(ue.hi), base.label(ue.lo), c * std::exp(0.5 * (h[ue.lo] - h[ue.hi]))});
  }
  return markovld::Chain::build(edges, std::vector<std::string>(base.labels().begin(), base.labels().end()));
}

inline std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  double s = 0;
  for (auto& x : w) s += (x = e(gen) + 1e-3);
  for (auto& x : w) x /= s;
  return w;
}

/// Divergence-free current: Gaussian chord coefficients on a fundamental basis.
inline markovld::Current random_cycle_current(std::mt19937_64& gen, const markovld::Chain& c, double scale) {
  markovld::FundamentalBasis basis(c, 0);
  std::normal_distribution<double> nd(0.0, scale);
  std::vector<double> a(basis.size());
  for (auto& x : a) x = nd(gen);
  return markovld::assemble_current(c, basis, a);
}

/// Golden-section minimum of a unimodal f on [a, b].
inline double golden_min(const std::function<double(double)>& f, double a, double b, int iters = 200) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1 + std::abs(a)); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Phi(q, p) written out independently of the library.
inline double phi_ref(double q, double p) {
  if (q == 0.0) return p;
  if (p == 0.0) return INFINITY;
  return q * std::log(q / p) - q + p;
}

}  // namespace testing_support
