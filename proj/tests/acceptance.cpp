// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/rate_functions.hpp"
#include "markovld/trajectory.hpp"
#include "markovld/worked_examples.hpp"
#include "support.hpp"

using namespace markovld;
using testing_support::golden_min;
using testing_support::phi_ref;

constexpr double kInfinity = 1e300;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Current random_current(std::mt19937_64& gen, const Chain& c, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Current j = Current::zero(c);
  for (auto& v : j.values) v = nd(gen);
  return j;
}

double half_pairing(const Current& j, const AntisymmetricEdgeFunction& w) {
  double s = 0;
  for (std::size_t u = 0; u < j.values.size(); ++u) s += j.values[u] * w.values[u];
  return s;
}

// --- 1 -----------------------------------------------------------------------
Outcome two_state_oracle() {
  constexpr double kTol = 1e-7;
  double worst = 0;
  for (auto [r0, r1] : {std::pair{1.0, 1.0}, std::pair{1.0, 2.0}, std::pair{0.3, 5.0}}) {
    Chain c = build_two_state(r0, r1);
    ObservableSpec obs = ObservableSpec::total_flow(c);
    const double qbar = two_state_mean_flow(r0, r1);
    for (int k = 0; k <= 12; ++k) {
      double q = 0.25 * k * qbar;
      double num = scalar_contraction(c, obs, q).value.value();
      worst = std::max(worst, std::abs(num - two_state_rate(r0, r1, q)));
    }
  }
  return {worst <= kTol, fmt("max abs error %.3e (tol 1e-7)", worst)};
}

// --- 2 -----------------------------------------------------------------------
Outcome watch_oracle() {
  constexpr double kTol = 1e-7, kZeroTol = 1e-10;
  double worst = 0, zero = 0;
  for (const std::vector<double>& rates :
       {std::vector<double>{0.6, 2.3}, std::vector<double>{1.0, 2.5, 0.4}, std::vector<double>{1.3, 0.5, 3.0, 2.2, 0.9}}) {
    WatchSpec spec{rates};
    Chain c = build_watch_chain(spec);
    ObservableSpec obs = ObservableSpec::total_flow(c);
    for (double& w : obs.edge_weights) w /= static_cast<double>(rates.size());
    const double r0 = watch_R(spec, 0.0);
    for (int k = 0; k < 10; ++k) {
      double q = 0.3 * k * r0;
      double num = scalar_contraction(c, obs, q).value.value();
      worst = std::max(worst, std::abs(num - watch_rate(spec, q)));
    }
    zero = std::max({zero, std::abs(watch_rate(spec, r0)), std::abs(scalar_contraction(c, obs, r0).value.value())});
  }
  return {worst <= kTol && zero <= kZeroTol,
          fmt("max abs error %.3e (tol 1e-7)", worst) + fmt(", f(R(0)) %.3e (tol 1e-10)", zero)};
}

// --- 3 -----------------------------------------------------------------------
Outcome ring_dual() {
  constexpr double kTol = 1e-6, kZeroTol = 1e-10;
  const std::size_t N = 6;
  const double lam = 1.0, p = 0.7;
  Chain ring = build_ring_chain(N, lam, p);
  double worst = 0;
  for (int k = 0; k < 10; ++k) {
    double j = -0.3 + 0.08 * k;
    double cf = ring_rate(N, lam, p, j, RingRoute::ClosedForm);
    double lg = ring_rate(N, lam, p, j, RingRoute::Legendre);
    Current jc = Current::zero(ring);
    for (StateIndex x = 0; x < N; ++x) jc.set(ring, x, (x + 1) % N, j);
    double var = current_rate_contracted(ring, jc).value.value();
    worst = std::max({worst, std::abs(cf - lg), std::abs(cf - var), std::abs(lg - var)});
  }
  double zero = ring_rate(N, lam, p, ring_mean_current(N, lam, p));
  return {worst <= kTol && zero <= kZeroTol,
          fmt("max pairwise diff %.3e (tol 1e-6)", worst) + fmt(", W_N(mean) %.3e (tol 1e-10)", zero)};
}

// --- 4 -----------------------------------------------------------------------
Outcome gc_symmetries() {
  constexpr double kTilde = 1e-9, kHat = 1e-8, kIota = 1e-7;
  std::mt19937_64 gen(2024);
  double r_tilde = 0, r_hat = 0, r_iota = 0;
  for (int chain_i = 0; chain_i < 50; ++chain_i) {
    std::size_t n = 3 + chain_i % 6;
    Chain c = testing_support::random_symmetric_chain(gen, n, chain_i % 4 + 1);
    ProbabilityMeasure pi = invariant_measure(c);
    auto w = w_pi(c, pi);
    FundamentalBasis basis(c, 0);
    std::normal_distribution<double> nd(0.0, 0.5);
    for (int s = 0; s < 20; ++s) {
      ProbabilityMeasure mu(testing_support::random_simplex(gen, n));
      Current jt = testing_support::random_cycle_current(gen, c, 0.8);
      double res = current_rate_Itilde(c, mu, jt).value.is_finite() ? check_gc_symmetry(c, mu, jt) : kInfinity;
      r_tilde = std::max(r_tilde, std::abs(res));
      std::vector<double> a(basis.size());
      for (auto& x : a) x = nd(gen);
      Current j = assemble_current(c, basis, a);
      double plus = current_rate_contracted(c, j).value.value();
      double minus = current_rate_contracted(c, -j).value.value();
      r_hat = std::max(r_hat, std::abs(plus - minus + half_pairing(j, w)));
    }
    if (chain_i % 10 == 0) {
      for (double u : {-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5}) {
        double a = gc_rate_iota(c, u).value.value();
        double b = gc_rate_iota(c, -u).value.value();
        r_iota = std::max(r_iota, std::abs(a - b + u));
      }
    }
  }
  return {r_tilde <= kTilde && r_hat <= kHat && r_iota <= kIota,
          fmt("Itilde %.3e (tol 1e-9)", r_tilde) + fmt(", Ihat %.3e (tol 1e-8)", r_hat) +
              fmt(", iota %.3e (tol 1e-7)", r_iota)};
}

// --- 5 -----------------------------------------------------------------------
Outcome formula_agreement() {
  constexpr double kBis = 1e-10, kFlow = 1e-8;
  std::mt19937_64 gen(77);
  double r_bis = 0, r_flow = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Chain c = testing_support::random_symmetric_chain(gen, 3 + trial % 6, trial % 3);
    ProbabilityMeasure mu(testing_support::random_simplex(gen, c.num_states()));
    Current j = testing_support::random_cycle_current(gen, c, 0.7);
    double a = current_rate_Itilde(c, mu, j, CurrentFormula::Rff).value.value();
    double b = current_rate_Itilde(c, mu, j, CurrentFormula::RffBis).value.value();
    r_bis = std::max(r_bis, std::abs(a - b));
    Current jr = random_current(gen, c, 0.7);
    Flow q = optimal_flow_QJmu(c, mu, jr);
    std::size_t u = static_cast<std::size_t>(trial) % c.num_undirected();
    const auto& ue = c.undirected(u);
    double pf = mu[ue.lo] * c.edge(ue.forward).rate, pb = mu[ue.hi] * c.edge(ue.backward).rate;
    double jj = jr.values[u], lo = std::max(0.0, -jj);
    double s = golden_min([&](double x) { return phi_ref(jj + x, pf) + phi_ref(x, pb); }, lo, lo + 10.0 + std::abs(jj));
    double term = phi_ref(q.values[ue.forward], pf) + phi_ref(q.values[ue.backward], pb);
    double oracle = phi_ref(jj + s, pf) + phi_ref(s, pb);
    r_flow = std::max(r_flow, std::abs(term - oracle) / (1.0 + oracle));
  }
  return {r_bis <= kBis && r_flow <= kFlow,
          fmt("rff vs rff_bis %.3e (tol 1e-10)", r_bis) + fmt(", Q^{J,mu} vs oracle %.3e (tol 1e-8)", r_flow)};
}

// --- 6 -----------------------------------------------------------------------
void closed_walks(const Chain& c, std::size_t max_len, const std::function<void(const Cycle&)>& visit) {
  std::vector<std::vector<StateIndex>> nbr(c.num_states());
  for (const auto& ue : c.undirected_edges()) {
    nbr[ue.lo].push_back(ue.hi);
    nbr[ue.hi].push_back(ue.lo);
  }
  std::vector<StateIndex> path;
  std::function<void(StateIndex)> rec = [&](StateIndex start) {
    if (path.size() >= 2) {
      for (StateIndex z : nbr[path.back()]) {
        if (z == start) visit(Cycle{path});
      }
    }
    if (path.size() == max_len) return;
    for (StateIndex z : nbr[path.back()]) {
      path.push_back(z);
      rec(start);
      path.pop_back();
    }
  };
  for (StateIndex s = 0; s < c.num_states(); ++s) {
    path = {s};
    rec(s);
  }
}

Outcome cycle_exactness() {
  std::mt19937_64 gen(61);
  std::size_t duality_bad = 0, rebuild_bad = 0, cycles_seen = 0, route_bad = 0;
  for (int g = 0; g < 10; ++g) {
    Chain c = testing_support::random_symmetric_chain(gen, 4 + g % 3, 2 + g % 3);
    FundamentalBasis basis(c, static_cast<StateIndex>(g % c.num_states()));
    std::vector<std::vector<std::int64_t>> counts;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      counts.push_back(edge_counts(c, basis.cycle(k)));
      for (std::size_t l = 0; l < basis.size(); ++l) {
        const Chord& ch = basis.chords()[l];
        duality_bad += edge_count_S(basis.cycle(k), ch.from, ch.to) != (k == l ? 1 : 0);
      }
    }
    closed_walks(c, 6, [&](const Cycle& cyc) {
      auto s = edge_counts(c, cyc);
      std::vector<std::int64_t> rebuilt(s.size(), 0);
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const Chord& ch = basis.chords()[k];
        std::int64_t a = edge_count_S(cyc, ch.from, ch.to);
        for (std::size_t u = 0; u < s.size(); ++u) rebuilt[u] += a * counts[k][u];
      }
      rebuild_bad += rebuilt != s;
      ++cycles_seen;
    });
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      Trajectory t = simulate(c, 0, 8.0, 500 + g, rep);
      Cycle closed = close_trajectory(t, basis);
      auto n = jump_counts(c, t);
      HomologicalCoefficients hc = homological_coefficients(c, t, basis);
      for (std::size_t k = 0; k < basis.size(); ++k) {
        const Chord& ch = basis.chords()[k];
        std::int64_t via_cycle = closed.empty() ? 0 : edge_count_S(closed, ch.from, ch.to);
        std::int64_t via_current = n[c.find_edge(ch.from, ch.to)] - n[c.find_edge(ch.to, ch.from)];
        route_bad += via_cycle != via_current || hc.numerators[k] != via_current;
      }
    }
  }
  // Ladder: comb tree, chords along the top row.
  std::size_t ladder_bad = 0;
  Chain lad = build_ladder(5);
  FundamentalBasis lb(lad, lad.state("b1"));
  for (std::size_t u = 0; u < lad.num_undirected(); ++u) {
    const auto& ue = lad.undirected(u);
    bool top = lad.label(ue.lo)[0] == 't' && lad.label(ue.hi)[0] == 't';
    ladder_bad += lb.tree().tree_edge[u] == top;
  }
  ladder_bad += lb.size() != 4;
  for (std::size_t k = 0; k < lb.size(); ++k) {
    const Cycle& cyc = lb.cycle(k);
    int j = std::stoi(lad.label(cyc.vertices[1]).substr(1));
    std::vector<std::string> want = {"t" + std::to_string(j + 1), "t" + std::to_string(j), "b" + std::to_string(j),
                                     "b" + std::to_string(j + 1)};
    std::vector<std::string> got;
    for (StateIndex v : cyc.vertices) got.push_back(lad.label(v));
    ladder_bad += got != want;
  }
  bool ok = duality_bad == 0 && rebuild_bad == 0 && route_bad == 0 && ladder_bad == 0 && cycles_seen > 0;
  return {ok, "duality " + std::to_string(duality_bad) + ", reconstruction " + std::to_string(rebuild_bad) + "/" +
                  std::to_string(cycles_seen) + ", trajectory routes " + std::to_string(route_bad) + "/1000, ladder " +
                  std::to_string(ladder_bad) + " mismatches"};
}

// --- 7 -----------------------------------------------------------------------
Outcome homological_gc() {
  constexpr double kTol = 1e-7;
  std::mt19937_64 gen(88);
  double worst = 0;
  int chains_used = 0;
  while (chains_used < 5) {
    Chain c = testing_support::random_symmetric_chain(gen, 4 + chains_used % 3, 2);
    ProbabilityMeasure pi = invariant_measure(c);
    FundamentalBasis basis(c, 0);
    std::vector<double> aff;
    double max_aff = 0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      aff.push_back(affinity(c, basis.cycle(k), pi).rate_ratio);
      max_aff = std::max(max_aff, std::abs(aff.back()));
    }
    if (max_aff < 1e-3) continue;  // reversible draw
    ++chains_used;
    std::normal_distribution<double> nd(0.0, 0.4);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> a(basis.size()), neg(basis.size());
      double lin = 0;
      for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] = nd(gen);
        neg[k] = -a[k];
        lin += a[k] * aff[k];
      }
      double plus = homological_rate_Ic(c, basis, a).value.value();
      double minus = homological_rate_Ic(c, basis, neg).value.value();
      worst = std::max(worst, std::abs(plus - minus + lin));
    }
  }
  return {worst <= kTol, fmt("max residual %.3e (tol 1e-7)", worst)};
}

// --- 8 -----------------------------------------------------------------------
Outcome confined_walk() {
  constexpr double kOrt = 1e-12, kGibbs = 1e-9, kField = 1e-12;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double ort = 0, gibbs = 0, field = 0;
  for (int R : {3, 6}) {
    ConfinedWalkSpec spec;
    spec.radius = R;
    spec.radial_profile = [](int r) { return 0.5 * r * r; };
    for (int k = 0; k < R; ++k) spec.amplitudes.push_back(u(gen));
    ConfinedWalk w = build_confined_walk_2d(spec);
    ort = std::max(ort, verify_field_orthogonality(w.chain, w.potential));
    ProbabilityMeasure pi = invariant_measure(w.chain);
    double z = 0;
    for (double x : w.potential) z += std::exp(-x);
    for (StateIndex x = 0; x < w.chain.num_states(); ++x) {
      double g = std::exp(-w.potential[x]) / z;
      gibbs = std::max(gibbs, std::abs(pi[x] - g) / g);
    }
    auto wp = w_pi(w.chain, pi);
    for (std::size_t e = 0; e < w.chain.num_undirected(); ++e) {
      field = std::max(field, std::abs(wp.values[e] - w.field.values[e]));
    }
  }
  return {ort <= kOrt && gibbs <= kGibbs && field <= kField,
          fmt("orthogonality %.3e (tol 1e-12)", ort) + fmt(", Gibbs rel %.3e (tol 1e-9)", gibbs) +
              fmt(", |w_pi - F| %.3e (tol 1e-12)", field)};
}

// --- 9 -----------------------------------------------------------------------
Outcome monte_carlo() {
  constexpr double kLow = 0.55, kHigh = 1.45;
  constexpr std::uint64_t kSamples = 200000;
  Chain c = build_two_state(1.0, 1.0);
  ObservableSpec obs = ObservableSpec::total_flow(c);
  const double f = two_state_rate(1.0, 1.0, 1.2);
  auto est = [&](double T, std::uint64_t seed) {
    return estimate_tail_exponent(c, 0, obs, 1.2, TailDirection::AtLeast, T, kSamples, seed);
  };
  TailEstimate e200 = est(200.0, 9001), e100 = est(100.0, 9002), e400 = est(400.0, 9003);
  double ratio = e200.estimate / f;
  bool window = !e200.is_bound && ratio >= kLow && ratio <= kHigh;
  bool monotone = !e400.is_bound && std::abs(e400.estimate - f) < std::abs(e100.estimate - f);
  return {window && monotone, fmt("f(1.2) = %.5f", f) + fmt(", T=200 ratio %.3f in [0.55,1.45]", ratio) +
                                  (window ? " yes" : " no") + fmt(", T=100 ratio %.3f", e100.estimate / f) +
                                  fmt(", T=400 ratio %.3f", e400.estimate / f) +
                                  (monotone ? ", monotone yes" : ", monotone no")};
}

// --- 10 ----------------------------------------------------------------------
Outcome degenerate_cases() {
  int bad = 0;
  auto expect = [&](ErrorCode code, const std::function<void()>& f) {
    try {
      f();
      ++bad;
    } catch (const Error& e) {
      bad += e.code() != code;
    }
  };
  bad += !(phi(0.0, 0.0).is_finite() && phi(0.0, 0.0).value() == 0.0);
  bad += !phi(1.0, 0.0).is_pos_infinity();
  bad += phi(0.0, 3.0).value() != 3.0;
  bad += std::abs(psi(0.6, 0.2, 0.0).value() - phi(0.6, 0.2).value()) > 1e-15;
  bad += !psi(0.6, 0.0, 0.0).is_pos_infinity();
  bad += psi(0.0, 0.0, 0.0).value() != 0.0;
  bad += psi(0.3, 0.3, 2.0).value() != 0.0;
  expect(ErrorCode::NegativeArgument, [] { phi(-0.1, 1.0); });
  expect(ErrorCode::DomainError, [] { psi(-0.2, 0.3, 0.0); });
  expect(ErrorCode::NegativeArgument, [] { psi(0.2, 0.3, -1.0); });

  WatchSpec spec{{1.0, 2.0, 3.0}};
  Chain w = build_watch_chain(spec);
  ProbabilityMeasure mu = ProbabilityMeasure::uniform(3);
  Trajectory t = simulate(w, 0, 5.0, 1);
  Cycle ring{{0, 1, 2}};
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { w_pi(w, mu); });
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { check_gc_symmetry(w, mu, Current::zero(w)); });
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { gc_rate_iota(w, 0.1); });
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { gc_functional(w, t, Current::zero(w)); });
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { affinity(w, ring, mu); });
  expect(ErrorCode::NotSymmetricEdgeSet, [&] { ObservableSpec::gallavotti_cohen(w, Current::zero(w)); });
  return {bad == 0, std::to_string(bad) + " unexpected results over 16 checks"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"two-state oracle equivalence", two_state_oracle},
      {"watch oracle equivalence", watch_oracle},
      {"ring dual equivalence", ring_dual},
      {"GC symmetries", gc_symmetries},
      {"formula agreement", formula_agreement},
      {"cycle-space exactness", cycle_exactness},
      {"homological GC symmetry", homological_gc},
      {"confined-walk construction", confined_walk},
      {"Monte Carlo LDP check", monte_carlo},
      {"degenerate and edge handling", degenerate_cases},
  };
  int failures = 0, index = 0;
  for (const auto& c : criteria) {
    ++index;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2d %-30s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
