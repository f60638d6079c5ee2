#include <doctest.h>

#include <cmath>
#include <random>

#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/rate_functions.hpp"
#include "markovld/worked_examples.hpp"
#include "support.hpp"

using namespace markovld;
using testing_support::golden_min;

TEST_CASE("two-state closed form") {
  // Frozen from an independent optimization over mu = (m, 1-m).
  CHECK(two_state_rate(1.0, 2.0, 2.0) == doctest::Approx(0.13240).epsilon(1e-4));
  CHECK(two_state_rate(1.0, 1.0, 1.2) == doctest::Approx(0.01878586815274552).epsilon(1e-12));
  CHECK(two_state_rate(1.0, 2.0, 0.0) == 1.0);
  CHECK(two_state_rate(1.0, 2.0, two_state_mean_flow(1.0, 2.0)) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK_THROWS_AS(two_state_rate(1.0, 2.0, -0.1), Error);
  for (auto [r0, r1] : {std::pair{1.0, 2.0}, std::pair{0.3, 5.0}, std::pair{2.0, 2.0}}) {
    for (double q : {0.1, 0.8, 1.7, 3.5}) {
      auto f = [&](double m) {
        return testing_support::phi_ref(q / 2, m * r0) + testing_support::phi_ref(q / 2, (1 - m) * r1);
      };
      double m = golden_min(f, 1e-14, 1 - 1e-14);
      CHECK(two_state_rate(r0, r1, q) == doctest::Approx(f(m)).epsilon(1e-10));
      CHECK(two_state_optimal_mu(r0, r1, q)[0] == doctest::Approx(m).epsilon(1e-6));
    }
  }
}

TEST_CASE("watch: R, its inverse and the rate") {
  WatchSpec spec{{1.0, 2.5, 4.0}};
  double h = 1.0 / (1.0 + 1.0 / 2.5 + 1.0 / 4.0);
  CHECK(watch_R(spec, 0.0) == doctest::Approx(h));
  CHECK(watch_rate(spec, watch_R(spec, 0.0)) < 1e-12);
  CHECK(watch_rate(spec, 0.0) == spec.r_min());
  for (double q : {0.05, 0.4, 1.0, 3.0}) {
    double l = watch_R_inverse(spec, q);
    CHECK(watch_R(spec, l) == doctest::Approx(q).epsilon(1e-11));
  }
  CHECK_THROWS_AS(watch_R(spec, -1.0), Error);
  // n = 2 reduces to the two-state chain with doubled flow.
  WatchSpec two{{0.7, 1.9}};
  for (double q : {0.0, 0.2, 0.5, 1.3}) CHECK(watch_rate(two, q) == doctest::Approx(two_state_rate(0.7, 1.9, 2 * q)));
  // Convex with its only zero at R(0).
  double prev = watch_rate(spec, 0.0);
  for (double q = 0.05; q < h; q += 0.05) {
    double v = watch_rate(spec, q);
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("ring: closed form, Legendre route and contraction") {
  const std::size_t N = 6;
  const double lam = 1.0, p = 0.7;
  double jbar = ring_mean_current(N, lam, p);
  CHECK(jbar == doctest::Approx(lam * (2 * p - 1) / N));
  CHECK(ring_rate(N, lam, p, jbar) < 1e-12);
  Chain ring = build_ring_chain(N, lam, p);
  ProbabilityMeasure uni = ProbabilityMeasure::uniform(N);
  for (double j : {-0.3, -0.05, 0.0, 0.02, 0.15, 0.6}) {
    double cf = ring_rate(N, lam, p, j, RingRoute::ClosedForm);
    double lg = ring_rate(N, lam, p, j, RingRoute::Legendre);
    CHECK(cf == doctest::Approx(lg).epsilon(1e-9));
    // Constant current j on every edge with the uniform measure.
    Current jc = Current::zero(ring);
    for (StateIndex x = 0; x < N; ++x) jc.set(ring, x, (x + 1) % N, j);
    double it = current_rate_Itilde(ring, uni, jc).value.value();
    CHECK(it == doctest::Approx(cf).epsilon(1e-12));
  }
  // Independent Legendre dual by golden section on alpha.
  for (double j : {-0.2, 0.1, 0.4}) {
    auto neg = [&](double a) { return -(a * j - ring_scgf(N, lam, p, a)); };
    double a = golden_min(neg, -60.0, 60.0);
    CHECK(ring_rate(N, lam, p, j) == doctest::Approx(-neg(a)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(build_ring_chain(N, lam, 1.0), Error);
  CHECK_THROWS_AS(build_ring_chain(2, lam, 0.5), Error);
}

TEST_CASE("birth-death classification") {
  auto one = [](std::size_t) { return 1.0; };
  auto lin = [](std::size_t k) { return static_cast<double>(k + 1); };
  auto half_lin = [](std::size_t k) { return 0.5 * static_cast<double>(k + 1); };
  auto ident = [](std::size_t k) { return static_cast<double>(k); };
  CHECK(topology_criterion(one, lin, 60).classification == BirthDeathClass::StrongTopology);
  CHECK(topology_criterion(half_lin, lin, 60).classification == BirthDeathClass::FailsStrongTopology);
  CHECK(topology_criterion(one, one, 60).classification == BirthDeathClass::Inconclusive);
  BirthDeathDeclaration wrong;
  wrong.ratio_tends_to_zero = false;
  wrong.ratio_liminf_positive = true;
  BirthDeathReport r = topology_criterion(one, lin, 60, wrong);
  CHECK(r.classification == BirthDeathClass::Inconclusive);
  CHECK(r.reason.find("disagrees") != std::string::npos);
  CHECK(r.ratios.size() == 60);
  CHECK_THROWS_AS(topology_criterion(one, lin, 3), Error);
  Chain bd = build_birth_death(one, ident, 10);
  ProbabilityMeasure pi = invariant_measure(bd);
  // Poisson(1) truncated at level 10.
  double z = 0, f = 1;
  for (int k = 0; k <= 10; ++k) {
    if (k) f *= k;
    z += 1.0 / f;
  }
  CHECK(pi[bd.state("0")] == doctest::Approx(1.0 / z).epsilon(1e-12));
}

TEST_CASE("confined walk: field, potential and orthogonality") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int R : {1, 2, 4}) {
    ConfinedWalkSpec spec;
    spec.radius = R;
    spec.radial_profile = [](int r) { return 0.5 * r * r; };
    for (int k = 0; k < R; ++k) spec.amplitudes.push_back(u(gen));
    ConfinedWalk w = build_confined_walk_2d(spec);
    CHECK(w.chain.num_states() == static_cast<std::size_t>((2 * R + 1) * (2 * R + 1)));
    for (int k = 1; k <= R; ++k) CHECK(w.rings[k - 1].size() == static_cast<std::size_t>(8 * k));
    CHECK(verify_field_orthogonality(w.chain, w.potential) < 1e-12);
    ProbabilityMeasure pi = invariant_measure(w.chain);
    double z = 0;
    for (double x : w.potential) z += std::exp(-x);
    for (StateIndex x = 0; x < w.chain.num_states(); ++x) {
      CHECK(pi[x] == doctest::Approx(std::exp(-w.potential[x]) / z).epsilon(1e-10));
    }
    auto wp = w_pi(w.chain, pi);
    for (std::size_t e = 0; e < w.chain.num_undirected(); ++e) CHECK(std::abs(wp.values[e] - w.field.values[e]) < 1e-12);
  }
  ConfinedWalkSpec l1;
  l1.norm = WalkNorm::L1;
  l1.radius = 2;
  l1.radial_profile = [](int r) { return 1.0 * r; };
  l1.amplitudes = {0.1, 0.2};
  try {
    build_confined_walk_2d(l1);
    FAIL("l1 norm accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnsupportedNorm);
  }
}

TEST_CASE("presets") {
  for (const auto& name : preset_names()) {
    Preset p = load_preset(name);
    CHECK(p.name == name);
    CHECK(p.chain.num_states() >= 2);
  }
  CHECK(load_preset("ring", {{"N", 9}}).chain.num_states() == 9);
  CHECK(load_preset("watch", {{"n", 4}, {"r3", 7.0}}).chain.rate(3, 0) == 7.0);
  CHECK_THROWS_AS(load_preset("ring", {{"bogus", 1.0}}), Error);
  CHECK_THROWS_AS(load_preset("nope"), Error);
}
