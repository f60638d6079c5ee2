#include <doctest.h>

#include <cmath>
#include <random>

#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/rng.hpp"
#include "markovld/trajectory.hpp"
#include "markovld/worked_examples.hpp"
#include "support.hpp"

using namespace markovld;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using B = Philox4x32::Block;
  CHECK(Philox4x32::bijection(B{0, 0, 0, 0}, {0, 0}) == B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::bijection(B{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::bijection(B{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniforms lie in (0, 1] and streams differ") {
  Philox4x32 a(42, 0), b(42, 1);
  double sum = 0;
  bool differ = false;
  for (int i = 0; i < 10000; ++i) {
    double u = a.uniform_open0();
    CHECK((u > 0.0 && u <= 1.0));
    sum += u;
    differ = differ || u != b.uniform_open0();
  }
  CHECK(differ);
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("simulation is deterministic and well formed") {
  Chain c = build_two_state(1.0, 2.0);
  Trajectory t1 = simulate(c, 0, 50.0, 7);
  Trajectory t2 = simulate(c, 0, 50.0, 7);
  REQUIRE(t1.jumps.size() == t2.jumps.size());
  for (std::size_t i = 0; i < t1.jumps.size(); ++i) {
    CHECK(t1.jumps[i].time == t2.jumps[i].time);
    CHECK(t1.jumps[i].target == t2.jumps[i].target);
  }
  t1.validate(c);
  Trajectory t3 = simulate(c, 0, 50.0, 7, 1);
  CHECK(t3.jumps.size() != t1.jumps.size());

  Trajectory bad = t1;
  bad.jumps.push_back({10.0, 0});
  CHECK_THROWS_AS(bad.validate(c), Error);
}

TEST_CASE("empirical observables on a hand-made path") {
  Chain c = build_two_state(1.0, 1.0);
  Trajectory t;
  t.initial_state = 0;
  t.horizon = 4.0;
  t.jumps = {{1.0, 1}, {1.5, 0}, {3.0, 1}};
  ProbabilityMeasure mu = empirical_measure(c, t);
  CHECK(mu[0] == doctest::Approx(2.5 / 4.0));
  CHECK(mu[1] == doctest::Approx(1.5 / 4.0));
  auto n = jump_counts(c, t);
  CHECK(n[c.find_edge(0, 1)] == 2);
  CHECK(n[c.find_edge(1, 0)] == 1);
  Flow q = empirical_flow(c, t);
  CHECK(q.values[c.find_edge(0, 1)] == doctest::Approx(0.5));
  Current j = empirical_current(c, t);
  CHECK(j.at(c, 0, 1) == doctest::Approx(0.25));
  CHECK(evaluate_observable(c, t, ObservableSpec::total_flow(c)) == doctest::Approx(0.75));
  CHECK(evaluate_observable(c, t, ObservableSpec::occupation(c, 1)) == doctest::Approx(1.5 / 4.0));
  CHECK(evaluate_observable(c, t, ObservableSpec::current_on(c, 1, 0)) == doctest::Approx(-0.25));
}

TEST_CASE("streaming observable matches the stored path") {
  std::mt19937_64 gen(1);
  Chain c = testing_support::random_symmetric_chain(gen, 5, 3);
  JumpSampler sampler(c);
  ObservableSpec obs = ObservableSpec::total_flow(c);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Trajectory t = simulate(c, 2, 30.0, 99, s);
    CHECK(sample_observable(sampler, 2, 30.0, obs, 99, s) == doctest::Approx(evaluate_observable(c, t, obs)));
  }
}

TEST_CASE("GC functional equals the gallavotti-cohen observable") {
  std::mt19937_64 gen(2);
  Chain c = testing_support::random_symmetric_chain(gen, 4, 2);
  auto w = w_pi(c, invariant_measure(c));
  Trajectory t = simulate(c, 0, 40.0, 3);
  double direct = 0;
  Current j = empirical_current(c, t);
  for (std::size_t u = 0; u < c.num_undirected(); ++u) direct += j.values[u] * w.values[u];
  CHECK(gc_functional(c, t, w) == doctest::Approx(direct));
  CHECK(evaluate_observable(c, t, ObservableSpec::gallavotti_cohen(c, w)) == doctest::Approx(direct));
  Chain watch = build_watch_chain(WatchSpec{{1.0, 2.0, 3.0}});
  Trajectory tw = simulate(watch, 0, 5.0, 1);
  CHECK_THROWS_AS(gc_functional(watch, tw, Current::zero(watch)), Error);
}

TEST_CASE("law of large numbers for the two-state flow") {
  Chain c = build_two_state(1.0, 2.0);
  Trajectory t = simulate(c, 0, 20000.0, 5);
  CHECK(evaluate_observable(c, t, ObservableSpec::total_flow(c)) ==
        doctest::Approx(two_state_mean_flow(1.0, 2.0)).epsilon(0.02));
  ProbabilityMeasure mu = empirical_measure(c, t);
  CHECK(mu[0] == doctest::Approx(2.0 / 3.0).epsilon(0.02));
}

TEST_CASE("tail estimates: determinism, thread independence, zero hits") {
  Chain c = build_two_state(1.0, 1.0);
  ObservableSpec obs = ObservableSpec::total_flow(c);
  TailEstimate a = estimate_tail_exponent(c, 0, obs, 1.2, TailDirection::AtLeast, 20.0, 4000, 11, 1);
  TailEstimate b = estimate_tail_exponent(c, 0, obs, 1.2, TailDirection::AtLeast, 20.0, 4000, 11, 3);
  CHECK(a.hits == b.hits);
  CHECK(a.estimate == b.estimate);
  CHECK(a.hits > 0);
  CHECK(a.ci_low <= a.estimate);
  CHECK(a.estimate <= a.ci_high);
  CHECK(a.estimate == doctest::Approx(-std::log(static_cast<double>(a.hits) / 4000.0) / 20.0));

  TailEstimate z = estimate_tail_exponent(c, 0, obs, 10.0, TailDirection::AtLeast, 20.0, 500, 11, 1);
  CHECK(z.hits == 0);
  CHECK(z.is_bound);
  CHECK(std::isfinite(z.estimate));
  CHECK(z.estimate == z.ci_low);

  TailEstimate below = estimate_tail_exponent(c, 0, obs, 0.8, TailDirection::AtMost, 20.0, 2000, 4, 1);
  CHECK(below.hits > 0);
  CHECK(below.hits < 2000);
}

TEST_CASE("homological coefficients on a ring count windings") {
  Chain ring = build_ring_chain(5, 1.0, 0.8);
  FundamentalBasis basis(ring, 0);
  REQUIRE(basis.size() == 1);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Trajectory t = simulate(ring, 0, 25.0, 17, s);
    HomologicalCoefficients hc = homological_coefficients(ring, t, basis);
    auto n = jump_counts(ring, t);
    const Chord& ch = basis.chords()[0];
    std::int64_t net = n[ring.find_edge(ch.from, ch.to)] - n[ring.find_edge(ch.to, ch.from)];
    CHECK(hc.numerators[0] == net);
    CHECK(hc.values()[0] == doctest::Approx(static_cast<double>(net) / 25.0));
  }
}
