#include "markovld/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/rng.hpp"

namespace markovld {

void Trajectory::validate(const Chain& chain) const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be > 0");
  if (initial_state >= chain.num_states()) throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  StateIndex x = initial_state;
  double t = 0.0;
  for (const auto& j : jumps) {
    if (!(j.time > t) || j.time > horizon) throw Error(ErrorCode::InvalidArgument, "jump times must increase in (0, T]");
    if (chain.find_edge(x, j.target) == npos) throw Error(ErrorCode::InvalidArgument, "jump along a non-edge");
    t = j.time;
    x = j.target;
  }
}

JumpSampler::JumpSampler(const Chain& chain) : chain_(&chain), cumulative_(chain.num_edges()) {
  for (StateIndex x = 0; x < chain.num_states(); ++x) {
    auto outs = chain.out_edges(x);
    double acc = 0.0;
    std::size_t base = outs.data() - chain.out_edges(0).data();
    for (std::size_t i = 0; i < outs.size(); ++i) {
      acc += chain.edge(outs[i]).rate;
      cumulative_[base + i] = acc;
    }
  }
}

std::size_t JumpSampler::draw_edge(StateIndex x, double u) const {
  auto outs = chain_->out_edges(x);
  std::size_t base = outs.data() - chain_->out_edges(0).data();
  const double* first = cumulative_.data() + base;
  const double* last = first + outs.size();
  double target = u * last[-1];
  const double* it = std::lower_bound(first, last, target);
  if (it == last) --it;
  return outs[static_cast<std::size_t>(it - first)];
}

namespace {

// Calls visit(holding_time, state, edge_or_npos) for each holding interval;
// the last interval ends at T with no jump.
template <class Visit>
void run_path(const JumpSampler& sampler, StateIndex x0, double horizon, Philox4x32& rng, Visit&& visit) {
  const Chain& chain = sampler.chain();
  StateIndex x = x0;
  double t = 0.0;
  for (;;) {
    double hold = -std::log(rng.uniform_open0()) / chain.holding_rate(x);
    if (t + hold > horizon) {
      visit(horizon - t, x, npos, horizon);
      return;
    }
    t += hold;
    std::size_t e = sampler.draw_edge(x, rng.uniform_open0());
    visit(hold, x, e, t);
    x = chain.edge(e).to;
  }
}

void require_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be > 0");
}

}  // namespace

Trajectory simulate(const Chain& chain, StateIndex x0, double horizon, std::uint64_t seed, std::uint64_t stream) {
  require_horizon(horizon);
  if (x0 >= chain.num_states()) throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  JumpSampler sampler(chain);
  Philox4x32 rng(seed, stream);
  Trajectory traj{x0, {}, horizon};
  run_path(sampler, x0, horizon, rng, [&](double, StateIndex, std::size_t e, double t) {
    if (e != npos) traj.jumps.push_back(Jump{t, chain.edge(e).to});
  });
  return traj;
}

ProbabilityMeasure empirical_measure(const Chain& chain, const Trajectory& traj) {
  std::vector<double> occupation(chain.num_states(), 0.0);
  StateIndex x = traj.initial_state;
  double t = 0.0;
  for (const auto& j : traj.jumps) {
    occupation.at(x) += j.time - t;
    t = j.time;
    x = j.target;
  }
  occupation.at(x) += traj.horizon - t;
  return ProbabilityMeasure::normalized(std::move(occupation));
}

std::vector<std::int64_t> jump_counts(const Chain& chain, const Trajectory& traj) {
  std::vector<std::int64_t> counts(chain.num_edges(), 0);
  StateIndex x = traj.initial_state;
  for (const auto& j : traj.jumps) {
    std::size_t e = chain.find_edge(x, j.target);
    if (e == npos) throw Error(ErrorCode::InvalidArgument, "jump along a non-edge");
    ++counts[e];
    x = j.target;
  }
  return counts;
}

Flow empirical_flow(const Chain& chain, const Trajectory& traj) {
  auto counts = jump_counts(chain, traj);
  Flow q = Flow::zero(chain);
  for (std::size_t e = 0; e < counts.size(); ++e) q.values[e] = static_cast<double>(counts[e]) / traj.horizon;
  return q;
}

Current empirical_current(const Chain& chain, const Trajectory& traj) {
  return current_of(chain, empirical_flow(chain, traj));
}

double gc_functional(const Chain& chain, const Trajectory& traj, const AntisymmetricEdgeFunction& w) {
  chain.require_symmetric("gc_functional");
  w.validate(chain);
  Current j = empirical_current(chain, traj);
  double s = 0.0;
  for (std::size_t u = 0; u < j.values.size(); ++u) s += j.values[u] * w.values[u];
  return s;
}

void ObservableSpec::validate(const Chain& chain) const {
  if (!state_weights.empty() && state_weights.size() != chain.num_states()) {
    throw Error(ErrorCode::InvalidArgument, "state weights do not match chain");
  }
  if (!edge_weights.empty() && edge_weights.size() != chain.num_edges()) {
    throw Error(ErrorCode::InvalidArgument, "edge weights do not match chain");
  }
  for (double v : state_weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite state weight");
  }
  for (double v : edge_weights) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite edge weight");
  }
}

ObservableSpec ObservableSpec::total_flow(const Chain& chain) {
  return ObservableSpec{{}, std::vector<double>(chain.num_edges(), 1.0)};
}

ObservableSpec ObservableSpec::occupation(const Chain& chain, StateIndex x) {
  ObservableSpec o{std::vector<double>(chain.num_states(), 0.0), {}};
  o.state_weights.at(x) = 1.0;
  return o;
}

ObservableSpec ObservableSpec::current_on(const Chain& chain, StateIndex y, StateIndex z) {
  std::size_t f = chain.find_edge(y, z), b = chain.find_edge(z, y);
  if (f == npos && b == npos) throw Error(ErrorCode::InvalidArgument, "no edge between the given states");
  ObservableSpec o{{}, std::vector<double>(chain.num_edges(), 0.0)};
  if (f != npos) o.edge_weights[f] = 1.0;
  if (b != npos) o.edge_weights[b] = -1.0;
  return o;
}

ObservableSpec ObservableSpec::gallavotti_cohen(const Chain& chain, const AntisymmetricEdgeFunction& w) {
  chain.require_symmetric("gallavotti_cohen observable");
  ObservableSpec o{{}, std::vector<double>(chain.num_edges(), 0.0)};
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    o.edge_weights[e] = w.at(chain, chain.edge(e).from, chain.edge(e).to);
  }
  return o;
}

double evaluate_observable(const Chain& chain, const Trajectory& traj, const ObservableSpec& obs) {
  obs.validate(chain);
  double s = 0.0;
  if (!obs.state_weights.empty()) {
    auto mu = empirical_measure(chain, traj);
    for (StateIndex x = 0; x < chain.num_states(); ++x) s += mu[x] * obs.state_weights[x];
  }
  if (!obs.edge_weights.empty()) {
    auto q = empirical_flow(chain, traj);
    for (std::size_t e = 0; e < chain.num_edges(); ++e) s += q.values[e] * obs.edge_weights[e];
  }
  return s;
}

double sample_observable(const JumpSampler& sampler, StateIndex x0, double horizon, const ObservableSpec& obs,
                         std::uint64_t seed, std::uint64_t stream) {
  Philox4x32 rng(seed, stream);
  double time_part = 0.0, edge_part = 0.0;
  const bool states = !obs.state_weights.empty(), edges = !obs.edge_weights.empty();
  run_path(sampler, x0, horizon, rng, [&](double hold, StateIndex x, std::size_t e, double) {
    if (states) time_part += hold * obs.state_weights[x];
    if (edges && e != npos) edge_part += obs.edge_weights[e];
  });
  return (time_part + edge_part) / horizon;
}

namespace {

constexpr double kWilsonZ = 1.959963984540054;

std::pair<double, double> wilson(std::uint64_t hits, std::uint64_t n) {
  double p = static_cast<double>(hits) / static_cast<double>(n);
  double z2n = kWilsonZ * kWilsonZ / static_cast<double>(n);
  double denom = 1.0 + z2n;
  double center = (p + 0.5 * z2n) / denom;
  double half = kWilsonZ * std::sqrt(p * (1.0 - p) / static_cast<double>(n) + 0.25 * z2n / static_cast<double>(n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double exponent(double p, double horizon) {
  if (p <= 0.0) return std::numeric_limits<double>::infinity();
  return std::max(0.0, -std::log(p) / horizon);
}

}  // namespace

TailEstimate estimate_tail_exponent(const Chain& chain, StateIndex x0, const ObservableSpec& obs, double threshold,
                                    TailDirection direction, double horizon, std::uint64_t n_samples,
                                    std::uint64_t seed, unsigned threads) {
  require_horizon(horizon);
  if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  if (x0 >= chain.num_states()) throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  obs.validate(chain);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, n_samples));

  JumpSampler sampler(chain);
  std::vector<std::uint64_t> hits(threads, 0);
  auto work = [&](unsigned w) {
    std::uint64_t lo = n_samples * w / threads, hi = n_samples * (w + 1) / threads;
    std::uint64_t h = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      double v = sample_observable(sampler, x0, horizon, obs, seed, i);
      if (direction == TailDirection::AtLeast ? v >= threshold : v <= threshold) ++h;
    }
    hits[w] = h;
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }

  TailEstimate est;
  est.threshold = threshold;
  est.horizon = horizon;
  est.direction = direction;
  est.samples = n_samples;
  for (auto h : hits) est.hits += h;
  auto [p_lo, p_hi] = wilson(est.hits, n_samples);
  // The exponent is decreasing in p, so the interval endpoints swap.
  est.ci_low = exponent(p_hi, horizon);
  est.ci_high = exponent(p_lo, horizon);
  if (est.hits == 0) {
    est.is_bound = true;
    est.estimate = est.ci_low;
  } else {
    est.estimate = exponent(static_cast<double>(est.hits) / static_cast<double>(n_samples), horizon);
  }
  return est;
}

std::vector<double> HomologicalCoefficients::values() const {
  std::vector<double> v(numerators.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = static_cast<double>(numerators[k]) / horizon;
  return v;
}

HomologicalCoefficients homological_coefficients(const Chain& chain, const Trajectory& traj,
                                                 const FundamentalBasis& basis) {
  basis.require_chain(chain);
  chain.require_symmetric("homological_coefficients");
  HomologicalCoefficients out;
  out.horizon = traj.horizon;

  // Route (a): close the path with the tree and count chord crossings.
  Cycle closed = close_trajectory(traj, basis);
  auto s = edge_counts(chain, closed);
  // Route (b): net jump counts across each chord.
  auto counts = jump_counts(chain, traj);
  for (const auto& c : basis.chords()) {
    const auto& ue = chain.undirected(c.undirected);
    std::int64_t a = s[c.undirected];
    std::int64_t b = counts[ue.forward] - counts[ue.backward];
    if (a != b) {
      throw Error(ErrorCode::NumericalMismatch, "chord " + chain.label(c.from) + "->" + chain.label(c.to) +
                                                    ": closed-cycle count " + std::to_string(a) +
                                                    " != net jump count " + std::to_string(b));
    }
    out.numerators.push_back(a);
  }
  return out;
}

}  // namespace markovld
