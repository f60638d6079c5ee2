#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "markovld/chain.hpp"

namespace markovld {

class FundamentalBasis;

struct Jump {
  double time = 0.0;
  StateIndex target = 0;
};

/// One path on [0, T]. Sources are implied by the previous target.
struct Trajectory {
  StateIndex initial_state = 0;
  std::vector<Jump> jumps;
  double horizon = 0.0;

  StateIndex final_state() const { return jumps.empty() ? initial_state : jumps.back().target; }
  /// Throws InvalidArgument if times are not strictly increasing in (0, T]
  /// or a jump does not follow an edge of `chain`.
  void validate(const Chain& chain) const;
};

/// Per-state cumulative rate tables for drawing the next state.
class JumpSampler {
 public:
  explicit JumpSampler(const Chain& chain);

  const Chain& chain() const { return *chain_; }
  /// Directed edge index chosen with probability r(x, z) / r(x).
  std::size_t draw_edge(StateIndex x, double u) const;

 private:
  const Chain* chain_;
  std::vector<double> cumulative_;  // aligned with Chain::out_edges order
};

/// Exact simulation with exponential holding times. Replica `stream` of
/// `seed` is an independent Philox stream.
Trajectory simulate(const Chain& chain, StateIndex x0, double horizon, std::uint64_t seed, std::uint64_t stream = 0);

ProbabilityMeasure empirical_measure(const Chain& chain, const Trajectory& traj);
/// Jump counts per directed edge; T * Q_T.
std::vector<std::int64_t> jump_counts(const Chain& chain, const Trajectory& traj);
Flow empirical_flow(const Chain& chain, const Trajectory& traj);
Current empirical_current(const Chain& chain, const Trajectory& traj);

/// W_T = 1/2 <J_T, w> summed over E_s. Requires E = E_s.
double gc_functional(const Chain& chain, const Trajectory& traj, const AntisymmetricEdgeFunction& w);

/// Linear functional <mu_T, state_weights> + <Q_T, edge_weights>. Empty
/// weight vectors mean zero.
struct ObservableSpec {
  std::vector<double> state_weights;  ///< per state
  std::vector<double> edge_weights;   ///< per directed edge

  void validate(const Chain& chain) const;
  double state_weight(StateIndex x) const { return state_weights.empty() ? 0.0 : state_weights[x]; }
  double edge_weight(std::size_t e) const { return edge_weights.empty() ? 0.0 : edge_weights[e]; }

  /// All edges weighted 1: the total jump rate q_T.
  static ObservableSpec total_flow(const Chain& chain);
  /// Indicator of one state.
  static ObservableSpec occupation(const Chain& chain, StateIndex x);
  /// J_T(y, z) = Q_T(y, z) - Q_T(z, y).
  static ObservableSpec current_on(const Chain& chain, StateIndex y, StateIndex z);
  /// Edge weights w(e); the sum over both orientations reproduces W_T.
  static ObservableSpec gallavotti_cohen(const Chain& chain, const AntisymmetricEdgeFunction& w);
};

double evaluate_observable(const Chain& chain, const Trajectory& traj, const ObservableSpec& obs);

/// Simulates one replica and returns the observable without storing the path.
double sample_observable(const JumpSampler& sampler, StateIndex x0, double horizon, const ObservableSpec& obs,
                         std::uint64_t seed, std::uint64_t stream);

enum class TailDirection { AtLeast, AtMost };

struct TailEstimate {
  double threshold = 0.0;
  double horizon = 0.0;
  TailDirection direction = TailDirection::AtLeast;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
  /// -(1/T) log(hits / samples); with zero hits, the lower bound from the
  /// Wilson upper limit instead.
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool is_bound = false;
};

/// Plain Monte Carlo estimate of -(1/T) log P(obs_T >= threshold) (or <=).
/// Replica i uses stream i of `seed`; `threads` = 0 picks hardware concurrency.
TailEstimate estimate_tail_exponent(const Chain& chain, StateIndex x0, const ObservableSpec& obs, double threshold,
                                    TailDirection direction, double horizon, std::uint64_t n_samples,
                                    std::uint64_t seed, unsigned threads = 0);

/// Chord coordinates of a trajectory: integer numerators over T.
struct HomologicalCoefficients {
  std::vector<std::int64_t> numerators;  ///< per chord, S_c(C_T)
  double horizon = 0.0;

  std::vector<double> values() const;
};

/// Computes a_T(k) from the closed cycle C_T and from J_T at the chords,
/// and throws NumericalMismatch if the integer numerators differ.
HomologicalCoefficients homological_coefficients(const Chain& chain, const Trajectory& traj,
                                                 const FundamentalBasis& basis);

}  // namespace markovld
