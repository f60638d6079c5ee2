#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "markovld/chain.hpp"
#include "markovld/trajectory.hpp"

namespace markovld {

struct RateEvaluation;

/// Cyclic vertex string. The empty cycle is the zero of the cycle space.
struct Cycle {
  std::vector<StateIndex> vertices;

  bool empty() const { return vertices.empty(); }
  std::size_t length() const { return vertices.size(); }
  bool self_avoiding() const;
  Cycle reversed() const;
  /// Throws InvalidArgument if some cyclic pair is not an edge of `chain`.
  void validate(const Chain& chain) const;
};

/// Equality up to rotation.
bool same_cycle(const Cycle& a, const Cycle& b);

struct SpanningTree {
  StateIndex root = 0;
  std::vector<StateIndex> parent;  ///< npos at the root
  std::vector<std::size_t> depth;
  std::vector<bool> tree_edge;  ///< per unordered edge

  bool contains(const Chain& chain, StateIndex y, StateIndex z) const;
};

/// BFS tree of the unoriented graph, neighbours in increasing state index.
SpanningTree build_spanning_tree(const Chain& chain, StateIndex root);

/// Tree from an explicit parent map. Throws InvalidArgument unless it is a
/// spanning tree made of edges of the chain.
SpanningTree spanning_tree_from_parents(const Chain& chain, StateIndex root, std::span<const StateIndex> parent);

/// gamma_{y,z}: unique tree path from y to z, both endpoints included.
std::vector<StateIndex> tree_path(const SpanningTree& tree, StateIndex y, StateIndex z);

/// Non-tree edge oriented lo -> hi.
struct Chord {
  std::size_t undirected = npos;
  StateIndex from = 0;
  StateIndex to = 0;
};

std::vector<Chord> chords(const Chain& chain, const SpanningTree& tree);

/// The chord (y, z) followed by gamma_{z,y}. Throws ChordIsTreeEdge.
Cycle fundamental_cycle(const Chain& chain, const SpanningTree& tree, StateIndex y, StateIndex z);

class FundamentalBasis {
 public:
  FundamentalBasis(const Chain& chain, SpanningTree tree);
  FundamentalBasis(const Chain& chain, StateIndex root) : FundamentalBasis(chain, build_spanning_tree(chain, root)) {}

  const SpanningTree& tree() const { return tree_; }
  std::span<const Chord> chords() const { return chords_; }
  std::size_t size() const { return chords_.size(); }
  const Cycle& cycle(std::size_t k) const { return cycles_.at(k); }
  std::uint64_t chain_fingerprint() const { return fingerprint_; }
  /// Throws BasisChainMismatch if `chain` is not the chain this was built on.
  void require_chain(const Chain& chain) const;

 private:
  SpanningTree tree_;
  std::vector<Chord> chords_;
  std::vector<Cycle> cycles_;
  std::uint64_t fingerprint_;
};

/// S_{(y,z)}(C): traversals of y -> z minus traversals of z -> y.
std::int64_t edge_count_S(const Cycle& cycle, StateIndex y, StateIndex z);
/// S_e(C) for every unordered edge in its lo -> hi orientation. Throws
/// InvalidArgument if the cycle steps along a non-edge.
std::vector<std::int64_t> edge_counts(const Chain& chain, const Cycle& cycle);

/// Visited states followed by the interior of gamma_{X_T, X_0}.
Cycle close_trajectory(const Trajectory& traj, const FundamentalBasis& basis);

/// J_k: S_e(C_k) on every unordered edge.
Current chord_current(const Chain& chain, const FundamentalBasis& basis, std::size_t k);
/// sum_k a_k J_k.
Current assemble_current(const Chain& chain, const FundamentalBasis& basis, std::span<const double> a);

/// Coefficients J(c_k). Throws NonZeroDivergence, and NumericalMismatch if
/// the reconstruction misses J by more than 1e-10.
std::vector<double> decompose_current(const Chain& chain, const Current& j, const FundamentalBasis& basis);

struct WeightedCycle {
  Cycle cycle;
  double weight = 0.0;
};

/// Greedy decomposition of a divergence-free flow into self-avoiding cycles.
std::vector<WeightedCycle> peel_cycles(const Chain& chain, const Flow& q);

struct Affinity {
  double rate_ratio = 0.0;  ///< sum log r(x_j, x_{j+1}) / r(x_{j+1}, x_j)
  double half_s_w = 0.0;    ///< 1/2 sum_e S_e(C) w_pi(e)
  double value() const { return rate_ratio; }
};

/// Both forms of A(C); throws NumericalMismatch if they differ by more than
/// 1e-12 (relative to the size of the terms). Requires E = E_s.
Affinity affinity(const Chain& chain, const Cycle& cycle, const ProbabilityMeasure& pi);

/// I_c(a) = Ihat(sum_k a_k J_k).
RateEvaluation homological_rate_Ic(const Chain& chain, const FundamentalBasis& basis, std::span<const double> a);

}  // namespace markovld
