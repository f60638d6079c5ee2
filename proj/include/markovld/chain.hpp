#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace markovld {

using StateIndex = std::size_t;
inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

/// Rates below this are treated as zero and rejected.
inline constexpr double kMinRate = 1e-300;
/// Dense balance solve cap for invariant_measure.
inline constexpr std::size_t kMaxDenseStates = 5000;

struct RawEdge {
  std::string from;
  std::string to;
  double rate = 0.0;
};

struct Edge {
  StateIndex from = 0;
  StateIndex to = 0;
  double rate = 0.0;
};

/// An unordered edge {lo, hi} of the symmetrized edge set, lo < hi. The
/// canonical orientation is lo -> hi; `forward` / `backward` index the
/// directed edges lo->hi / hi->lo when they exist.
struct UndirectedEdge {
  StateIndex lo = 0;
  StateIndex hi = 0;
  std::size_t forward = npos;
  std::size_t backward = npos;

  bool two_way() const { return forward != npos && backward != npos; }
};

/// Finite irreducible continuous-time Markov chain given by positive jump
/// rates on a directed edge set. Immutable after construction.
///
/// Directed edges are stored sorted by (from, to); unordered edges sorted by
/// (lo, hi). Every iteration over edges in the library uses these orders.
class Chain {
 public:
  /// Validates and indexes a rate list. States are indexed by first
  /// appearance unless `states` fixes the order; every state in `states`
  /// must be touched by some edge or the chain is not irreducible.
  static Chain build(std::span<const RawEdge> edges, std::span<const std::string> states = {});

  std::size_t num_states() const { return labels_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_undirected() const { return undirected_.size(); }

  const std::string& label(StateIndex x) const { return labels_.at(x); }
  std::span<const std::string> labels() const { return labels_; }
  std::optional<StateIndex> find_state(std::string_view label) const;
  /// Throws UnknownState.
  StateIndex state(std::string_view label) const;

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::span<const std::size_t> out_edges(StateIndex x) const;
  std::span<const std::size_t> in_edges(StateIndex x) const;

  /// Index of directed edge (y, z) or npos.
  std::size_t find_edge(StateIndex y, StateIndex z) const;
  /// Index of the reversed edge or npos.
  std::size_t reverse(std::size_t e) const { return reverse_.at(e); }
  double rate(StateIndex y, StateIndex z) const;
  double holding_rate(StateIndex x) const { return holding_.at(x); }
  std::span<const double> holding_rates() const { return holding_; }

  std::span<const UndirectedEdge> undirected_edges() const { return undirected_; }
  const UndirectedEdge& undirected(std::size_t u) const { return undirected_.at(u); }
  /// Unordered edge index of {y, z} or npos.
  std::size_t find_undirected(StateIndex y, StateIndex z) const;
  /// Unordered edge carrying directed edge e.
  std::size_t undirected_of(std::size_t e) const { return undirected_of_.at(e); }

  /// E = E_s: every edge has its reverse.
  bool is_symmetric() const { return symmetric_; }
  /// Throws NotSymmetricEdgeSet naming `operation` when E != E_s.
  void require_symmetric(std::string_view operation) const;

  /// Structural hash (labels, edges, rates) used to tie derived objects to
  /// the chain they were built from.
  std::uint64_t fingerprint() const { return fingerprint_; }

 private:
  Chain() = default;

  std::vector<std::string> labels_;
  std::unordered_map<std::string, StateIndex> index_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> reverse_;
  std::vector<std::size_t> out_offsets_, out_list_;
  std::vector<std::size_t> in_offsets_, in_list_;
  std::vector<double> holding_;
  std::vector<UndirectedEdge> undirected_;
  std::vector<std::size_t> undirected_of_;
  bool symmetric_ = false;
  std::uint64_t fingerprint_ = 0;
};

/// Probability vector indexed by state.
class ProbabilityMeasure {
 public:
  ProbabilityMeasure() = default;
  /// Validates nonnegativity and total mass 1 within 1e-12.
  explicit ProbabilityMeasure(std::vector<double> mass);

  static ProbabilityMeasure uniform(std::size_t n);
  static ProbabilityMeasure point_mass(std::size_t n, StateIndex x);
  /// Normalizes nonnegative weights (at least one positive).
  static ProbabilityMeasure normalized(std::vector<double> weights);

  std::size_t size() const { return mass_.size(); }
  double operator[](StateIndex x) const { return mass_[x]; }
  std::span<const double> mass() const { return mass_; }

 private:
  std::vector<double> mass_;
};

/// Nonnegative function on directed edges, aligned with Chain::edges().
struct Flow {
  std::vector<double> values;

  static Flow zero(const Chain& chain) { return Flow{std::vector<double>(chain.num_edges(), 0.0)}; }
  double at(const Chain& chain, StateIndex y, StateIndex z) const;
  double l1_norm() const;
  /// Throws InvalidArgument on size mismatch and NegativeFlow on negative entries.
  void validate(const Chain& chain) const;
};

/// Antisymmetric function on E_s stored once per unordered edge in the
/// canonical lo -> hi orientation. `at` applies the sign, so J(y,z) = -J(z,y)
/// holds by construction.
struct Current {
  std::vector<double> values;

  static Current zero(const Chain& chain) { return Current{std::vector<double>(chain.num_undirected(), 0.0)}; }
  /// 0 when {y,z} is not an edge.
  double at(const Chain& chain, StateIndex y, StateIndex z) const;
  /// Sets J(y,z) = value (and so J(z,y) = -value). Throws UnknownState if {y,z} is not an edge.
  void set(const Chain& chain, StateIndex y, StateIndex z, double value);
  /// Sum over unordered edges of |J|; half the l1 norm over E_s.
  double l1_half() const;
  Current operator-() const;
  void validate(const Chain& chain) const;
};

/// Antisymmetric edge functions (w_pi, force fields) share the current layout.
using AntisymmetricEdgeFunction = Current;

// ---------------------------------------------------------------------------
// chain_core operations

/// build_chain from (from, to, rate) triples.
Chain build_chain(std::span<const RawEdge> raw);

/// Unique invariant probability by dense GTH state reduction (componentwise
/// accurate). n <= kMaxDenseStates.
ProbabilityMeasure invariant_measure(const Chain& chain);

/// Max-norm residual of the balance equations.
double balance_residual(const Chain& chain, const ProbabilityMeasure& pi);

/// (Lf)(x) = sum_y r(x,y) [f(y) - f(x)].
std::vector<double> generator_apply(const Chain& chain, std::span<const double> f);

/// w_pi(y,z) = log[pi(y) r(y,z) / (pi(z) r(z,y))]. Requires E = E_s.
AntisymmetricEdgeFunction w_pi(const Chain& chain, const ProbabilityMeasure& pi);

struct LyapunovCertificate {
  std::vector<double> u;
  std::vector<double> v;  ///< v = -(Lu)/u
  double sigma = 0.0;
  double C = 0.0;  ///< minimal constant with v >= sigma r - C
  std::vector<StateIndex> argmax;  ///< states attaining C
};

/// Evaluates item (vi) of the Lyapunov condition for a single u > 0.
LyapunovCertificate check_condition_C(const Chain& chain, std::span<const double> u, double sigma);

enum class EdgeLikelihood { Unlabeled, Likely, Unlikely };

struct JumpLikelihood {
  std::vector<double> H;                 ///< per state
  std::vector<EdgeLikelihood> labels;    ///< per directed edge
};

/// H(y) = sum_{(y,z) in Ehat} r(y,z) / r(y) and the a-likely / a-unlikely
/// edge labels. `e_hat` lists directed edge indices. Throws MissingEhatEdge
/// when some state has no outgoing Ehat edge.
JumpLikelihood jump_likelihood_H(const Chain& chain, std::span<const std::size_t> e_hat, double a);

std::vector<double> divergence(const Chain& chain, const Flow& q);
std::vector<double> divergence(const Chain& chain, const Current& j);

/// Q^mu(y,z) = mu(y) r(y,z).
Flow reference_flow(const Chain& chain, const ProbabilityMeasure& mu);
/// J^mu = J_{Q^mu}.
Current reference_current(const Chain& chain, const ProbabilityMeasure& mu);
/// Canonical current J_Q.
Current current_of(const Chain& chain, const Flow& q);

/// True when every |div| <= tol * (1 + scale).
bool divergence_free(std::span<const double> div, double scale, double tol = 1e-12);

}  // namespace markovld
