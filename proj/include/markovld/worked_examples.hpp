#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "markovld/chain.hpp"

namespace markovld {

// --- two states ------------------------------------------------------------

/// Chain on {"0","1"} with r(0,1) = r0, r(1,0) = r1.
Chain build_two_state(double r0, double r1);
/// Rate function of q_T = Q_T(0,1) + Q_T(1,0). Throws NegativeLevel.
double two_state_rate(double r0, double r1, double q);
ProbabilityMeasure two_state_optimal_mu(double r0, double r1, double q);
/// LLN value 2 r0 r1 / (r0 + r1).
double two_state_mean_flow(double r0, double r1);

// --- random watch ----------------------------------------------------------

struct WatchSpec {
  std::vector<double> rates;  ///< r_0 .. r_{n-1}, n >= 2
  void validate() const;
  double r_min() const;
};

/// One-way ring 0 -> 1 -> ... -> n-1 -> 0 with r(i, i+1) = r_i.
Chain build_watch_chain(const WatchSpec& spec);
/// 1/R(lambda) = sum_i 1/(r_i + lambda), lambda > -r_min.
double watch_R(const WatchSpec& spec, double lambda);
/// Inverse of R by bisection; q > 0.
double watch_R_inverse(const WatchSpec& spec, double q);
/// Rate function of N_T / T, with f(0) = r_min.
double watch_rate(const WatchSpec& spec, double q);
ProbabilityMeasure watch_optimal_mu(const WatchSpec& spec, double q);

// --- ring --------------------------------------------------------------------

/// Nearest-neighbour walk on Z/NZ: x -> x+1 at rate lambda p, x -> x-1 at
/// rate lambda (1-p). N >= 3.
Chain build_ring_chain(std::size_t N, double lambda, double p);
/// Lambda_N(alpha) = lambda p e^{alpha/N} + lambda (1-p) e^{-alpha/N} - lambda.
double ring_scgf(std::size_t N, double lambda, double p, double alpha);

enum class RingRoute { ClosedForm, Legendre };

/// W_N(j), the rate function of the current across one edge.
double ring_rate(std::size_t N, double lambda, double p, double j, RingRoute route = RingRoute::ClosedForm);
/// Stationary current lambda (2p - 1) / N.
double ring_mean_current(std::size_t N, double lambda, double p);

// --- birth and death -------------------------------------------------------

using LevelRate = std::function<double(std::size_t)>;

/// Chain on {0..K}: k -> k+1 at rate b(k) for k < K, k -> k-1 at rate d(k) for k >= 1.
Chain build_birth_death(const LevelRate& b, const LevelRate& d, std::size_t K);

enum class BirthDeathClass { StrongTopology, FailsStrongTopology, Inconclusive };

/// Asymptotic facts the user asserts about the infinite family. Unset
/// fields are estimated from the truncation window.
struct BirthDeathDeclaration {
  std::optional<bool> death_diverges;
  std::optional<bool> ratio_limsup_below_one;
  std::optional<bool> ratio_tends_to_zero;
  std::optional<bool> ratio_liminf_positive;
};

struct BirthDeathReport {
  BirthDeathClass classification = BirthDeathClass::Inconclusive;
  std::vector<double> ratios;  ///< b_k / d_k for k = 1..K
  std::string reason;
};

BirthDeathReport topology_criterion(const LevelRate& b, const LevelRate& d, std::size_t K,
                                    const BirthDeathDeclaration& declared = {});
std::string to_string(BirthDeathClass c);

// --- confined walk in two dimensions -----------------------------------------

enum class WalkNorm { LInfinity, L1 };

struct ConfinedWalkSpec {
  WalkNorm norm = WalkNorm::LInfinity;
  std::function<double(int)> radial_profile;  ///< U~(level)
  std::vector<double> amplitudes;             ///< c_k for level k = 1..R (index k-1)
  int radius = 1;
};

struct ConfinedWalk {
  Chain chain;
  std::vector<double> potential;     ///< U per state
  AntisymmetricEdgeFunction field;   ///< F per unordered edge
  std::vector<std::vector<StateIndex>> rings;  ///< counterclockwise level rings, k = 1..R
};

/// States "x,y" with max(|x|,|y|) <= R; rates exp{-(U(z)-U(y))/2 + F(y,z)/2}.
/// F = c_k counterclockwise along the level-k ring and 0 on radial edges.
/// Throws UnsupportedNorm for the l1 norm.
ConfinedWalk build_confined_walk_2d(const ConfinedWalkSpec& spec);

/// max_y | sum_z r0(y,z) sinh(F(y,z)/2) | with F recovered from the rates.
double verify_field_orthogonality(const Chain& chain, const std::vector<double>& potential);

// --- ladder ------------------------------------------------------------------

/// Two rows of n vertices joined by rungs, indexed bottom 1..n then top n..1
/// so that a BFS from the bottom-left corner gives the comb tree. Labels are
/// "b1".."bn" and "t1".."tn". Horizontal edges go right at `right`, left at
/// `left`; rungs at `rung` both ways.
Chain build_ladder(std::size_t n, double right = 1.0, double left = 1.0, double rung = 1.0);

// --- presets -----------------------------------------------------------------

struct Preset {
  std::string name;
  Chain chain;
  std::map<std::string, double> params;
  std::vector<double> potential;  ///< confined walk only
};

/// "two-state", "watch", "ring", "birth-death", "confined-walk", "ladder".
/// Unknown parameter names throw InvalidArgument.
Preset load_preset(const std::string& name, const std::map<std::string, double>& overrides = {});
std::vector<std::string> preset_names();

}  // namespace markovld
