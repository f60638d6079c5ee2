#include "markovld/cycle_space.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "markovld/errors.hpp"
#include "markovld/rate_functions.hpp"

namespace markovld {

bool Cycle::self_avoiding() const {
  std::vector<StateIndex> v = vertices;
  std::sort(v.begin(), v.end());
  return std::adjacent_find(v.begin(), v.end()) == v.end();
}

Cycle Cycle::reversed() const {
  Cycle c{{vertices.rbegin(), vertices.rend()}};
  return c;
}

void Cycle::validate(const Chain& chain) const {
  const std::size_t k = vertices.size();
  if (k == 0) return;
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "a cycle needs at least two vertices");
  for (std::size_t i = 0; i < k; ++i) {
    StateIndex a = vertices[i], b = vertices[(i + 1) % k];
    if (chain.find_edge(a, b) == npos) {
      throw Error(ErrorCode::InvalidArgument, "cycle step " + chain.label(a) + "->" + chain.label(b) + " is not an edge");
    }
  }
}

bool same_cycle(const Cycle& a, const Cycle& b) {
  if (a.length() != b.length()) return false;
  if (a.empty()) return true;
  const std::size_t k = a.length();
  for (std::size_t shift = 0; shift < k; ++shift) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) ok = a.vertices[i] == b.vertices[(i + shift) % k];
    if (ok) return true;
  }
  return false;
}

bool SpanningTree::contains(const Chain& chain, StateIndex y, StateIndex z) const {
  std::size_t u = chain.find_undirected(y, z);
  return u != npos && tree_edge[u];
}

namespace {

std::vector<std::vector<StateIndex>> unoriented_neighbours(const Chain& chain) {
  std::vector<std::vector<StateIndex>> nb(chain.num_states());
  for (const auto& ue : chain.undirected_edges()) {
    nb[ue.lo].push_back(ue.hi);
    nb[ue.hi].push_back(ue.lo);
  }
  for (auto& v : nb) std::sort(v.begin(), v.end());
  return nb;
}

void finish_tree(const Chain& chain, SpanningTree& tree) {
  tree.tree_edge.assign(chain.num_undirected(), false);
  for (StateIndex x = 0; x < chain.num_states(); ++x) {
    if (tree.parent[x] == npos) continue;
    tree.tree_edge[chain.find_undirected(x, tree.parent[x])] = true;
  }
}

}  // namespace

SpanningTree build_spanning_tree(const Chain& chain, StateIndex root) {
  const std::size_t n = chain.num_states();
  if (root >= n) throw Error(ErrorCode::InvalidArgument, "root out of range");
  auto nb = unoriented_neighbours(chain);
  SpanningTree tree;
  tree.root = root;
  tree.parent.assign(n, npos);
  tree.depth.assign(n, npos);
  tree.depth[root] = 0;
  std::deque<StateIndex> queue{root};
  while (!queue.empty()) {
    StateIndex x = queue.front();
    queue.pop_front();
    for (StateIndex y : nb[x]) {
      if (tree.depth[y] != npos) continue;
      tree.depth[y] = tree.depth[x] + 1;
      tree.parent[y] = x;
      queue.push_back(y);
    }
  }
  finish_tree(chain, tree);
  return tree;
}

SpanningTree spanning_tree_from_parents(const Chain& chain, StateIndex root, std::span<const StateIndex> parent) {
  const std::size_t n = chain.num_states();
  if (root >= n || parent.size() != n) throw Error(ErrorCode::InvalidArgument, "parent map does not match chain");
  SpanningTree tree;
  tree.root = root;
  tree.parent.assign(parent.begin(), parent.end());
  if (tree.parent[root] != npos) throw Error(ErrorCode::InvalidArgument, "root must have no parent");
  tree.depth.assign(n, npos);
  tree.depth[root] = 0;
  for (StateIndex x = 0; x < n; ++x) {
    if (x == root) continue;
    StateIndex p = tree.parent[x];
    if (p >= n || chain.find_undirected(x, p) == npos) {
      throw Error(ErrorCode::InvalidArgument, "parent of '" + chain.label(x) + "' is not a neighbour");
    }
  }
  // Depths by walking up; a cycle in the parent map never reaches the root.
  for (StateIndex x = 0; x < n; ++x) {
    std::vector<StateIndex> chain_up;
    StateIndex y = x;
    while (tree.depth[y] == npos) {
      chain_up.push_back(y);
      if (chain_up.size() > n) throw Error(ErrorCode::InvalidArgument, "parent map contains a cycle");
      y = tree.parent[y];
    }
    for (auto it = chain_up.rbegin(); it != chain_up.rend(); ++it) tree.depth[*it] = tree.depth[tree.parent[*it]] + 1;
  }
  finish_tree(chain, tree);
  return tree;
}

std::vector<StateIndex> tree_path(const SpanningTree& tree, StateIndex y, StateIndex z) {
  std::vector<StateIndex> head, tail;
  while (tree.depth.at(y) > tree.depth.at(z)) {
    head.push_back(y);
    y = tree.parent[y];
  }
  while (tree.depth[z] > tree.depth[y]) {
    tail.push_back(z);
    z = tree.parent[z];
  }
  while (y != z) {
    head.push_back(y);
    tail.push_back(z);
    y = tree.parent[y];
    z = tree.parent[z];
  }
  head.push_back(y);
  head.insert(head.end(), tail.rbegin(), tail.rend());
  return head;
}

std::vector<Chord> chords(const Chain& chain, const SpanningTree& tree) {
  std::vector<Chord> out;
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    if (tree.tree_edge.at(u)) continue;
    const auto& ue = chain.undirected(u);
    out.push_back(Chord{u, ue.lo, ue.hi});
  }
  return out;
}

Cycle fundamental_cycle(const Chain& chain, const SpanningTree& tree, StateIndex y, StateIndex z) {
  std::size_t u = chain.find_undirected(y, z);
  if (u == npos) throw Error(ErrorCode::InvalidArgument, "chord is not an edge");
  if (tree.tree_edge.at(u)) {
    throw Error(ErrorCode::ChordIsTreeEdge, chain.label(y) + "-" + chain.label(z) + " belongs to the spanning tree");
  }
  auto back = tree_path(tree, z, y);
  Cycle c;
  c.vertices.push_back(y);
  c.vertices.insert(c.vertices.end(), back.begin(), back.end() - 1);
  return c;
}

FundamentalBasis::FundamentalBasis(const Chain& chain, SpanningTree tree)
    : tree_(std::move(tree)), fingerprint_(chain.fingerprint()) {
  if (tree_.parent.size() != chain.num_states() || tree_.tree_edge.size() != chain.num_undirected()) {
    throw Error(ErrorCode::BasisChainMismatch, "spanning tree does not match chain");
  }
  chords_ = markovld::chords(chain, tree_);
  cycles_.reserve(chords_.size());
  for (const auto& c : chords_) cycles_.push_back(fundamental_cycle(chain, tree_, c.from, c.to));
}

void FundamentalBasis::require_chain(const Chain& chain) const {
  if (chain.fingerprint() != fingerprint_) {
    throw Error(ErrorCode::BasisChainMismatch, "basis was built on a different chain");
  }
}

std::int64_t edge_count_S(const Cycle& cycle, StateIndex y, StateIndex z) {
  const std::size_t k = cycle.length();
  if (k < 2) return 0;
  std::int64_t s = 0;
  for (std::size_t i = 0; i < k; ++i) {
    StateIndex a = cycle.vertices[i], b = cycle.vertices[(i + 1) % k];
    if (a == y && b == z) ++s;
    if (a == z && b == y) --s;
  }
  return s;
}

std::vector<std::int64_t> edge_counts(const Chain& chain, const Cycle& cycle) {
  std::vector<std::int64_t> s(chain.num_undirected(), 0);
  const std::size_t k = cycle.length();
  if (k < 2) return s;
  for (std::size_t i = 0; i < k; ++i) {
    StateIndex a = cycle.vertices[i], b = cycle.vertices[(i + 1) % k];
    std::size_t u = chain.find_undirected(a, b);
    if (u == npos) {
      throw Error(ErrorCode::InvalidArgument, "cycle step " + chain.label(a) + "->" + chain.label(b) + " is not an edge");
    }
    s[u] += chain.undirected(u).lo == a ? 1 : -1;
  }
  return s;
}

Cycle close_trajectory(const Trajectory& traj, const FundamentalBasis& basis) {
  Cycle c;
  if (traj.jumps.empty()) return c;
  c.vertices.reserve(traj.jumps.size() + 1);
  c.vertices.push_back(traj.initial_state);
  for (const auto& j : traj.jumps) c.vertices.push_back(j.target);
  StateIndex x0 = traj.initial_state, xT = traj.final_state();
  if (xT == x0) {
    c.vertices.pop_back();
    return c;
  }
  auto gamma = tree_path(basis.tree(), xT, x0);
  c.vertices.insert(c.vertices.end(), gamma.begin() + 1, gamma.end() - 1);
  return c;
}

Current chord_current(const Chain& chain, const FundamentalBasis& basis, std::size_t k) {
  basis.require_chain(chain);
  auto s = edge_counts(chain, basis.cycle(k));
  Current j = Current::zero(chain);
  for (std::size_t u = 0; u < s.size(); ++u) j.values[u] = static_cast<double>(s[u]);
  return j;
}

Current assemble_current(const Chain& chain, const FundamentalBasis& basis, std::span<const double> a) {
  basis.require_chain(chain);
  if (a.size() != basis.size()) throw Error(ErrorCode::InvalidArgument, "one coefficient per chord expected");
  Current j = Current::zero(chain);
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k] == 0.0) continue;
    auto s = edge_counts(chain, basis.cycle(k));
    for (std::size_t u = 0; u < s.size(); ++u) {
      if (s[u] != 0) j.values[u] += a[k] * static_cast<double>(s[u]);
    }
  }
  return j;
}

std::vector<double> decompose_current(const Chain& chain, const Current& j, const FundamentalBasis& basis) {
  basis.require_chain(chain);
  j.validate(chain);
  if (!divergence_free(divergence(chain, j), j.l1_half())) {
    throw Error(ErrorCode::NonZeroDivergence, "current is not divergence free");
  }
  std::vector<double> a(basis.size());
  for (std::size_t k = 0; k < a.size(); ++k) a[k] = j.values[basis.chords()[k].undirected];
  Current back = assemble_current(chain, basis, a);
  for (std::size_t u = 0; u < j.values.size(); ++u) {
    if (std::abs(back.values[u] - j.values[u]) > 1e-10 * (1.0 + j.l1_half())) {
      throw Error(ErrorCode::NumericalMismatch, "chord reconstruction does not reproduce the current");
    }
  }
  return a;
}

std::vector<WeightedCycle> peel_cycles(const Chain& chain, const Flow& q) {
  q.validate(chain);
  const double norm = q.l1_norm();
  if (!divergence_free(divergence(chain, q), norm)) throw Error(ErrorCode::NonZeroDivergence, "flow is not divergence free");
  const double tol = 1e-12 * norm;
  std::vector<double> rest = q.values;
  for (double& v : rest) {
    if (v <= tol) v = 0.0;
  }
  auto next_edge = [&](StateIndex x) -> std::size_t {
    // out_edges are sorted by target, so the first positive one has the smallest successor index
    for (std::size_t e : chain.out_edges(x)) {
      if (rest[e] > 0.0) return e;
    }
    return npos;
  };

  std::vector<WeightedCycle> out;
  std::vector<std::size_t> seen(chain.num_states(), npos);
  for (StateIndex start = 0; start < chain.num_states(); ++start) {
    while (next_edge(start) != npos) {
      std::vector<StateIndex> walk;
      std::vector<std::size_t> walk_edges;
      StateIndex x = start;
      while (seen[x] == npos) {
        std::size_t e = next_edge(x);
        if (e == npos) break;  // residual imbalance below tolerance
        seen[x] = walk.size();
        walk.push_back(x);
        walk_edges.push_back(e);
        x = chain.edge(e).to;
      }
      if (seen[x] == npos) {
        // dead end: drop the stranded residue to guarantee termination
        for (std::size_t e : walk_edges) rest[e] = 0.0;
        for (StateIndex v : walk) seen[v] = npos;
        continue;
      }
      std::size_t from = seen[x];
      double w = std::numeric_limits<double>::infinity();
      for (std::size_t i = from; i < walk_edges.size(); ++i) w = std::min(w, rest[walk_edges[i]]);
      WeightedCycle wc{Cycle{{walk.begin() + static_cast<std::ptrdiff_t>(from), walk.end()}}, w};
      for (std::size_t i = from; i < walk_edges.size(); ++i) {
        double& r = rest[walk_edges[i]];
        r -= w;
        if (r <= tol) r = 0.0;
      }
      for (StateIndex v : walk) seen[v] = npos;
      out.push_back(std::move(wc));
    }
  }
  return out;
}

Affinity affinity(const Chain& chain, const Cycle& cycle, const ProbabilityMeasure& pi) {
  chain.require_symmetric("affinity");
  cycle.validate(chain);
  Affinity a;
  const std::size_t k = cycle.length();
  double scale = 0.0;
  for (std::size_t i = 0; i < k && k >= 2; ++i) {
    StateIndex x = cycle.vertices[i], y = cycle.vertices[(i + 1) % k];
    double term = std::log(chain.rate(x, y) / chain.rate(y, x));
    a.rate_ratio += term;
    scale += std::abs(term);
  }
  auto w = w_pi(chain, pi);
  auto s = edge_counts(chain, cycle);
  for (std::size_t u = 0; u < s.size(); ++u) {
    if (s[u] == 0) continue;
    a.half_s_w += static_cast<double>(s[u]) * w.values[u];
    scale += std::abs(static_cast<double>(s[u]) * w.values[u]);
  }
  // 1/2 sum over E_s counts each unordered edge twice, so the half cancels.
  if (std::abs(a.rate_ratio - a.half_s_w) > 1e-12 * (1.0 + scale)) {
    throw Error(ErrorCode::NumericalMismatch, "affinity forms disagree: " + std::to_string(a.rate_ratio) + " vs " +
                                                  std::to_string(a.half_s_w));
  }
  return a;
}

RateEvaluation homological_rate_Ic(const Chain& chain, const FundamentalBasis& basis, std::span<const double> a) {
  Current j = assemble_current(chain, basis, a);
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    const auto& ue = chain.undirected(u);
    if (ue.two_way()) continue;
    double along_e = ue.forward != npos ? j.values[u] : -j.values[u];
    if (along_e < 0.0) {
      RateEvaluation r;
      r.value = ExtendedReal::infinity();
      return r;
    }
  }
  return current_rate_contracted(chain, j);
}

}  // namespace markovld
