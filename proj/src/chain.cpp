#include "markovld/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <sstream>

#include "markovld/errors.hpp"

namespace markovld {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Tarjan's algorithm, iterative. Returns the component id of every vertex;
// ids are assigned in reverse topological order (sinks first).
std::vector<std::size_t> strong_components(std::size_t n, const std::vector<std::size_t>& offsets,
                                           const std::vector<std::size_t>& targets,
                                           std::size_t& count) {
  std::vector<std::size_t> index(n, npos), low(n, 0), comp(n, npos), stack;
  std::vector<bool> on_stack(n, false);
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (vertex, next edge)
  std::size_t next_index = 0;
  count = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (index[s] != npos) continue;
    call.emplace_back(s, offsets[s]);
    index[s] = low[s] = next_index++;
    stack.push_back(s);
    on_stack[s] = true;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      if (it < offsets[v + 1]) {
        std::size_t w = targets[it++];
        if (index[w] == npos) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, offsets[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      std::size_t finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return comp;
}

}  // namespace

Chain Chain::build(std::span<const RawEdge> raw, std::span<const std::string> states) {
  Chain c;
  auto intern = [&c](const std::string& label) -> StateIndex {
    if (label.empty()) throw Error(ErrorCode::InvalidArgument, "empty state label");
    auto [it, inserted] = c.index_.try_emplace(label, c.labels_.size());
    if (inserted) c.labels_.push_back(label);
    return it->second;
  };
  for (const auto& s : states) {
    if (c.index_.count(s)) throw Error(ErrorCode::InvalidArgument, "duplicate state label '" + s + "'");
    intern(s);
  }
  const bool fixed_states = !states.empty();

  for (const auto& r : raw) {
    if (r.from == r.to) throw Error(ErrorCode::SelfLoop, "self-loop at state '" + r.from + "'");
    if (!std::isfinite(r.rate)) throw Error(ErrorCode::InvalidArgument, "non-finite rate on " + r.from + "->" + r.to);
    if (!(r.rate >= kMinRate)) {
      throw Error(ErrorCode::NonPositiveRate, "rate " + std::to_string(r.rate) + " on " + r.from + "->" + r.to);
    }
    for (const auto* l : {&r.from, &r.to}) {
      if (fixed_states && !c.index_.count(*l)) throw Error(ErrorCode::UnknownState, "undeclared state '" + *l + "'");
    }
    StateIndex y = intern(r.from);
    StateIndex z = intern(r.to);
    c.edges_.push_back(Edge{y, z, r.rate});
  }
  const std::size_t n = c.labels_.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "chain has no states");

  std::sort(c.edges_.begin(), c.edges_.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  for (std::size_t e = 1; e < c.edges_.size(); ++e) {
    if (c.edges_[e].from == c.edges_[e - 1].from && c.edges_[e].to == c.edges_[e - 1].to) {
      throw Error(ErrorCode::DuplicateEdge,
                  "duplicate edge " + c.labels_[c.edges_[e].from] + "->" + c.labels_[c.edges_[e].to]);
    }
  }

  const std::size_t m = c.edges_.size();
  c.out_offsets_.assign(n + 1, 0);
  c.in_offsets_.assign(n + 1, 0);
  for (const auto& e : c.edges_) {
    ++c.out_offsets_[e.from + 1];
    ++c.in_offsets_[e.to + 1];
  }
  std::partial_sum(c.out_offsets_.begin(), c.out_offsets_.end(), c.out_offsets_.begin());
  std::partial_sum(c.in_offsets_.begin(), c.in_offsets_.end(), c.in_offsets_.begin());
  c.out_list_.resize(m);
  c.in_list_.resize(m);
  {
    auto out_pos = c.out_offsets_;
    auto in_pos = c.in_offsets_;
    for (std::size_t e = 0; e < m; ++e) {
      c.out_list_[out_pos[c.edges_[e].from]++] = e;
      c.in_list_[in_pos[c.edges_[e].to]++] = e;
    }
  }

  // Irreducibility first: a chain with a dead state among others is reported
  // as reducible, naming a closed class.
  std::vector<std::size_t> targets(m);
  for (std::size_t e = 0; e < m; ++e) targets[e] = c.edges_[e].to;
  std::size_t ncomp = 0;
  auto comp = strong_components(n, c.out_offsets_, targets, ncomp);
  if (ncomp > 1) {
    // Component 0 is a sink: nothing leaves it.
    std::ostringstream os;
    os << "closed class {";
    bool first = true;
    for (std::size_t x = 0; x < n; ++x) {
      if (comp[x] != 0) continue;
      os << (first ? "" : ", ") << c.labels_[x];
      first = false;
    }
    os << "} cannot reach the remaining " << ncomp - 1 << " component(s)";
    throw Error(ErrorCode::NotIrreducible, os.str());
  }

  c.holding_.assign(n, 0.0);
  for (const auto& e : c.edges_) c.holding_[e.from] += e.rate;
  for (std::size_t x = 0; x < n; ++x) {
    if (c.holding_[x] <= 0.0) throw Error(ErrorCode::DeadState, "state '" + c.labels_[x] + "' has no outgoing edge");
  }

  c.reverse_.assign(m, npos);
  for (std::size_t e = 0; e < m; ++e) c.reverse_[e] = c.find_edge(c.edges_[e].to, c.edges_[e].from);
  c.symmetric_ = std::none_of(c.reverse_.begin(), c.reverse_.end(), [](std::size_t r) { return r == npos; });

  c.undirected_of_.assign(m, npos);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& ed = c.edges_[e];
    StateIndex lo = std::min(ed.from, ed.to), hi = std::max(ed.from, ed.to);
    if (ed.from == lo) {
      UndirectedEdge u{lo, hi, e, c.reverse_[e]};
      c.undirected_.push_back(u);
    } else if (c.reverse_[e] == npos) {
      c.undirected_.push_back(UndirectedEdge{lo, hi, npos, e});
    }
  }
  std::sort(c.undirected_.begin(), c.undirected_.end(),
            [](const UndirectedEdge& a, const UndirectedEdge& b) { return std::tie(a.lo, a.hi) < std::tie(b.lo, b.hi); });
  for (std::size_t u = 0; u < c.undirected_.size(); ++u) {
    if (c.undirected_[u].forward != npos) c.undirected_of_[c.undirected_[u].forward] = u;
    if (c.undirected_[u].backward != npos) c.undirected_of_[c.undirected_[u].backward] = u;
  }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& l : c.labels_) {
    h = fnv1a(h, l.data(), l.size());
    h = fnv1a(h, "\0", 1);
  }
  for (const auto& e : c.edges_) {
    h = fnv1a(h, &e.from, sizeof e.from);
    h = fnv1a(h, &e.to, sizeof e.to);
    auto bits = std::bit_cast<std::uint64_t>(e.rate);
    h = fnv1a(h, &bits, sizeof bits);
  }
  c.fingerprint_ = h;
  return c;
}

std::optional<StateIndex> Chain::find_state(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

StateIndex Chain::state(std::string_view label) const {
  auto s = find_state(label);
  if (!s) throw Error(ErrorCode::UnknownState, "unknown state '" + std::string(label) + "'");
  return *s;
}

std::span<const std::size_t> Chain::out_edges(StateIndex x) const {
  return std::span<const std::size_t>(out_list_).subspan(out_offsets_.at(x), out_offsets_[x + 1] - out_offsets_[x]);
}

std::span<const std::size_t> Chain::in_edges(StateIndex x) const {
  return std::span<const std::size_t>(in_list_).subspan(in_offsets_.at(x), in_offsets_[x + 1] - in_offsets_[x]);
}

std::size_t Chain::find_edge(StateIndex y, StateIndex z) const {
  if (y >= num_states() || z >= num_states()) return npos;
  auto outs = out_edges(y);
  // out lists are sorted by target because edges_ is sorted by (from, to)
  auto it = std::lower_bound(outs.begin(), outs.end(), z,
                             [this](std::size_t e, StateIndex t) { return edges_[e].to < t; });
  if (it != outs.end() && edges_[*it].to == z) return *it;
  return npos;
}

double Chain::rate(StateIndex y, StateIndex z) const {
  std::size_t e = find_edge(y, z);
  return e == npos ? 0.0 : edges_[e].rate;
}

std::size_t Chain::find_undirected(StateIndex y, StateIndex z) const {
  std::size_t e = find_edge(y, z);
  if (e == npos) e = find_edge(z, y);
  return e == npos ? npos : undirected_of_[e];
}

void Chain::require_symmetric(std::string_view operation) const {
  if (symmetric_) return;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (reverse_[e] == npos) {
      throw Error(ErrorCode::NotSymmetricEdgeSet, std::string(operation) + " requires E = E_s; edge " +
                                                      labels_[edges_[e].from] + "->" + labels_[edges_[e].to] +
                                                      " has no reverse");
    }
  }
}

// ---------------------------------------------------------------------------

ProbabilityMeasure::ProbabilityMeasure(std::vector<double> mass) : mass_(std::move(mass)) {
  double total = 0.0;
  for (double m : mass_) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "probability mass must be >= 0");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "probability masses sum to " + std::to_string(total));
  }
}

ProbabilityMeasure ProbabilityMeasure::uniform(std::size_t n) {
  return normalized(std::vector<double>(n, 1.0));
}

ProbabilityMeasure ProbabilityMeasure::point_mass(std::size_t n, StateIndex x) {
  std::vector<double> m(n, 0.0);
  m.at(x) = 1.0;
  return ProbabilityMeasure(std::move(m));
}

ProbabilityMeasure ProbabilityMeasure::normalized(std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights sum to zero");
  for (double& w : weights) w /= total;
  ProbabilityMeasure p;
  p.mass_ = std::move(weights);
  return p;
}

double Flow::at(const Chain& chain, StateIndex y, StateIndex z) const {
  std::size_t e = chain.find_edge(y, z);
  return e == npos ? 0.0 : values.at(e);
}

double Flow::l1_norm() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

void Flow::validate(const Chain& chain) const {
  if (values.size() != chain.num_edges()) throw Error(ErrorCode::InvalidArgument, "flow size does not match chain");
  for (std::size_t e = 0; e < values.size(); ++e) {
    if (!(values[e] >= 0.0) || !std::isfinite(values[e])) {
      throw Error(ErrorCode::NegativeFlow, "flow on edge " + chain.label(chain.edge(e).from) + "->" +
                                               chain.label(chain.edge(e).to) + " is " + std::to_string(values[e]));
    }
  }
}

double Current::at(const Chain& chain, StateIndex y, StateIndex z) const {
  std::size_t u = chain.find_undirected(y, z);
  if (u == npos) return 0.0;
  return chain.undirected(u).lo == y ? values.at(u) : -values.at(u);
}

void Current::set(const Chain& chain, StateIndex y, StateIndex z, double value) {
  std::size_t u = chain.find_undirected(y, z);
  if (u == npos) throw Error(ErrorCode::UnknownState, "no edge between " + chain.label(y) + " and " + chain.label(z));
  values.at(u) = chain.undirected(u).lo == y ? value : -value;
}

double Current::l1_half() const {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

Current Current::operator-() const {
  Current r = *this;
  for (double& v : r.values) v = -v;
  return r;
}

void Current::validate(const Chain& chain) const {
  if (values.size() != chain.num_undirected()) throw Error(ErrorCode::InvalidArgument, "current size does not match chain");
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite current value");
  }
}

// ---------------------------------------------------------------------------

Chain build_chain(std::span<const RawEdge> raw) { return Chain::build(raw); }

double balance_residual(const Chain& chain, const ProbabilityMeasure& pi) {
  std::vector<double> net(chain.num_states(), 0.0);
  for (const auto& e : chain.edges()) {
    double f = pi[e.from] * e.rate;
    net[e.from] += f;
    net[e.to] -= f;
  }
  double r = 0.0;
  for (double v : net) r = std::max(r, std::abs(v));
  return r;
}

ProbabilityMeasure invariant_measure(const Chain& chain) {
  const std::size_t n = chain.num_states();
  if (n > kMaxDenseStates) {
    throw Error(ErrorCode::StateSpaceTooLarge,
                std::to_string(n) + " states exceeds the dense solver cap of " + std::to_string(kMaxDenseStates));
  }
  if (n == 1) return ProbabilityMeasure::point_mass(1, 0);
  // Grassmann-Taksar-Heyman state reduction. No subtractions, so every mass
  // carries a small relative error, which log-ratios such as w_pi need.
  const Eigen::Index N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (const auto& e : chain.edges()) A(static_cast<Eigen::Index>(e.from), static_cast<Eigen::Index>(e.to)) += e.rate;
  Eigen::VectorXd out(N);
  for (Eigen::Index k = N - 1; k > 0; --k) {
    double s = A.row(k).head(k).sum();
    if (!(s > 0.0)) throw Error(ErrorCode::SingularSystem, "state reduction met a zero pivot");
    out(k) = s;
    for (Eigen::Index i = 0; i < k; ++i) {
      double f = A(i, k) / s;
      if (f != 0.0) A.row(i).head(k) += f * A.row(k).head(k);
    }
  }
  std::vector<double> mass(n);
  mass[0] = 1.0;
  for (Eigen::Index k = 1; k < N; ++k) {
    double in = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) in += mass[static_cast<std::size_t>(i)] * A(i, k);
    double v = in / out(k);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::SingularSystem, "non-positive invariant mass at state '" + chain.label(static_cast<std::size_t>(k)) + "'");
    }
    mass[static_cast<std::size_t>(k)] = v;
  }
  ProbabilityMeasure pi = ProbabilityMeasure::normalized(std::move(mass));
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, pi[i] * chain.holding_rate(i));
  if (balance_residual(chain, pi) > 1e-10 * scale) {
    throw Error(ErrorCode::SingularSystem, "balance residual " + std::to_string(balance_residual(chain, pi)));
  }
  return pi;
}

std::vector<double> generator_apply(const Chain& chain, std::span<const double> f) {
  if (f.size() != chain.num_states()) throw Error(ErrorCode::InvalidArgument, "function size does not match chain");
  std::vector<double> out(chain.num_states(), 0.0);
  for (const auto& e : chain.edges()) out[e.from] += e.rate * (f[e.to] - f[e.from]);
  return out;
}

AntisymmetricEdgeFunction w_pi(const Chain& chain, const ProbabilityMeasure& pi) {
  chain.require_symmetric("w_pi");
  Current w = Current::zero(chain);
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    const auto& ue = chain.undirected(u);
    if (!(pi[ue.lo] > 0.0 && pi[ue.hi] > 0.0)) throw Error(ErrorCode::DomainError, "w_pi needs pi > 0");
    double fwd = pi[ue.lo] * chain.edge(ue.forward).rate;
    double bwd = pi[ue.hi] * chain.edge(ue.backward).rate;
    w.values[u] = std::log(fwd / bwd);
  }
  return w;
}

LyapunovCertificate check_condition_C(const Chain& chain, std::span<const double> u, double sigma) {
  if (u.size() != chain.num_states()) throw Error(ErrorCode::InvalidArgument, "u size does not match chain");
  for (double x : u) {
    if (!(x > 0.0)) throw Error(ErrorCode::InvalidArgument, "u must be strictly positive");
  }
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma must be >= 0");
  LyapunovCertificate cert;
  cert.u.assign(u.begin(), u.end());
  cert.sigma = sigma;
  auto Lu = generator_apply(chain, u);
  cert.v.resize(u.size());
  cert.C = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < u.size(); ++x) {
    cert.v[x] = -Lu[x] / u[x];
    cert.C = std::max(cert.C, sigma * chain.holding_rate(x) - cert.v[x]);
  }
  for (std::size_t x = 0; x < u.size(); ++x) {
    double slack = sigma * chain.holding_rate(x) - cert.v[x];
    if (slack >= cert.C - 1e-12 * (1.0 + std::abs(cert.C))) cert.argmax.push_back(x);
  }
  return cert;
}

JumpLikelihood jump_likelihood_H(const Chain& chain, std::span<const std::size_t> e_hat, double a) {
  if (!(a > 0.0 && a < 1.0)) throw Error(ErrorCode::InvalidArgument, "a must lie in (0,1)");
  std::vector<bool> in_hat(chain.num_edges(), false);
  for (std::size_t e : e_hat) {
    if (e >= chain.num_edges()) throw Error(ErrorCode::InvalidArgument, "Ehat edge index out of range");
    in_hat[e] = true;
  }
  JumpLikelihood out;
  out.H.assign(chain.num_states(), 0.0);
  for (StateIndex y = 0; y < chain.num_states(); ++y) {
    double num = 0.0;
    bool any = false;
    for (std::size_t e : chain.out_edges(y)) {
      if (in_hat[e]) {
        num += chain.edge(e).rate;
        any = true;
      }
    }
    if (!any) throw Error(ErrorCode::MissingEhatEdge, "state '" + chain.label(y) + "' has no outgoing Ehat edge");
    out.H[y] = num / chain.holding_rate(y);
  }
  out.labels.assign(chain.num_edges(), EdgeLikelihood::Unlabeled);
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    if (out.H[chain.edge(e).from] < a) out.labels[e] = in_hat[e] ? EdgeLikelihood::Unlikely : EdgeLikelihood::Likely;
  }
  return out;
}

std::vector<double> divergence(const Chain& chain, const Flow& q) {
  if (q.values.size() != chain.num_edges()) throw Error(ErrorCode::InvalidArgument, "flow size does not match chain");
  std::vector<double> div(chain.num_states(), 0.0);
  for (std::size_t e = 0; e < chain.num_edges(); ++e) {
    div[chain.edge(e).from] += q.values[e];
    div[chain.edge(e).to] -= q.values[e];
  }
  return div;
}

std::vector<double> divergence(const Chain& chain, const Current& j) {
  if (j.values.size() != chain.num_undirected()) throw Error(ErrorCode::InvalidArgument, "current size does not match chain");
  std::vector<double> div(chain.num_states(), 0.0);
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    div[chain.undirected(u).lo] += j.values[u];
    div[chain.undirected(u).hi] -= j.values[u];
  }
  return div;
}

Flow reference_flow(const Chain& chain, const ProbabilityMeasure& mu) {
  if (mu.size() != chain.num_states()) throw Error(ErrorCode::InvalidArgument, "measure size does not match chain");
  Flow q = Flow::zero(chain);
  for (std::size_t e = 0; e < chain.num_edges(); ++e) q.values[e] = mu[chain.edge(e).from] * chain.edge(e).rate;
  return q;
}

Current current_of(const Chain& chain, const Flow& q) {
  if (q.values.size() != chain.num_edges()) throw Error(ErrorCode::InvalidArgument, "flow size does not match chain");
  Current j = Current::zero(chain);
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    const auto& ue = chain.undirected(u);
    double f = ue.forward != npos ? q.values[ue.forward] : 0.0;
    double b = ue.backward != npos ? q.values[ue.backward] : 0.0;
    j.values[u] = f - b;
  }
  return j;
}

Current reference_current(const Chain& chain, const ProbabilityMeasure& mu) {
  return current_of(chain, reference_flow(chain, mu));
}

bool divergence_free(std::span<const double> div, double scale, double tol) {
  for (double d : div) {
    if (std::abs(d) > tol * (1.0 + scale)) return false;
  }
  return true;
}

}  // namespace markovld
