#include "markovld/worked_examples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "markovld/errors.hpp"

namespace markovld {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be > 0");
}

void require_level(double q) {
  if (!(q >= 0.0)) throw Error(ErrorCode::NegativeLevel, "level must be >= 0");
}

}  // namespace

// --- two states --------------------------------------------------------------

Chain build_two_state(double r0, double r1) {
  require_positive(r0, "r0");
  require_positive(r1, "r1");
  std::vector<RawEdge> e{{"0", "1", r0}, {"1", "0", r1}};
  return Chain::build(e);
}

double two_state_mean_flow(double r0, double r1) { return 2.0 * r0 * r1 / (r0 + r1); }

double two_state_rate(double r0, double r1, double q) {
  require_positive(r0, "r0");
  require_positive(r1, "r1");
  require_level(q);
  if (q == 0.0) return std::min(r0, r1);
  if (r0 == r1) return q * std::log(q / r0) - q + r0;
  double root = std::hypot(q, r0 - r1);
  return 0.5 * (q * std::log(q / (2.0 * r0 * r1) * (root + q)) + r0 + r1 - q - root);
}

ProbabilityMeasure two_state_optimal_mu(double r0, double r1, double q) {
  require_positive(r0, "r0");
  require_positive(r1, "r1");
  require_level(q);
  double delta = r0 - r1;
  double denom = q + std::hypot(q, delta);
  // 1/2 (1 + (q - sqrt(q^2 + delta^2)) / delta), rationalized
  double mu0 = denom == 0.0 ? 0.5 : 0.5 * (1.0 - delta / denom);
  return ProbabilityMeasure::normalized({mu0, 1.0 - mu0});
}

// --- random watch ------------------------------------------------------------

void WatchSpec::validate() const {
  if (rates.size() < 2) throw Error(ErrorCode::InvalidArgument, "a watch needs n >= 2 minutes");
  for (double r : rates) require_positive(r, "watch rate");
}

double WatchSpec::r_min() const { return *std::min_element(rates.begin(), rates.end()); }

Chain build_watch_chain(const WatchSpec& spec) {
  spec.validate();
  const std::size_t n = spec.rates.size();
  std::vector<RawEdge> e;
  for (std::size_t i = 0; i < n; ++i) e.push_back({std::to_string(i), std::to_string((i + 1) % n), spec.rates[i]});
  std::vector<std::string> states;
  for (std::size_t i = 0; i < n; ++i) states.push_back(std::to_string(i));
  return Chain::build(e, states);
}

double watch_R(const WatchSpec& spec, double lambda) {
  spec.validate();
  if (!(lambda > -spec.r_min())) throw Error(ErrorCode::DomainError, "R(lambda) needs lambda > -r_min");
  double s = 0.0;
  for (double r : spec.rates) s += 1.0 / (r + lambda);
  return 1.0 / s;
}

double watch_R_inverse(const WatchSpec& spec, double q) {
  spec.validate();
  if (!(q > 0.0)) throw Error(ErrorCode::DomainError, "R^{-1}(q) needs q > 0");
  const double rmin = spec.r_min();
  double lo = -rmin + 1e-12 * (1.0 + rmin);
  if (watch_R(spec, lo) >= q) return lo;
  double hi = 1.0;
  while (watch_R(spec, hi) < q) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (watch_R(spec, mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double watch_rate(const WatchSpec& spec, double q) {
  spec.validate();
  require_level(q);
  if (q == 0.0) return spec.r_min();
  double lambda = watch_R_inverse(spec, q);
  double s = 0.0;
  for (double r : spec.rates) s += q * std::log1p(lambda / r);
  return s - lambda;
}

ProbabilityMeasure watch_optimal_mu(const WatchSpec& spec, double q) {
  spec.validate();
  require_level(q);
  const std::size_t n = spec.rates.size();
  if (q == 0.0) {
    auto it = std::min_element(spec.rates.begin(), spec.rates.end());
    return ProbabilityMeasure::point_mass(n, static_cast<std::size_t>(it - spec.rates.begin()));
  }
  double lambda = watch_R_inverse(spec, q);
  std::vector<double> mu(n);
  for (std::size_t i = 0; i < n; ++i) mu[i] = q / (lambda + spec.rates[i]);
  return ProbabilityMeasure::normalized(std::move(mu));
}

// --- ring ----------------------------------------------------------------------

namespace {

void require_ring(std::size_t N, double lambda, double p) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "ring needs N >= 2");
  require_positive(lambda, "lambda");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0,1]");
  if (p == 0.0 || p == 1.0) throw Error(ErrorCode::DegenerateP, "p must lie strictly inside (0,1)");
}

}  // namespace

Chain build_ring_chain(std::size_t N, double lambda, double p) {
  require_ring(N, lambda, p);
  if (N < 3) throw Error(ErrorCode::InvalidArgument, "ring chain needs N >= 3");
  std::vector<RawEdge> e;
  std::vector<std::string> states;
  for (std::size_t x = 0; x < N; ++x) {
    states.push_back(std::to_string(x));
    e.push_back({std::to_string(x), std::to_string((x + 1) % N), lambda * p});
    e.push_back({std::to_string(x), std::to_string((x + N - 1) % N), lambda * (1.0 - p)});
  }
  return Chain::build(e, states);
}

double ring_scgf(std::size_t N, double lambda, double p, double alpha) {
  require_ring(N, lambda, p);
  double a = alpha / static_cast<double>(N);
  return lambda * p * std::exp(a) + lambda * (1.0 - p) * std::exp(-a) - lambda;
}

double ring_mean_current(std::size_t N, double lambda, double p) {
  require_ring(N, lambda, p);
  return lambda * (2.0 * p - 1.0) / static_cast<double>(N);
}

double ring_rate(std::size_t N, double lambda, double p, double j, RingRoute route) {
  require_ring(N, lambda, p);
  if (!std::isfinite(j)) throw Error(ErrorCode::InvalidArgument, "current must be finite");
  const double Nd = static_cast<double>(N);
  const double Nj = Nd * j;
  const double root = std::sqrt(Nj * Nj + 4.0 * p * (1.0 - p) * lambda * lambda);
  // log[(Nj + root) / (2 p lambda)], evaluated without cancellation for Nj < 0
  const double log_x = Nj >= 0.0 ? std::log((Nj + root) / (2.0 * p * lambda))
                                 : std::log(2.0 * (1.0 - p) * lambda / (root - Nj));
  if (route == RingRoute::ClosedForm) return Nj * log_x - root + lambda;

  double alpha = Nd * log_x;
  for (int it = 0; it < 100; ++it) {
    double a = alpha / Nd;
    double d1 = lambda * (p * std::exp(a) - (1.0 - p) * std::exp(-a)) / Nd;
    double d2 = lambda * (p * std::exp(a) + (1.0 - p) * std::exp(-a)) / (Nd * Nd);
    double step = (j - d1) / d2;
    alpha += step;
    if (std::abs(step) <= 1e-14 * (1.0 + std::abs(alpha))) break;
  }
  return j * alpha - ring_scgf(N, lambda, p, alpha);
}

// --- birth and death ---------------------------------------------------------

Chain build_birth_death(const LevelRate& b, const LevelRate& d, std::size_t K) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "truncation K must be >= 1");
  std::vector<RawEdge> e;
  std::vector<std::string> states;
  for (std::size_t k = 0; k <= K; ++k) {
    states.push_back(std::to_string(k));
    if (k < K) e.push_back({std::to_string(k), std::to_string(k + 1), b(k)});
    if (k > 0) e.push_back({std::to_string(k), std::to_string(k - 1), d(k)});
  }
  return Chain::build(e, states);
}

std::string to_string(BirthDeathClass c) {
  switch (c) {
    case BirthDeathClass::StrongTopology: return "strong-topology (i)";
    case BirthDeathClass::FailsStrongTopology: return "fails (ii)";
    case BirthDeathClass::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

BirthDeathReport topology_criterion(const LevelRate& b, const LevelRate& d, std::size_t K,
                                    const BirthDeathDeclaration& declared) {
  if (K < 4) throw Error(ErrorCode::InvalidArgument, "topology_criterion needs K >= 4");
  BirthDeathReport rep;
  for (std::size_t k = 1; k <= K; ++k) {
    double bk = b(k), dk = d(k);
    require_positive(bk, "b_k");
    require_positive(dk, "d_k");
    rep.ratios.push_back(bk / dk);
  }
  // Tail of the window: levels K/2 .. K.
  const std::size_t half = K / 2;
  std::vector<double> tail(rep.ratios.begin() + static_cast<std::ptrdiff_t>(half - 1), rep.ratios.end());
  const double tail_max = *std::max_element(tail.begin(), tail.end());
  const double tail_min = *std::min_element(tail.begin(), tail.end());
  const bool ratio_nonincreasing = std::is_sorted(tail.rbegin(), tail.rend());
  bool d_nondecreasing = true;
  for (std::size_t k = half; k < K; ++k) d_nondecreasing = d_nondecreasing && d(k + 1) >= d(k);

  const bool num_d_diverges = d_nondecreasing && d(K) >= 1.2 * d(half);
  const bool num_limsup_below_one = tail_max < 1.0;
  const bool num_to_zero = ratio_nonincreasing && tail.back() < 0.75 * tail.front();
  const bool num_liminf_positive = tail_min >= 0.75 * tail_max && tail_min > 0.0;

  auto pick = [&](const std::optional<bool>& decl, bool numeric, const char* what) {
    if (decl && *decl != numeric) rep.reason += std::string("declared ") + what + " disagrees with the window trend; ";
    return decl ? *decl : numeric;
  };
  const bool d_div = pick(declared.death_diverges, num_d_diverges, "d_k -> inf");
  const bool limsup = pick(declared.ratio_limsup_below_one, num_limsup_below_one, "limsup b/d < 1");
  const bool to_zero = pick(declared.ratio_tends_to_zero, num_to_zero, "b/d -> 0");
  const bool liminf = pick(declared.ratio_liminf_positive, num_liminf_positive, "liminf b/d > 0");

  if (!rep.reason.empty()) {
    rep.classification = BirthDeathClass::Inconclusive;
    return rep;
  }
  if (!d_div || !limsup) {
    rep.reason = "hypotheses d_k -> inf and limsup b_k/d_k < 1 not met";
    rep.classification = BirthDeathClass::Inconclusive;
  } else if (to_zero && !liminf) {
    rep.reason = "b_k/d_k -> 0";
    rep.classification = BirthDeathClass::StrongTopology;
  } else if (liminf && !to_zero) {
    rep.reason = "liminf b_k/d_k > 0";
    rep.classification = BirthDeathClass::FailsStrongTopology;
  } else {
    rep.reason = "ratio trend undetermined on the window";
    rep.classification = BirthDeathClass::Inconclusive;
  }
  return rep;
}

// --- confined walk -------------------------------------------------------------

namespace {

std::string site_label(int x, int y) { return std::to_string(x) + "," + std::to_string(y); }

int linf(int x, int y) { return std::max(std::abs(x), std::abs(y)); }

}  // namespace

ConfinedWalk build_confined_walk_2d(const ConfinedWalkSpec& spec) {
  if (spec.norm == WalkNorm::L1) {
    throw Error(ErrorCode::UnsupportedNorm, "only the l-infinity level rings are implemented");
  }
  if (spec.radius < 1) throw Error(ErrorCode::InvalidArgument, "box radius must be >= 1");
  if (!spec.radial_profile) throw Error(ErrorCode::InvalidArgument, "radial profile missing");
  if (spec.amplitudes.size() != static_cast<std::size_t>(spec.radius)) {
    throw Error(ErrorCode::InvalidArgument, "one amplitude per level 1..R expected");
  }
  const int R = spec.radius;
  for (double c : spec.amplitudes) {
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "amplitudes must be finite");
  }
  std::vector<double> level_u(static_cast<std::size_t>(R) + 1);
  for (int k = 0; k <= R; ++k) {
    level_u[static_cast<std::size_t>(k)] = spec.radial_profile(k);
    if (!std::isfinite(level_u[static_cast<std::size_t>(k)])) {
      throw Error(ErrorCode::InvalidArgument, "radial profile must be finite");
    }
  }

  // Counterclockwise rings: up the right side, left along the top, down the
  // left side, right along the bottom.
  std::vector<std::vector<std::pair<int, int>>> ring_sites(static_cast<std::size_t>(R));
  for (int k = 1; k <= R; ++k) {
    auto& ring = ring_sites[static_cast<std::size_t>(k - 1)];
    for (int y = -k; y < k; ++y) ring.emplace_back(k, y);
    for (int x = k; x > -k; --x) ring.emplace_back(x, k);
    for (int y = k; y > -k; --y) ring.emplace_back(-k, y);
    for (int x = -k; x < k; ++x) ring.emplace_back(x, -k);
  }
  auto field = [&](int x0, int y0, int x1, int y1) -> double {
    int k = linf(x0, y0);
    if (k == 0 || linf(x1, y1) != k) return 0.0;
    const auto& ring = ring_sites[static_cast<std::size_t>(k - 1)];
    const std::size_t L = ring.size();
    for (std::size_t i = 0; i < L; ++i) {
      if (ring[i] != std::make_pair(x0, y0)) continue;
      double c = spec.amplitudes[static_cast<std::size_t>(k - 1)];
      if (ring[(i + 1) % L] == std::make_pair(x1, y1)) return c;
      if (ring[(i + L - 1) % L] == std::make_pair(x1, y1)) return -c;
    }
    throw Error(ErrorCode::InvalidArgument, "same-level neighbours not consecutive on the ring");
  };

  std::vector<std::string> states;
  for (int x = -R; x <= R; ++x) {
    for (int y = -R; y <= R; ++y) states.push_back(site_label(x, y));
  }
  std::vector<RawEdge> edges;
  const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
  for (int x = -R; x <= R; ++x) {
    for (int y = -R; y <= R; ++y) {
      for (int d = 0; d < 4; ++d) {
        int x1 = x + dx[d], y1 = y + dy[d];
        if (linf(x1, y1) > R) continue;
        double du = level_u[static_cast<std::size_t>(linf(x1, y1))] - level_u[static_cast<std::size_t>(linf(x, y))];
        double rate = std::exp(-0.5 * du + 0.5 * field(x, y, x1, y1));
        edges.push_back({site_label(x, y), site_label(x1, y1), rate});
      }
    }
  }
  ConfinedWalk walk{Chain::build(edges, states), {}, {}, {}};
  const Chain& c = walk.chain;
  walk.potential.resize(c.num_states());
  for (int x = -R; x <= R; ++x) {
    for (int y = -R; y <= R; ++y) {
      walk.potential[c.state(site_label(x, y))] = level_u[static_cast<std::size_t>(linf(x, y))];
    }
  }
  walk.field = Current::zero(c);
  for (int x = -R; x <= R; ++x) {
    for (int y = -R; y <= R; ++y) {
      for (int d = 0; d < 4; ++d) {
        int x1 = x + dx[d], y1 = y + dy[d];
        if (linf(x1, y1) > R) continue;
        StateIndex a = c.state(site_label(x, y)), b = c.state(site_label(x1, y1));
        if (a < b) walk.field.set(c, a, b, field(x, y, x1, y1));
      }
    }
  }
  for (const auto& ring : ring_sites) {
    std::vector<StateIndex> idx;
    for (auto [x, y] : ring) idx.push_back(c.state(site_label(x, y)));
    walk.rings.push_back(std::move(idx));
  }
  return walk;
}

double verify_field_orthogonality(const Chain& chain, const std::vector<double>& potential) {
  if (potential.size() != chain.num_states()) throw Error(ErrorCode::InvalidArgument, "potential size does not match chain");
  double worst = 0.0;
  for (StateIndex y = 0; y < chain.num_states(); ++y) {
    double s = 0.0;
    for (std::size_t e : chain.out_edges(y)) {
      const auto& ed = chain.edge(e);
      double r0 = std::exp(-0.5 * (potential[ed.to] - potential[y]));
      // r0 sinh(F/2) with e^{F/2} = r / r0
      s += 0.5 * (ed.rate - r0 * r0 / ed.rate);
    }
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

// --- ladder --------------------------------------------------------------------

Chain build_ladder(std::size_t n, double right, double left, double rung) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "ladder needs n >= 2");
  require_positive(right, "right");
  require_positive(left, "left");
  require_positive(rung, "rung");
  std::vector<std::string> states;
  for (std::size_t k = 1; k <= n; ++k) states.push_back("b" + std::to_string(k));
  for (std::size_t k = n; k >= 1; --k) states.push_back("t" + std::to_string(k));
  std::vector<RawEdge> e;
  for (std::size_t k = 1; k <= n; ++k) {
    std::string b = "b" + std::to_string(k), t = "t" + std::to_string(k);
    e.push_back({b, t, rung});
    e.push_back({t, b, rung});
    if (k < n) {
      std::string b1 = "b" + std::to_string(k + 1), t1 = "t" + std::to_string(k + 1);
      e.push_back({b, b1, right});
      e.push_back({b1, b, left});
      e.push_back({t, t1, right});
      e.push_back({t1, t, left});
    }
  }
  return Chain::build(e, states);
}

// --- presets -------------------------------------------------------------------

namespace {

std::map<std::string, double> merge(std::map<std::string, double> defaults, const std::map<std::string, double>& o,
                                    const std::string& preset, bool allow_rate_keys = false) {
  for (const auto& [k, v] : o) {
    bool rate_key = allow_rate_keys && k.size() > 1 && k[0] == 'r' &&
                    k.find_first_not_of("0123456789", 1) == std::string::npos;
    if (!defaults.count(k) && !rate_key) {
      throw Error(ErrorCode::InvalidArgument, "unknown parameter '" + k + "' for preset '" + preset + "'");
    }
    defaults[k] = v;
  }
  return defaults;
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 1.0) || v != std::floor(v) || v > 1e6) {
    throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be a positive integer");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::vector<std::string> preset_names() { return {"two-state", "watch", "ring", "birth-death", "confined-walk", "ladder"}; }

Preset load_preset(const std::string& name, const std::map<std::string, double>& overrides) {
  if (name == "two-state") {
    auto p = merge({{"r0", 1.0}, {"r1", 2.0}}, overrides, name);
    return Preset{name, build_two_state(p["r0"], p["r1"]), p, {}};
  }
  if (name == "watch") {
    auto p = merge({{"n", 3.0}}, overrides, name, true);
    std::size_t n = as_count(p["n"], "n");
    WatchSpec spec;
    for (std::size_t i = 0; i < n; ++i) {
      std::string key = "r" + std::to_string(i);
      if (!p.count(key)) p[key] = 1.0 + static_cast<double>(i);
      spec.rates.push_back(p[key]);
    }
    for (const auto& [k, v] : p) {
      if (k != "n" && std::stoul(k.substr(1)) >= n) {
        throw Error(ErrorCode::InvalidArgument, "watch rate '" + k + "' exceeds n");
      }
    }
    return Preset{name, build_watch_chain(spec), p, {}};
  }
  if (name == "ring") {
    auto p = merge({{"N", 6.0}, {"lambda", 1.0}, {"p", 0.7}}, overrides, name);
    return Preset{name, build_ring_chain(as_count(p["N"], "N"), p["lambda"], p["p"]), p, {}};
  }
  if (name == "birth-death") {
    auto p = merge({{"K", 50.0}, {"b", 1.0}, {"d", 1.0}, {"b_power", 0.0}, {"d_power", 1.0}}, overrides, name);
    double b = p["b"], d = p["d"], bp = p["b_power"], dp = p["d_power"];
    auto bk = [=](std::size_t k) { return b * std::pow(static_cast<double>(k + 1), bp); };
    auto dk = [=](std::size_t k) { return d * std::pow(static_cast<double>(k + 1), dp); };
    return Preset{name, build_birth_death(bk, dk, as_count(p["K"], "K")), p, {}};
  }
  if (name == "confined-walk") {
    auto p = merge({{"radius", 3.0}, {"amplitude", 0.5}, {"potential_scale", 1.0}}, overrides, name);
    ConfinedWalkSpec spec;
    spec.radius = static_cast<int>(as_count(p["radius"], "radius"));
    double scale = p["potential_scale"];
    spec.radial_profile = [scale](int r) { return scale * 0.5 * r * r; };
    spec.amplitudes.assign(static_cast<std::size_t>(spec.radius), p["amplitude"]);
    ConfinedWalk w = build_confined_walk_2d(spec);
    return Preset{name, std::move(w.chain), p, std::move(w.potential)};
  }
  if (name == "ladder") {
    auto p = merge({{"n", 4.0}, {"right", 1.0}, {"left", 1.0}, {"rung", 1.0}}, overrides, name);
    return Preset{name, build_ladder(as_count(p["n"], "n"), p["right"], p["left"], p["rung"]), p, {}};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preset '" + name + "'");
}

}  // namespace markovld
