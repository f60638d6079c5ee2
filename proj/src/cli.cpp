#include "markovld/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "markovld/chain.hpp"
#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/io.hpp"
#include "markovld/rate_functions.hpp"
#include "markovld/trajectory.hpp"
#include "markovld/worked_examples.hpp"

namespace markovld::cli {

namespace {

using json = nlohmann::ordered_json;
using io::format_double;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Malformed or incomplete configuration. Reported with exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

bool is_config_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::NonPositiveRate:
    case ErrorCode::SelfLoop:
    case ErrorCode::NotIrreducible:
    case ErrorCode::DeadState:
    case ErrorCode::DuplicateEdge:
    case ErrorCode::UnknownState:
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
      return true;
    default:
      return false;
  }
}

void report(std::ostream& err, const std::string& code, int exit_code, const std::string& message) {
  json line = {{"error", code}, {"exit", exit_code}, {"message", message}};
  err << line.dump() << '\n';
}

// --- configuration -------------------------------------------------------------

struct Source {
  Chain chain;
  std::optional<Preset> preset;
};

Source load_source(const json& cfg) {
  int n = static_cast<int>(cfg.contains("chain")) + static_cast<int>(cfg.contains("preset")) +
          static_cast<int>(cfg.contains("chain_file"));
  if (n == 0) throw ConfigError("no chain source: give one of \"chain\", \"preset\", \"chain_file\"");
  if (n > 1) throw ConfigError("more than one chain source");
  if (cfg.contains("chain")) return Source{io::parse_chain_json(cfg["chain"].dump()), std::nullopt};
  if (cfg.contains("chain_file")) return Source{io::load_chain_file(cfg["chain_file"].get<std::string>()), std::nullopt};
  const json& p = cfg["preset"];
  std::string name = p.is_string() ? p.get<std::string>() : p.at("name").get<std::string>();
  std::map<std::string, double> params;
  if (p.is_object() && p.contains("params")) {
    for (const auto& [k, v] : p["params"].items()) params[k] = v.get<double>();
  }
  Preset preset = load_preset(name, params);
  Chain chain = preset.chain;
  return Source{std::move(chain), std::move(preset)};
}

const json& block(const json& cfg, const char* name) {
  static const json empty = json::object();
  if (!cfg.contains(name)) return empty;
  if (!cfg[name].is_object()) throw ConfigError(std::string("\"") + name + "\" must be an object");
  return cfg[name];
}

double positive(const json& b, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!b.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(std::string("missing \"") + key + "\"");
  }
  double v = b[key].get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("\"") + key + "\" must be positive");
  return v;
}

std::uint64_t count(const json& b, const char* key, std::uint64_t fallback) {
  if (!b.contains(key)) return fallback;
  auto v = b[key].get<std::int64_t>();
  if (v <= 0) throw ConfigError(std::string("\"") + key + "\" must be a positive integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> number_list(const json& b, const char* key) {
  if (!b.contains(key)) throw ConfigError(std::string("missing \"") + key + "\"");
  std::vector<double> out = b[key].get<std::vector<double>>();
  if (out.empty()) throw ConfigError(std::string("\"") + key + "\" is empty");
  return out;
}

StateIndex state_or(const Chain& chain, const json& b, const char* key, StateIndex fallback) {
  if (!b.contains(key)) return fallback;
  return chain.state(b[key].get<std::string>());
}

std::uint64_t seed_of(const json& cfg) { return cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 1; }
unsigned threads_of(const json& cfg) { return cfg.contains("threads") ? cfg["threads"].get<unsigned>() : 0; }

ObservableSpec parse_observable(const Chain& chain, const json& o) {
  std::string kind = o.is_string() ? o.get<std::string>() : o.value("kind", "total_flow");
  if (kind == "total_flow") return ObservableSpec::total_flow(chain);
  if (kind == "mean_flow") {
    ObservableSpec spec = ObservableSpec::total_flow(chain);
    for (double& w : spec.edge_weights) w /= static_cast<double>(chain.num_states());
    return spec;
  }
  if (kind == "occupation") {
    if (!o.is_object() || !o.contains("state")) throw ConfigError("occupation observable needs \"state\"");
    return ObservableSpec::occupation(chain, chain.state(o["state"].get<std::string>()));
  }
  if (kind == "current") {
    if (!o.is_object() || !o.contains("edge")) throw ConfigError("current observable needs \"edge\"");
    std::size_t e = io::parse_edge_key(chain, o["edge"].get<std::string>());
    return ObservableSpec::current_on(chain, chain.edge(e).from, chain.edge(e).to);
  }
  if (kind == "gc") {
    chain.require_symmetric("gc observable");
    return ObservableSpec::gallavotti_cohen(chain, w_pi(chain, invariant_measure(chain)));
  }
  if (kind == "custom") {
    ObservableSpec spec;
    if (o.contains("state_weights")) {
      spec.state_weights.assign(chain.num_states(), 0.0);
      for (const auto& [k, v] : o["state_weights"].items()) spec.state_weights[chain.state(k)] = v.get<double>();
    }
    if (o.contains("edge_weights")) {
      spec.edge_weights.assign(chain.num_edges(), 0.0);
      for (const auto& [k, v] : o["edge_weights"].items()) {
        spec.edge_weights[io::parse_edge_key(chain, k)] = v.get<double>();
      }
    }
    spec.validate(chain);
    return spec;
  }
  throw ConfigError("unknown observable kind '" + kind + "'");
}

std::string observable_kind(const json& o) {
  return o.is_string() ? o.get<std::string>() : o.value("kind", "total_flow");
}

WatchSpec watch_spec(const Preset& p) {
  WatchSpec spec;
  auto n = static_cast<std::size_t>(p.params.at("n"));
  for (std::size_t i = 0; i < n; ++i) spec.rates.push_back(p.params.at("r" + std::to_string(i)));
  return spec;
}

/// Closed-form rate at `level` when the preset and observable have one.
std::optional<double> closed_form(const Source& src, const json& obs, double level) {
  if (!src.preset) return std::nullopt;
  const Preset& p = *src.preset;
  const std::string kind = observable_kind(obs);
  if (p.name == "two-state" && kind == "total_flow") {
    if (level < 0) return std::numeric_limits<double>::infinity();
    return two_state_rate(p.params.at("r0"), p.params.at("r1"), level);
  }
  if (p.name == "watch" && kind == "mean_flow") {
    if (level < 0) return std::numeric_limits<double>::infinity();
    return watch_rate(watch_spec(p), level);
  }
  if (p.name == "ring" && kind == "current") {
    const auto N = static_cast<std::size_t>(p.params.at("N"));
    std::size_t e = io::parse_edge_key(src.chain, obs["edge"].get<std::string>());
    const Edge& edge = src.chain.edge(e);
    double sign = (edge.from + 1) % N == edge.to ? 1.0 : -1.0;
    return ring_rate(N, p.params.at("lambda"), p.params.at("p"), sign * level);
  }
  return std::nullopt;
}

/// Observable used when the config names none: the one with a closed form.
json default_observable(const Source& src) {
  if (src.preset && src.preset->name == "watch") return "mean_flow";
  if (src.preset && src.preset->name == "ring") return json{{"kind", "current"}, {"edge", "0->1"}};
  return "total_flow";
}

std::string measure_summary(const Chain& chain, const ProbabilityMeasure& mu, std::size_t top) {
  std::vector<StateIndex> order(chain.num_states());
  std::iota(order.begin(), order.end(), StateIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](StateIndex a, StateIndex b) { return mu[a] > mu[b]; });
  std::string s;
  for (std::size_t i = 0; i < std::min(top, order.size()); ++i) {
    if (i) s += ';';
    s += chain.label(order[i]) + "=" + format_double(mu[order[i]]);
  }
  return s;
}

// --- output --------------------------------------------------------------------

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot open output '" + path + "'");
    }
  }
  bool to_file() const { return file_ != nullptr; }
  std::ostream& stream() { return file_ ? *file_ : fallback_; }

 private:
  std::ostream& fallback_;
  std::unique_ptr<std::ofstream> file_;
};

// --- commands ------------------------------------------------------------------

void cmd_simulate(const json& cfg, const std::string& out_path, std::ostream& out) {
  Source src = load_source(cfg);
  const Chain& chain = src.chain;
  const json& b = block(cfg, "simulate");
  const double T = positive(b, "horizon");
  const StateIndex x0 = state_or(chain, b, "x0", 0);
  const std::size_t top = count(b, "top", 3);
  const std::uint64_t seed = seed_of(cfg);

  Trajectory traj = simulate(chain, x0, T, seed);
  double w_t = kNaN;
  if (chain.is_symmetric()) w_t = gc_functional(chain, traj, w_pi(chain, invariant_measure(chain)));

  if (!out_path.empty()) {
    Output o(out_path, out);
    io::trajectory_table(chain, traj).write(o.stream());
  }
  io::CsvTable summary;
  summary.schema = "markovld-simulate";
  summary.header = {"horizon", "seed", "x0", "final_state", "jumps", "q_l1", "w_t", "top_states"};
  summary.rows.push_back({format_double(T), std::to_string(seed), chain.label(x0), chain.label(traj.final_state()),
                          std::to_string(traj.jumps.size()), format_double(empirical_flow(chain, traj).l1_norm()),
                          format_double(w_t), measure_summary(chain, empirical_measure(chain, traj), top)});
  summary.write(out);
}

void cmd_rate_eval(const json& cfg, Output& o) {
  Source src = load_source(cfg);
  const Chain& chain = src.chain;
  const json& b = block(cfg, "rate_eval");
  const ProbabilityMeasure pi = invariant_measure(chain);

  ProbabilityMeasure mu = pi;
  if (b.contains("mu")) {
    std::vector<double> m(chain.num_states(), 0.0);
    for (const auto& [k, v] : b["mu"].items()) m[chain.state(k)] = v.get<double>();
    mu = ProbabilityMeasure(std::move(m));
  }
  if (b.contains("flow") && b.contains("current")) throw ConfigError("give either \"flow\" or \"current\", not both");

  json doc;
  if (b.contains("current")) {
    Current j = Current::zero(chain);
    for (const auto& [k, v] : b["current"].items()) {
      std::size_t e = io::parse_edge_key(chain, k);
      j.set(chain, chain.edge(e).from, chain.edge(e).to, v.get<double>());
    }
    std::string f = b.value("formula", "rff");
    if (f != "rff" && f != "rff_bis") throw ConfigError("formula must be \"rff\" or \"rff_bis\"");
    RateEvaluation r =
        current_rate_Itilde(chain, mu, j, f == "rff" ? CurrentFormula::Rff : CurrentFormula::RffBis);
    doc = json::parse(io::rate_evaluation_json(chain, r));
    doc["input"] = "current";
    if (chain.is_symmetric()) doc["gc_symmetry"] = format_double(check_gc_symmetry(chain, mu, j));
  } else {
    Flow q = reference_flow(chain, mu);
    if (b.contains("flow")) {
      q = Flow::zero(chain);
      for (const auto& [k, v] : b["flow"].items()) q.values[io::parse_edge_key(chain, k)] = v.get<double>();
    }
    RateEvaluation r = flow_rate_I(chain, mu, q);
    doc = json::parse(io::rate_evaluation_json(chain, r));
    doc["input"] = "flow";
  }
  o.stream() << doc.dump(2) << '\n';
}

void cmd_contract(const json& cfg, Output& o) {
  Source src = load_source(cfg);
  const Chain& chain = src.chain;
  const json& b = block(cfg, "contract");
  const std::string kind = b.value("kind", "scalar");
  io::CsvTable t;

  if (kind == "scalar") {
    const json obs_cfg = b.contains("observable") ? b["observable"] : default_observable(src);
    ObservableSpec obs = parse_observable(chain, obs_cfg);
    std::vector<double> levels = number_list(b, "levels");
    t.schema = "markovld-contract-scalar";
    t.header = {"level", "rate", "reference", "abs_diff", "iterations", "stationarity", "optimal_mu"};
    double max_diff = 0.0;
    bool any_ref = false;
    for (double level : levels) {
      RateEvaluation r = scalar_contraction(chain, obs, level);
      double v = r.value.to_double();
      double ref = closed_form(src, obs_cfg, level).value_or(kNaN);
      double diff = kNaN;
      if (!std::isnan(ref)) {
        any_ref = true;
        diff = (std::isinf(v) && std::isinf(ref)) ? 0.0 : std::abs(v - ref);
        max_diff = std::max(max_diff, diff);
      }
      t.rows.push_back({format_double(level), format_double(v), format_double(ref), format_double(diff),
                        std::to_string(r.diagnostics.iterations), format_double(r.diagnostics.stationarity),
                        r.optimal_mu ? measure_summary(chain, *r.optimal_mu, chain.num_states()) : ""});
    }
    if (any_ref) t.meta["max_abs_diff"] = format_double(max_diff);
  } else if (kind == "iota") {
    chain.require_symmetric("gc_rate_iota");
    std::vector<double> levels = number_list(b, "levels");
    t.schema = "markovld-contract-iota";
    t.header = {"u", "rate", "symmetry", "iterations", "stationarity"};
    for (double u : levels) {
      RateEvaluation r = gc_rate_iota(chain, u);
      RateEvaluation m = gc_rate_iota(chain, -u);
      double sym = r.value.to_double() - m.value.to_double() + u;
      t.rows.push_back({format_double(u), format_double(r.value.to_double()), format_double(sym),
                        std::to_string(r.diagnostics.iterations), format_double(r.diagnostics.stationarity)});
    }
  } else if (kind == "homological") {
    chain.require_symmetric("homological contraction");
    FundamentalBasis basis(chain, state_or(chain, b, "root", 0));
    if (!b.contains("coefficients") || b["coefficients"].empty()) throw ConfigError("\"coefficients\" is empty");
    const ProbabilityMeasure pi = invariant_measure(chain);
    std::vector<double> aff;
    for (std::size_t k = 0; k < basis.size(); ++k) aff.push_back(affinity(chain, basis.cycle(k), pi).half_s_w);
    t.schema = "markovld-contract-homological";
    t.header = {"coefficients", "rate", "symmetry", "iterations", "stationarity"};
    for (const auto& row : b["coefficients"]) {
      std::vector<double> a = row.get<std::vector<double>>();
      if (a.size() != basis.size()) throw ConfigError("coefficient vector length differs from the number of chords");
      std::vector<double> neg(a.size());
      std::transform(a.begin(), a.end(), neg.begin(), [](double x) { return -x; });
      RateEvaluation r = homological_rate_Ic(chain, basis, a);
      RateEvaluation m = homological_rate_Ic(chain, basis, neg);
      double sym = r.value.to_double() - m.value.to_double();
      for (std::size_t k = 0; k < a.size(); ++k) sym += a[k] * aff[k];
      std::string label;
      for (std::size_t k = 0; k < a.size(); ++k) label += (k ? ";" : "") + format_double(a[k]);
      t.rows.push_back({label, format_double(r.value.to_double()), format_double(sym),
                        std::to_string(r.diagnostics.iterations), format_double(r.diagnostics.stationarity)});
    }
  } else {
    throw ConfigError("contract kind must be scalar, iota or homological");
  }
  t.write(o.stream());
}

void cmd_cycle_analyze(const json& cfg, Output& o, std::ostream& out) {
  Source src = load_source(cfg);
  const Chain& chain = src.chain;
  const json& b = block(cfg, "cycle");
  FundamentalBasis basis(chain, state_or(chain, b, "root", 0));
  std::optional<ProbabilityMeasure> pi;
  if (chain.is_symmetric()) pi = invariant_measure(chain);
  out << io::basis_json(chain, basis, pi ? &*pi : nullptr) << '\n';

  const std::uint64_t n = b.contains("count") ? count(b, "count", 1) : 0;
  if (n == 0) return;
  const double T = positive(b, "horizon", 10.0);
  const StateIndex x0 = state_or(chain, b, "x0", 0);
  const std::uint64_t seed = seed_of(cfg);
  io::CsvTable t;
  t.schema = "markovld-coefficients";
  t.meta["seed"] = std::to_string(seed);
  t.header = {"replica", "horizon"};
  for (const auto& c : basis.chords()) t.header.push_back(chain.label(c.from) + "->" + chain.label(c.to));
  for (std::uint64_t i = 0; i < n; ++i) {
    Trajectory traj = simulate(chain, x0, T, seed, i);
    HomologicalCoefficients hc = homological_coefficients(chain, traj, basis);
    std::vector<std::string> row = {std::to_string(i), format_double(T)};
    for (double v : hc.values()) row.push_back(format_double(v));
    t.rows.push_back(std::move(row));
  }
  if (!o.to_file()) out << '\n';
  t.write(o.stream());
}

void cmd_mc_estimate(const json& cfg, Output& o) {
  Source src = load_source(cfg);
  const Chain& chain = src.chain;
  const json& b = block(cfg, "mc");
  const json obs_cfg = b.contains("observable") ? b["observable"] : default_observable(src);
  ObservableSpec obs = parse_observable(chain, obs_cfg);
  std::vector<double> thresholds = number_list(b, "thresholds");
  std::vector<double> horizons = number_list(b, "horizons");
  for (double T : horizons) {
    if (!(T > 0)) throw ConfigError("horizons must be positive");
  }
  const std::uint64_t samples = count(b, "samples", 10000);
  const std::string dir = b.value("direction", ">=");
  if (dir != ">=" && dir != "<=") throw ConfigError("direction must be \">=\" or \"<=\"");
  const StateIndex x0 = state_or(chain, b, "x0", 0);
  const std::uint64_t seed = seed_of(cfg);
  const unsigned threads = threads_of(cfg);

  std::vector<double> refs;
  for (double a : thresholds) {
    std::optional<double> cf = closed_form(src, obs_cfg, a);
    if (cf) {
      refs.push_back(*cf);
      continue;
    }
    try {
      refs.push_back(scalar_contraction(chain, obs, a).value.to_double());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InfeasibleLevel) throw;
      refs.push_back(std::numeric_limits<double>::infinity());
    }
  }
  std::vector<TailEstimate> rows;
  std::vector<double> row_refs;
  std::uint64_t row_seed = seed;
  for (double T : horizons) {
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      rows.push_back(estimate_tail_exponent(chain, x0, obs, thresholds[i],
                                            dir == ">=" ? TailDirection::AtLeast : TailDirection::AtMost, T, samples,
                                            row_seed++, threads));
      row_refs.push_back(refs[i]);
    }
  }
  io::CsvTable t = io::tail_table(rows, row_refs);
  t.meta["seed"] = std::to_string(seed);
  t.write(o.stream());
}

void cmd_example(const json& cfg, Output& o) {
  if (!cfg.contains("preset")) throw ConfigError("example needs a preset name");
  Source src = load_source(cfg);
  const Preset& p = *src.preset;
  const Chain& chain = src.chain;
  json doc;
  doc["preset"] = p.name;
  json params = json::object();
  for (const auto& [k, v] : p.params) params[k] = v;
  doc["params"] = params;
  doc["states"] = chain.num_states();
  doc["edges"] = chain.num_edges();
  doc["symmetric"] = chain.is_symmetric();
  ProbabilityMeasure pi = invariant_measure(chain);
  doc["top_states"] = measure_summary(chain, pi, 5);
  json facts = json::object();
  if (p.name == "two-state") {
    double r0 = p.params.at("r0"), r1 = p.params.at("r1");
    facts["mean_flow"] = two_state_mean_flow(r0, r1);
    facts["rate_at_zero"] = two_state_rate(r0, r1, 0.0);
  } else if (p.name == "watch") {
    WatchSpec spec = watch_spec(p);
    facts["R0"] = watch_R(spec, 0.0);
    facts["r_min"] = spec.r_min();
  } else if (p.name == "ring") {
    auto N = static_cast<std::size_t>(p.params.at("N"));
    double jbar = ring_mean_current(N, p.params.at("lambda"), p.params.at("p"));
    facts["mean_current"] = jbar;
    facts["rate_at_zero"] = ring_rate(N, p.params.at("lambda"), p.params.at("p"), 0.0);
  } else if (p.name == "birth-death") {
    const double b = p.params.at("b"), d = p.params.at("d"), bp = p.params.at("b_power"), dp = p.params.at("d_power");
    auto bk = [=](std::size_t k) { return b * std::pow(static_cast<double>(k + 1), bp); };
    auto dk = [=](std::size_t k) { return d * std::pow(static_cast<double>(k + 1), dp); };
    BirthDeathReport rep = topology_criterion(bk, dk, static_cast<std::size_t>(p.params.at("K")));
    facts["classification"] = to_string(rep.classification);
    facts["reason"] = rep.reason;
  } else if (p.name == "confined-walk") {
    facts["orthogonality_residual"] = verify_field_orthogonality(chain, p.potential);
    double z = 0.0;
    for (double u : p.potential) z += std::exp(-u);
    double rel = 0.0;
    for (StateIndex x = 0; x < chain.num_states(); ++x) {
      double g = std::exp(-p.potential[x]) / z;
      rel = std::max(rel, std::abs(pi[x] - g) / g);
    }
    facts["gibbs_relative_error"] = rel;
  } else if (p.name == "ladder") {
    facts["basis"] = json::parse(io::basis_json(chain, FundamentalBasis(chain, 0), &pi));
  }
  doc["facts"] = facts;
  o.stream() << doc.dump(2) << '\n';
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
  return cfg;
}

std::vector<double> split_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(io::parse_double(item));
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Large deviations of Markov chain empirical observables", "markovld"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_path, chain_file, preset;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::vector<std::string> params;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out_path, "Write data here instead of stdout");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--threads", threads, "Monte Carlo worker bound (0 = hardware)");
  app.add_option("--chain", chain_file, "Chain spec JSON file");
  app.add_option("--preset", preset, "Named example chain");
  app.add_option("--param", params, "Preset parameter k=v (repeatable)");

  std::optional<double> horizon;
  std::optional<std::string> x0, root, kind, levels, thresholds, horizons, observable, edge, state, direction,
      formula;
  std::optional<std::uint64_t> samples, n_count, top;

  auto* sim = app.add_subcommand("simulate", "Simulate one trajectory; summary to stdout, path CSV to --out");
  sim->add_option("--horizon", horizon);
  sim->add_option("--x0", x0);
  sim->add_option("--top", top);

  auto* rate = app.add_subcommand("rate-eval", "Evaluate I(mu,Q) or Itilde(mu,J) from the config");
  rate->add_option("--formula", formula);

  auto* contract = app.add_subcommand("contract", "Contracted rate functions on a grid");
  contract->add_option("--kind", kind, "scalar | iota | homological");
  contract->add_option("--levels", levels, "Comma separated grid");
  contract->add_option("--observable", observable, "total_flow | mean_flow | occupation | current | gc");
  contract->add_option("--edge", edge);
  contract->add_option("--state", state);
  contract->add_option("--root", root);

  auto* cycle = app.add_subcommand("cycle-analyze", "Fundamental basis JSON and trajectory coefficient CSV");
  cycle->add_option("--root", root);
  cycle->add_option("--count", n_count, "Number of simulated trajectories");
  cycle->add_option("--horizon", horizon);
  cycle->add_option("--x0", x0);

  auto* mc = app.add_subcommand("mc-estimate", "Monte Carlo tail exponents against the rate function");
  mc->add_option("--thresholds", thresholds, "Comma separated");
  mc->add_option("--horizons", horizons, "Comma separated");
  mc->add_option("--samples", samples);
  mc->add_option("--direction", direction, ">= | <=");
  mc->add_option("--observable", observable);
  mc->add_option("--edge", edge);
  mc->add_option("--state", state);
  mc->add_option("--x0", x0);

  std::string example_name;
  auto* example = app.add_subcommand("example", "Summarize a named preset");
  example->add_option("name", example_name, "Preset name");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report(err, "UsageError", kExitConfig, e.what());
    return kExitConfig;
  }

  try {
    json cfg = read_config(config_path);
    if (!example_name.empty()) preset = example_name;
    if (!preset.empty() || !params.empty()) {
      json p = json::object();
      if (cfg.contains("preset") && cfg["preset"].is_object()) p = cfg["preset"];
      if (cfg.contains("preset") && cfg["preset"].is_string()) p["name"] = cfg["preset"];
      if (!preset.empty()) {
        if (p.contains("name") && p["name"] != preset) p.erase("params");
        p["name"] = preset;
      }
      for (const auto& kv : params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects k=v, got '" + kv + "'");
        p["params"][kv.substr(0, eq)] = io::parse_double(kv.substr(eq + 1));
      }
      if (!p.contains("name")) throw ConfigError("--param given without a preset");
      cfg.erase("chain");
      cfg.erase("chain_file");
      cfg["preset"] = p;
    }
    if (!chain_file.empty()) {
      cfg.erase("chain");
      cfg.erase("preset");
      cfg["chain_file"] = chain_file;
    }
    if (seed) cfg["seed"] = *seed;
    if (threads) cfg["threads"] = *threads;

    auto set = [&](const char* blk, const char* key, const auto& v) {
      if (v) cfg[blk][key] = *v;
    };
    auto set_obs = [&](const char* blk) {
      if (!observable && !edge && !state) return;
      json o = cfg.contains(blk) && cfg[blk].contains("observable") ? cfg[blk]["observable"] : json::object();
      if (o.is_string()) o = json{{"kind", o}};
      if (edge) o["edge"] = *edge;
      if (state) o["state"] = *state;
      if (observable) {
        o["kind"] = *observable;
      } else if (!o.contains("kind")) {
        o["kind"] = edge ? "current" : "occupation";
      }
      cfg[blk]["observable"] = o;
    };

    if (*sim) {
      set("simulate", "horizon", horizon);
      set("simulate", "x0", x0);
      set("simulate", "top", top);
      cmd_simulate(cfg, out_path, out);
    } else if (*rate) {
      set("rate_eval", "formula", formula);
      Output o(out_path, out);
      cmd_rate_eval(cfg, o);
    } else if (*contract) {
      set("contract", "kind", kind);
      set("contract", "root", root);
      if (levels) cfg["contract"]["levels"] = split_numbers(*levels);
      set_obs("contract");
      Output o(out_path, out);
      cmd_contract(cfg, o);
    } else if (*cycle) {
      set("cycle", "root", root);
      set("cycle", "count", n_count);
      set("cycle", "horizon", horizon);
      set("cycle", "x0", x0);
      Output o(out_path, out);
      cmd_cycle_analyze(cfg, o, out);
    } else if (*mc) {
      if (thresholds) cfg["mc"]["thresholds"] = split_numbers(*thresholds);
      if (horizons) cfg["mc"]["horizons"] = split_numbers(*horizons);
      set("mc", "samples", samples);
      set("mc", "direction", direction);
      set("mc", "x0", x0);
      set_obs("mc");
      Output o(out_path, out);
      cmd_mc_estimate(cfg, o);
    } else if (*example) {
      Output o(out_path, out);
      cmd_example(cfg, o);
    }
  } catch (const ConfigError& e) {
    report(err, "ConfigError", kExitConfig, e.what());
    return kExitConfig;
  } catch (const Error& e) {
    int code = is_config_code(e.code()) ? kExitConfig : kExitRuntime;
    report(err, std::string(to_string(e.code())), code, e.what());
    return code;
  } catch (const json::exception& e) {
    report(err, "ConfigError", kExitConfig, e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    report(err, "RuntimeError", kExitRuntime, e.what());
    return kExitRuntime;
  }
  out.flush();
  return kExitOk;
}

}  // namespace markovld::cli
