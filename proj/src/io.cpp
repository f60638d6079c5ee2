#include "markovld/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>

#include "markovld/errors.hpp"

namespace markovld::io {

using json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  }
  return v;
}

namespace {

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json measure_json(const Chain& chain, const ProbabilityMeasure& mu) {
  json o = json::object();
  for (StateIndex x = 0; x < chain.num_states(); ++x) o[chain.label(x)] = mu[x];
  return o;
}

json number_or_inf(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

Chain parse_chain_json(const std::string& text) {
  json doc = parse_json(text);
  if (!doc.is_object() || !doc.contains("edges") || !doc["edges"].is_array()) {
    throw Error(ErrorCode::ParseError, "chain document needs an \"edges\" array");
  }
  std::vector<std::string> states;
  if (doc.contains("states")) {
    if (!doc["states"].is_array()) throw Error(ErrorCode::ParseError, "\"states\" must be an array");
    for (const auto& s : doc["states"]) {
      if (!s.is_string()) throw Error(ErrorCode::ParseError, "state labels must be strings");
      states.push_back(s.get<std::string>());
    }
  }
  std::vector<RawEdge> edges;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& e : doc["edges"]) {
    if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("rate") || !e["from"].is_string() ||
        !e["to"].is_string() || !e["rate"].is_number()) {
      throw Error(ErrorCode::ParseError, "each edge needs string \"from\", \"to\" and numeric \"rate\"");
    }
    RawEdge r{e["from"].get<std::string>(), e["to"].get<std::string>(), e["rate"].get<double>()};
    if (!seen.emplace(r.from, r.to).second) {
      throw Error(ErrorCode::DuplicateEdge, "edge " + r.from + "->" + r.to + " listed twice");
    }
    edges.push_back(std::move(r));
  }
  return Chain::build(edges, states);
}

Chain load_chain_file(const std::string& path) { return parse_chain_json(read_file(path)); }

std::string chain_to_json(const Chain& chain) {
  json doc;
  doc["states"] = json::array();
  for (const auto& l : chain.labels()) doc["states"].push_back(l);
  doc["edges"] = json::array();
  for (const auto& e : chain.edges()) {
    doc["edges"].push_back({{"from", chain.label(e.from)}, {"to", chain.label(e.to)}, {"rate", e.rate}});
  }
  return doc.dump(2);
}

std::string edge_key(const Chain& chain, std::size_t e) {
  return chain.label(chain.edge(e).from) + "->" + chain.label(chain.edge(e).to);
}

std::size_t parse_edge_key(const Chain& chain, const std::string& key) {
  auto pos = key.find("->");
  if (pos == std::string::npos) throw Error(ErrorCode::ParseError, "edge key '" + key + "' must look like a->b");
  StateIndex y = chain.state(key.substr(0, pos));
  StateIndex z = chain.state(key.substr(pos + 2));
  std::size_t e = chain.find_edge(y, z);
  if (e == npos) throw Error(ErrorCode::UnknownState, "no edge " + key);
  return e;
}

// --- CSV -----------------------------------------------------------------------

namespace {

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote in CSV row");
  cells.push_back(cur);
  return cells;
}

}  // namespace

void CsvTable::write(std::ostream& os) const {
  os << "# " << schema << " v1";
  for (const auto& [k, v] : meta) os << ' ' << k << '=' << v;
  os << '\n';
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << quote(header[i]);
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << quote(row[i]);
    os << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(ErrorCode::ParseError, "missing CSV column '" + name + "'");
}

CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) {
    throw Error(ErrorCode::ParseError, "CSV must start with a '# <schema> v1' line");
  }
  std::istringstream head(line.substr(2));
  std::string version;
  head >> t.schema >> version;
  if (t.schema.empty() || version != "v1") throw Error(ErrorCode::ParseError, "unsupported CSV version line");
  std::string kv;
  while (head >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "bad metadata '" + kv + "'");
    t.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "CSV header row missing");
  t.header = split_row(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split_row(line);
    if (row.size() != t.header.size()) throw Error(ErrorCode::ParseError, "CSV row width does not match header");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_string(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

CsvTable trajectory_table(const Chain& chain, const Trajectory& traj) {
  CsvTable t;
  t.schema = "markovld-trajectory";
  t.meta["horizon"] = format_double(traj.horizon);
  t.header = {"time", "state"};
  t.rows.push_back({"0", chain.label(traj.initial_state)});
  for (const auto& j : traj.jumps) t.rows.push_back({format_double(j.time), chain.label(j.target)});
  return t;
}

Trajectory trajectory_from_table(const Chain& chain, const CsvTable& t) {
  if (t.schema != "markovld-trajectory") throw Error(ErrorCode::ParseError, "not a trajectory table");
  auto h = t.meta.find("horizon");
  if (h == t.meta.end()) throw Error(ErrorCode::ParseError, "trajectory table lacks horizon");
  if (t.rows.empty()) throw Error(ErrorCode::ParseError, "trajectory table has no initial row");
  const std::size_t tc = t.column("time"), sc = t.column("state");
  Trajectory traj;
  traj.horizon = parse_double(h->second);
  traj.initial_state = chain.state(t.rows[0][sc]);
  for (std::size_t i = 1; i < t.rows.size(); ++i) {
    traj.jumps.push_back(Jump{parse_double(t.rows[i][tc]), chain.state(t.rows[i][sc])});
  }
  traj.validate(chain);
  return traj;
}

CsvTable tail_table(const std::vector<TailEstimate>& rows, const std::vector<double>& references) {
  CsvTable t;
  t.schema = "markovld-tail";
  t.header = {"horizon", "threshold", "direction", "samples", "hits", "estimate", "ci_low", "ci_high", "is_bound",
              "reference"};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    double ref = i < references.size() ? references[i] : std::numeric_limits<double>::quiet_NaN();
    t.rows.push_back({format_double(r.horizon), format_double(r.threshold),
                      r.direction == TailDirection::AtLeast ? ">=" : "<=", std::to_string(r.samples),
                      std::to_string(r.hits), format_double(r.estimate), format_double(r.ci_low),
                      format_double(r.ci_high), r.is_bound ? "1" : "0", format_double(ref)});
  }
  return t;
}

std::string rate_evaluation_json(const Chain& chain, const RateEvaluation& r) {
  json doc;
  if (r.value.is_finite()) {
    doc["value"] = r.value.value();
  } else {
    doc["value"] = r.value.str();
  }
  if (r.optimal_mu) doc["mu"] = measure_json(chain, *r.optimal_mu);
  if (r.optimal_flow) {
    json f = json::object();
    for (std::size_t e = 0; e < chain.num_edges(); ++e) f[edge_key(chain, e)] = r.optimal_flow->values[e];
    doc["flow"] = f;
  }
  if (r.optimal_current) {
    json c = json::object();
    for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
      const auto& ue = chain.undirected(u);
      c[chain.label(ue.lo) + "->" + chain.label(ue.hi)] = r.optimal_current->values[u];
    }
    doc["current"] = c;
  }
  doc["diagnostics"] = {{"method", r.diagnostics.method},
                        {"iterations", r.diagnostics.iterations},
                        {"stationarity", number_or_inf(r.diagnostics.stationarity)},
                        {"converged", r.diagnostics.converged}};
  return doc.dump(2);
}

std::string basis_json(const Chain& chain, const FundamentalBasis& basis, const ProbabilityMeasure* pi) {
  json doc;
  doc["root"] = chain.label(basis.tree().root);
  doc["tree_edges"] = json::array();
  for (std::size_t u = 0; u < chain.num_undirected(); ++u) {
    if (!basis.tree().tree_edge[u]) continue;
    const auto& ue = chain.undirected(u);
    doc["tree_edges"].push_back(json::array({chain.label(ue.lo), chain.label(ue.hi)}));
  }
  doc["chords"] = json::array();
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const auto& c = basis.chords()[k];
    json entry;
    entry["edge"] = json::array({chain.label(c.from), chain.label(c.to)});
    entry["cycle_vertices"] = json::array();
    for (StateIndex v : basis.cycle(k).vertices) entry["cycle_vertices"].push_back(chain.label(v));
    if (pi != nullptr && chain.is_symmetric()) entry["affinity"] = affinity(chain, basis.cycle(k), *pi).value();
    doc["chords"].push_back(entry);
  }
  return doc.dump(2);
}

}  // namespace markovld::io
