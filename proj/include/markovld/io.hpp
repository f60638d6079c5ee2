#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "markovld/chain.hpp"
#include "markovld/cycle_space.hpp"
#include "markovld/rate_functions.hpp"
#include "markovld/trajectory.hpp"

namespace markovld::io {

/// Shortest decimal that round-trips; "inf" / "-inf" / "nan" otherwise.
std::string format_double(double v);
/// Inverse of format_double. Throws ParseError.
double parse_double(const std::string& s);

/// {"states": [...], "edges": [{"from", "to", "rate"}]}. "states" is
/// optional. Throws ParseError on malformed input; chain validation errors
/// propagate with their own codes.
Chain parse_chain_json(const std::string& text);
Chain load_chain_file(const std::string& path);
std::string chain_to_json(const Chain& chain);

/// "a->b" keys for directed edges.
std::string edge_key(const Chain& chain, std::size_t e);
/// Resolves "a->b" to a directed edge index. Throws UnknownState.
std::size_t parse_edge_key(const Chain& chain, const std::string& key);

/// Versioned CSV: one "# <schema> v1 [k=v ...]" line, a header row, data rows.
struct CsvTable {
  std::string schema;
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const;
  /// Column index by name; throws ParseError.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(std::istream& is);
CsvTable read_csv_string(const std::string& text);

/// Schema "markovld-trajectory": columns time,state, first row at t = 0.
CsvTable trajectory_table(const Chain& chain, const Trajectory& traj);
Trajectory trajectory_from_table(const Chain& chain, const CsvTable& table);

/// Schema "markovld-tail": one row per (horizon, threshold).
CsvTable tail_table(const std::vector<TailEstimate>& rows, const std::vector<double>& references);

/// {value | "inf", mu: {label: mass}, flow: {"a->b": v}, current: {...}, diagnostics: {...}}
std::string rate_evaluation_json(const Chain& chain, const RateEvaluation& r);

/// {tree_edges: [...], chords: [{edge, cycle_vertices, affinity?}]}. Affinities
/// are included when `pi` is non-null and E = E_s.
std::string basis_json(const Chain& chain, const FundamentalBasis& basis, const ProbabilityMeasure* pi = nullptr);

}  // namespace markovld::io
