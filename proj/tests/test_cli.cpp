#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "markovld/cli.hpp"
#include "markovld/io.hpp"

using markovld::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "markovld");
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("markovld_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("simulate is deterministic and writes a readable trajectory") {
  std::string path = temp_path("traj.csv");
  Result a = call({"simulate", "--preset", "two-state", "--horizon", "10", "--seed", "1", "--out", path});
  REQUIRE(a.code == 0);
  std::string first = slurp(path);
  Result b = call({"simulate", "--preset", "two-state", "--horizon", "10", "--seed", "1", "--out", path});
  CHECK(a.out == b.out);
  CHECK(slurp(path) == first);
  auto table = markovld::io::read_csv_string(first);
  CHECK(table.schema == "markovld-trajectory");
  CHECK(table.header == std::vector<std::string>{"time", "state"});
  auto summary = markovld::io::read_csv_string(a.out);
  CHECK(summary.header.front() == "horizon");
  std::remove(path.c_str());
}

TEST_CASE("simulate reports W_T on the confined walk") {
  Result r = call({"simulate", "--preset", "confined-walk", "--horizon", "5"});
  REQUIRE(r.code == 0);
  auto t = markovld::io::read_csv_string(r.out);
  CHECK(t.rows[0][t.column("w_t")] != "nan");
}

TEST_CASE("config errors exit with 2 and a JSON line") {
  Result r = call({"simulate", "--horizon", "1"});
  CHECK(r.code == 2);
  auto line = nlohmann::json::parse(r.err);
  CHECK(line["exit"] == 2);
  CHECK(line["error"] == "ConfigError");

  CHECK(call({"contract", "--preset", "two-state", "--levels", ""}).code == 2);
  CHECK(call({"simulate", "--preset", "two-state"}).code == 2);
  CHECK(call({"simulate", "--preset", "nope", "--horizon", "1"}).code == 2);
  CHECK(call({"bogus"}).code == 2);

  std::string cfg = temp_path("bad.json");
  write_file(cfg, R"({"chain": {"edges": [{"from": "a", "to": "b", "rate": 1}]}, "simulate": {"horizon": 1}})");
  Result dead = call({"simulate", "--config", cfg});
  CHECK(dead.code == 2);
  CHECK(nlohmann::json::parse(dead.err)["error"] == "NotIrreducible");
  std::remove(cfg.c_str());
}

TEST_CASE("runtime errors exit with 3") {
  Result r = call({"contract", "--preset", "watch", "--kind", "iota", "--levels", "0.1"});
  CHECK(r.code == 3);
  CHECK(nlohmann::json::parse(r.err)["error"] == "NotSymmetricEdgeSet");
}

TEST_CASE("contract against closed forms") {
  Result r = call({"contract", "--preset", "two-state", "--levels", "0,0.5,1.333,2,3"});
  REQUIRE(r.code == 0);
  auto t = markovld::io::read_csv_string(r.out);
  CHECK(markovld::io::parse_double(t.meta.at("max_abs_diff")) < 1e-8);
  CHECK(t.header == std::vector<std::string>{"level", "rate", "reference", "abs_diff", "iterations", "stationarity",
                                             "optimal_mu"});
  Result w = call({"contract", "--preset", "watch", "--levels", "0.1,0.5,1"});
  CHECK(markovld::io::parse_double(markovld::io::read_csv_string(w.out).meta.at("max_abs_diff")) < 1e-8);
  Result g = call({"contract", "--preset", "ring", "--levels", "-0.1,0.2"});
  CHECK(markovld::io::parse_double(markovld::io::read_csv_string(g.out).meta.at("max_abs_diff")) < 1e-8);

  Result iota = call({"contract", "--preset", "ring", "--kind", "iota", "--levels", "0.2,1"});
  REQUIRE(iota.code == 0);
  auto it = markovld::io::read_csv_string(iota.out);
  for (const auto& row : it.rows) CHECK(std::abs(markovld::io::parse_double(row[it.column("symmetry")])) < 1e-7);
}

TEST_CASE("homological contraction from a config file") {
  std::string cfg = temp_path("hom.json");
  write_file(cfg, R"({"preset": {"name": "ladder", "params": {"n": 3, "right": 2.0}},
                      "contract": {"kind": "homological", "coefficients": [[0.1, -0.2], [0.3, 0.0]]}})");
  Result r = call({"contract", "--config", cfg});
  REQUIRE(r.code == 0);
  auto t = markovld::io::read_csv_string(r.out);
  CHECK(t.rows.size() == 2);
  for (const auto& row : t.rows) CHECK(std::abs(markovld::io::parse_double(row[t.column("symmetry")])) < 1e-7);
  std::remove(cfg.c_str());
}

TEST_CASE("rate-eval") {
  Result r = call({"rate-eval", "--preset", "ring"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(std::abs(doc["value"].get<double>()) < 1e-14);

  std::string cfg = temp_path("rate.json");
  write_file(cfg, R"({"preset": "two-state", "rate_eval": {"mu": {"0": 0.5, "1": 0.5}, "flow": {"0->1": 1.0}}})");
  CHECK(nlohmann::json::parse(call({"rate-eval", "--config", cfg}).out)["value"] == "inf");
  write_file(cfg, R"({"preset": "two-state", "rate_eval": {"mu": {"0": 0.3, "1": 0.7}, "current": {"0->1": 0.4}}})");
  auto cur = nlohmann::json::parse(call({"rate-eval", "--config", cfg}).out);
  CHECK(std::abs(markovld::io::parse_double(cur["gc_symmetry"].get<std::string>())) < 1e-12);
  std::remove(cfg.c_str());
}

TEST_CASE("cycle-analyze and mc-estimate") {
  Result r = call({"cycle-analyze", "--preset", "ladder"});
  REQUIRE(r.code == 0);
  auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["chords"].size() == 3);
  for (const auto& ch : doc["chords"]) CHECK(ch["affinity"].get<double>() == 0.0);

  std::string path = temp_path("coef.csv");
  Result c = call({"cycle-analyze", "--preset", "ring", "--count", "5", "--horizon", "20", "--out", path});
  REQUIRE(c.code == 0);
  auto t = markovld::io::read_csv_string(slurp(path));
  CHECK(t.rows.size() == 5);
  std::remove(path.c_str());

  Result m1 = call({"mc-estimate", "--preset", "two-state", "--thresholds", "1.5,50", "--horizons", "5", "--samples",
                    "300", "--threads", "2"});
  Result m2 = call({"mc-estimate", "--preset", "two-state", "--thresholds", "1.5,50", "--horizons", "5", "--samples",
                    "300", "--threads", "1"});
  REQUIRE(m1.code == 0);
  CHECK(m1.out == m2.out);
  auto mt = markovld::io::read_csv_string(m1.out);
  CHECK(mt.rows[1][mt.column("is_bound")] == "1");
  CHECK(mt.header.back() == "reference");
}

TEST_CASE("example presets") {
  for (const char* name : {"two-state", "watch", "ring", "birth-death", "confined-walk", "ladder"}) {
    Result r = call({"example", name});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["preset"] == name);
  }
  Result over = call({"example", "ring", "--param", "N=8"});
  CHECK(nlohmann::json::parse(over.out)["states"] == 8);
}
