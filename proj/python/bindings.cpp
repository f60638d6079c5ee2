#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <sstream>

#include "markovld/chain.hpp"
#include "markovld/cli.hpp"
#include "markovld/cycle_space.hpp"
#include "markovld/errors.hpp"
#include "markovld/rate_functions.hpp"
#include "markovld/trajectory.hpp"
#include "markovld/worked_examples.hpp"

namespace py = pybind11;
using namespace markovld;

namespace {

double as_float(const ExtendedReal& v) {
  if (v.is_pos_infinity()) return INFINITY;
  if (v.is_neg_infinity()) return -INFINITY;
  return v.value();
}

Current current_from(const Chain& c, const std::vector<double>& values) {
  Current j{values};
  j.validate(c);
  return j;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Large deviations of empirical measures, flows and currents of finite Markov chains";

  static py::exception<Error> error(m, "MarkovldError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(error.ptr(), e.what());  // "Code: message"
    }
  });

  py::class_<Chain>(m, "Chain")
      .def(py::init([](const std::vector<std::tuple<std::string, std::string, double>>& edges,
                       const std::vector<std::string>& states) {
             std::vector<RawEdge> raw;
             for (const auto& [a, b, r] : edges) raw.push_back({a, b, r});
             return Chain::build(raw, states);
           }),
           py::arg("edges"), py::arg("states") = std::vector<std::string>{})
      .def_property_readonly("num_states", &Chain::num_states)
      .def_property_readonly("num_edges", &Chain::num_edges)
      .def_property_readonly("is_symmetric", &Chain::is_symmetric)
      .def_property_readonly("labels",
                             [](const Chain& c) { return std::vector<std::string>(c.labels().begin(), c.labels().end()); })
      .def("state", [](const Chain& c, const std::string& l) { return c.state(l); })
      .def("rate", &Chain::rate)
      .def_property_readonly("undirected_edges", [](const Chain& c) {
        std::vector<std::pair<StateIndex, StateIndex>> out;
        for (const auto& ue : c.undirected_edges()) out.emplace_back(ue.lo, ue.hi);
        return out;
      });

  py::class_<RateEvaluation>(m, "RateEvaluation")
      .def_property_readonly("value", [](const RateEvaluation& r) { return as_float(r.value); })
      .def_property_readonly("optimal_mu",
                             [](const RateEvaluation& r) -> std::optional<std::vector<double>> {
                               if (!r.optimal_mu) return std::nullopt;
                               auto s = r.optimal_mu->mass();
                               return std::vector<double>(s.begin(), s.end());
                             })
      .def_property_readonly("iterations", [](const RateEvaluation& r) { return r.diagnostics.iterations; })
      .def_property_readonly("stationarity", [](const RateEvaluation& r) { return r.diagnostics.stationarity; })
      .def_property_readonly("converged", [](const RateEvaluation& r) { return r.diagnostics.converged; })
      .def_property_readonly("method", [](const RateEvaluation& r) { return r.diagnostics.method; });

  m.def("invariant_measure", [](const Chain& c) {
    ProbabilityMeasure pi = invariant_measure(c);
    return std::vector<double>(pi.mass().begin(), pi.mass().end());
  });
  m.def("w_pi", [](const Chain& c) { return w_pi(c, invariant_measure(c)).values; },
        "Antisymmetric field log[pi(y) r(y,z) / (pi(z) r(z,y))] on undirected edges (lo -> hi).");

  m.def("phi", [](double q, double p) { return as_float(phi(q, p)); });
  m.def("psi", [](double u, double ubar, double a) { return as_float(psi(u, ubar, a)); });

  m.def(
      "current_rate",
      [](const Chain& c, const std::vector<double>& mu, const std::vector<double>& j, bool bis) {
        return current_rate_Itilde(c, ProbabilityMeasure(mu), current_from(c, j),
                                   bis ? CurrentFormula::RffBis : CurrentFormula::Rff);
      },
      py::arg("chain"), py::arg("mu"), py::arg("current"), py::arg("bis") = false);
  m.def("contracted_current_rate",
        [](const Chain& c, const std::vector<double>& j) { return current_rate_contracted(c, current_from(c, j)); });
  m.def("gc_symmetry_residual", [](const Chain& c, const std::vector<double>& mu, const std::vector<double>& j) {
    return check_gc_symmetry(c, ProbabilityMeasure(mu), current_from(c, j));
  });
  m.def("iota", &gc_rate_iota, py::arg("chain"), py::arg("u"));
  m.def(
      "total_flow_rate",
      [](const Chain& c, double level) { return scalar_contraction(c, ObservableSpec::total_flow(c), level); },
      py::arg("chain"), py::arg("level"));
  m.def(
      "current_level_rate",
      [](const Chain& c, StateIndex y, StateIndex z, double level) {
        return scalar_contraction(c, ObservableSpec::current_on(c, y, z), level);
      },
      py::arg("chain"), py::arg("y"), py::arg("z"), py::arg("level"));

  m.def("two_state_rate", &two_state_rate, py::arg("r0"), py::arg("r1"), py::arg("q"));
  m.def("watch_rate", [](const std::vector<double>& rates, double q) { return watch_rate(WatchSpec{rates}, q); });
  m.def(
      "ring_rate", [](std::size_t N, double lam, double p, double j) { return ring_rate(N, lam, p, j); },
      py::arg("N"), py::arg("lam"), py::arg("p"), py::arg("j"));
  m.def("preset_names", &preset_names);
  m.def(
      "load_preset",
      [](const std::string& name, const std::map<std::string, double>& params) { return load_preset(name, params).chain; },
      py::arg("name"), py::arg("params") = std::map<std::string, double>{});

  m.def(
      "simulate",
      [](const Chain& c, StateIndex x0, double horizon, std::uint64_t seed, std::uint64_t stream) {
        Trajectory t = simulate(c, x0, horizon, seed, stream);
        std::vector<std::pair<double, StateIndex>> jumps;
        for (const auto& j : t.jumps) jumps.emplace_back(j.time, j.target);
        ProbabilityMeasure mu = empirical_measure(c, t);
        py::dict out;
        out["jumps"] = jumps;
        out["empirical_measure"] = std::vector<double>(mu.mass().begin(), mu.mass().end());
        out["empirical_current"] = empirical_current(c, t).values;
        out["final_state"] = t.final_state();
        return out;
      },
      py::arg("chain"), py::arg("x0"), py::arg("horizon"), py::arg("seed") = 1, py::arg("stream") = 0);

  m.def(
      "fundamental_cycles",
      [](const Chain& c, StateIndex root) {
        FundamentalBasis b(c, root);
        std::vector<std::vector<StateIndex>> out;
        for (std::size_t k = 0; k < b.size(); ++k) out.push_back(b.cycle(k).vertices);
        return out;
      },
      py::arg("chain"), py::arg("root") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"markovld"};
        full.insert(full.end(), args.begin(), args.end());
        std::ostringstream out, err;
        int code = cli::run(full, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      "Run the command-line interface in-process; returns (exit_code, stdout, stderr).");
}
