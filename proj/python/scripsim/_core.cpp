// Python bindings for the solver core. Populations cross the boundary as the
// same JSON documents the CLI accepts, so one schema serves both entry points.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scrip/bestreply.hpp"
#include "scrip/exact_chain.hpp"
#include "scrip/inference.hpp"
#include "scrip/io.hpp"
#include "scrip/maxent.hpp"
#include "scrip/simulator.hpp"
#include "scrip/welfare.hpp"

namespace py = pybind11;
using namespace scrip;

namespace {

py::dict mix_to_dict(const StrategyMix& mix) {
  py::dict d;
  for (const auto& [k, f] : mix.entries) d[py::str(k.str())] = f;
  return d;
}

py::dict solution_to_dict(const MaxEntSolution& sol) {
  py::dict d;
  d["lambda"] = sol.lambda;
  d["mean_money"] = sol.mean_money;
  d["aggregate"] = sol.aggregate;
  py::dict rows;
  for (const auto& [k, row] : sol.per_threshold) rows[py::str(k.str())] = row;
  d["per_threshold"] = rows;
  return d;
}

py::dict equilibrium(const std::string& population_json, double m, double a) {
  Population p = parse_population(population_json);
  auto eq = find_equilibrium(p, m, a);
  py::dict d;
  d["profile"] = eq.profile;
  d["crashed"] = eq.crashed;
  d["nontrivial"] = eq.nontrivial;
  d["welfare_rate"] = eq.welfare;
  if (eq.solution) d["solution"] = solution_to_dict(*eq.solution);
  return d;
}

py::dict distribution(const std::string& population_json,
                      const std::vector<int>& thresholds, double m) {
  Population p = parse_population(population_json);
  return solution_to_dict(build_distribution(p, thresholds, m));
}

py::dict explain(const std::vector<double>& fractions, double tol) {
  ObservedDistribution obs{fractions, std::nullopt};
  Explanation ex = tol > 0.0 ? minimal_explanation(obs, tol) : minimal_explanation(obs);
  py::dict d;
  d["lambda"] = ex.lambda;
  d["pi"] = mix_to_dict(ex.mix);
  d["residual"] = ex.residual;
  d["support_size"] = ex.support_size;
  d["top_threshold"] = ex.top_threshold;
  return d;
}

py::dict simulate(const std::string& population_json, const std::vector<int>& thresholds,
                  double m, long long rounds, long long burn_in, std::uint64_t seed) {
  SimConfig cfg;
  cfg.population = parse_population(population_json);
  cfg.profile = thresholds;
  cfg.mean_money = m;
  cfg.rounds = rounds;
  cfg.burn_in = burn_in;
  cfg.seed = seed;
  auto out = run_simulation(cfg);
  py::dict d;
  d["distribution"] = out.distribution;
  d["final_money"] = out.final_money;
  d["welfare_rate"] = out.welfare_rate;
  d["unserved_fraction"] = out.unserved_fraction;
  d["paid_trades"] = out.paid_trades;
  d["free_trades"] = out.free_trades;
  d["unserved"] = out.unserved;
  d["money_total"] = out.money_total;
  return d;
}

py::dict crash(const std::string& population_json, double a, double width,
               double m_cap) {
  Population p = parse_population(population_json);
  auto r = crash_threshold(p, a, width, m_cap);
  py::dict d;
  d["status"] = crash_status_name(r.status);
  d["m_crash"] = r.m_crash;
  d["lower"] = r.lower;
  d["upper"] = r.upper;
  d["evaluations"] = r.evaluations;
  return d;
}

std::vector<double> exact_marginal(const std::vector<int>& thresholds,
                                   long long total_money) {
  ExactChainSpec spec;
  spec.thresholds = thresholds;
  spec.total_money = total_money;
  auto res = exact_chain(spec);
  std::vector<double> out;
  out.reserve(res.marginal.size());
  for (const auto& q : res.marginal) out.push_back(q.convert_to<double>());
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "scrip economy solvers: equilibria, distributions, inference, simulation";
  mod.def("equilibrium", &equilibrium, py::arg("population_json"), py::arg("m"),
          py::arg("a") = 0.0);
  mod.def("distribution", &distribution, py::arg("population_json"),
          py::arg("thresholds"), py::arg("m"));
  mod.def("minimal_explanation", &explain, py::arg("fractions"), py::arg("tol") = 0.0);
  mod.def("simulate", &simulate, py::arg("population_json"), py::arg("thresholds"),
          py::arg("m"), py::arg("rounds"), py::arg("burn_in") = 0,
          py::arg("seed") = kDefaultSeed);
  mod.def("crash_threshold", &crash, py::arg("population_json"), py::arg("a") = 0.0,
          py::arg("width") = 0.05, py::arg("m_cap") = 1024.0);
  mod.def("exact_marginal", &exact_marginal, py::arg("thresholds"),
          py::arg("total_money"));

  py::register_exception<ScripError>(mod, "ScripError");
}
