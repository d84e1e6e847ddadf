#include "scrip/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scrip/bestreply.hpp"
#include "scrip/errors.hpp"
#include "scrip/exact_chain.hpp"
#include "scrip/inference.hpp"
#include "scrip/io.hpp"
#include "scrip/maxent.hpp"
#include "scrip/simulator.hpp"
#include "scrip/welfare.hpp"

namespace scrip {

namespace {

std::string join_ints(const std::vector<int>& xs, char sep = ';') {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(xs[i]);
  }
  return s;
}

std::vector<int> parse_threshold_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string part;
  while (std::getline(in, part, ';')) {
    size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(part, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != part.size() || v < 0) throw ConfigError("bad threshold list \"" + s + "\"");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty threshold list");
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char extra = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%lf%c", &lo, &hi, &step, &extra) != 3)
    throw ConfigError("grid must be lo:hi:step, got \"" + s + "\"");
  if (!(step > 0.0) || !(hi > lo))
    throw ConfigError("grid must be strictly increasing: lo < hi, step > 0");
  std::vector<double> out;
  for (long long i = 0;; ++i) {
    double x = lo + double(i) * step;
    if (x > hi + 1e-9 * step) break;
    out.push_back(x);
  }
  return out;
}

// CLI11 validator so a malformed grid is a usage error (exit 2), not a domain
// error discovered mid-run.
std::string check_grid(const std::string& s) {
  try {
    parse_grid(s);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

void print_equilibrium_summary(double m, double a, const EquilibriumResult& eq) {
  std::printf("m=%.12g a=%.12g crashed=%s nontrivial=%s\n", m, a, eq.crashed ? "yes" : "no",
              eq.nontrivial ? "yes" : "no");
  std::printf("thresholds: %s\n", join_ints(eq.profile).c_str());
  if (eq.solution)
    std::printf("lambda=%.12g M0=%.12g tau=%.12g\n", eq.solution->lambda,
                eq.solution->zero_fraction, eq.solution->at_threshold_fraction);
  std::printf("welfare_rate=%.12g  (best-reply steps: %zu)\n", eq.welfare,
              eq.iterations.empty() ? 0 : eq.iterations.size() - 1);
}

void print_sweep_summary(const std::string& x_name, const std::vector<SweepPoint>& rows) {
  std::optional<double> first_crash;
  int failed = 0;
  for (const SweepPoint& pt : rows) {
    if (!pt.error.empty()) {
      std::fprintf(stderr, "%s=%.12g failed: %s\n", x_name.c_str(), pt.x, pt.error.c_str());
      ++failed;
      continue;
    }
    const EquilibriumResult& eq = *pt.eq;
    double welfare = pt.welfare ? pt.welfare->per_round : eq.welfare;
    std::printf("%s=%-10.6g crashed=%d welfare=%-12.8g thresholds=%s\n", x_name.c_str(),
                pt.x, eq.crashed ? 1 : 0, welfare, join_ints(eq.profile).c_str());
    if (eq.crashed && !first_crash) first_crash = pt.x;
  }
  if (first_crash)
    std::printf("first crashed row at %s=%.12g\n", x_name.c_str(), *first_crash);
  else
    std::printf("no crashed row in the grid\n");
  if (failed) std::printf("%d row(s) failed\n", failed);
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv) {
  CLI::App app{"scrip economy solver: equilibria, welfare sweeps, simulation, inference"};
  app.require_subcommand(1);

  ToleranceConfig tol;
  auto add_tol_flags = [&tol](CLI::App* sub) {
    sub->add_option("--lambda-tol", tol.lambda_bisection_tol,
                    "mean-money bisection tolerance");
    sub->add_option("--value-tol", tol.value_iteration_tol, "Bellman residual tolerance");
    sub->add_option("--ratio-tol", tol.inference_ratio_tol, "inference ratio-run tolerance");
    sub->add_option("--k-start", tol.k_max_initial, "initial value-iteration truncation");
    sub->add_option("--k-cap", tol.k_max_hard_cap, "truncation growth hard cap");
  };

  std::string config, out, per_type_out, dist_out, dist_in, ratios_out;
  std::string thresholds_str, grid_str, manifest, index_path;
  double money = 0.0, altruists = 0.0, width = 0.05, cap = 1024.0;
  double beta = 1.0, rho = 1.0;
  long long rounds = 1'000'000, burn_in = -1, record_interval = 1;
  long long money_total = 0;
  std::uint64_t seed = kDefaultSeed;
  std::size_t state_cap = 2'000'000;
  bool no_hoarder_requests = false;

  CLI::App* eq_cmd = app.add_subcommand("equilibrium", "solve for the greatest equilibrium");
  eq_cmd->add_option("--config", config, "population JSON")->required();
  eq_cmd->add_option("--money", money, "mean money per non-altruist")->required();
  eq_cmd->add_option("--altruists", altruists, "free-service fraction a");
  eq_cmd->add_option("--out", out, "equilibrium CSV path");
  eq_cmd->add_option("--dist", dist_out, "aggregate money-distribution CSV path");
  eq_cmd->add_option("--per-type", per_type_out, "per-type distribution CSV path");
  add_tol_flags(eq_cmd);
  eq_cmd->callback([&] {
    Population p = load_population(config);
    EquilibriumResult eq = find_equilibrium(p, money, altruists, tol);
    print_equilibrium_summary(money, altruists, eq);
    if (!out.empty()) write_equilibrium_csv(out, money, altruists, eq);
    if (!dist_out.empty() && eq.solution) write_distribution_csv(dist_out, eq.solution->aggregate);
    if (!per_type_out.empty() && eq.solution) write_per_type_csv(per_type_out, *eq.solution);
  });

  CLI::App* crash_cmd = app.add_subcommand("crash", "locate the money-supply crash threshold");
  crash_cmd->add_option("--config", config, "population JSON")->required();
  crash_cmd->add_option("--altruists", altruists, "free-service fraction a");
  crash_cmd->add_option("--width", width, "bracket width")->check(CLI::PositiveNumber);
  crash_cmd->add_option("--cap", cap, "search cap on m")->check(CLI::PositiveNumber);
  crash_cmd->add_option("--out", out, "crash report JSON path");
  add_tol_flags(crash_cmd);
  crash_cmd->callback([&] {
    Population p = load_population(config);
    CrashSearchResult r = crash_threshold(p, altruists, width, cap, tol);
    std::printf("status=%s m_crash=%.12g bracket=[%.12g, %.12g] evaluations=%d\n",
                crash_status_name(r.status).c_str(), r.m_crash, r.lower, r.upper,
                r.evaluations);
    if (!out.empty()) write_crash_json(out, r);
  });

  auto add_sweep = [&](const char* name, const char* help, const char* x_name, bool needs_money,
                       bool takes_altruists, auto runner) {
    CLI::App* cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", config, "population JSON")->required();
    if (needs_money) cmd->add_option("--money", money, "mean money per non-altruist")->required();
    if (takes_altruists) cmd->add_option("--altruists", altruists, "free-service fraction a");
    cmd->add_option("--grid", grid_str, "grid as lo:hi:step")
        ->required()
        ->check(CLI::Validator(check_grid, "GRID"));
    cmd->add_option("--out", out, "sweep CSV path");
    add_tol_flags(cmd);
    cmd->callback([&, x_name, runner] {
      Population p = load_population(config);
      std::vector<SweepPoint> rows = runner(p, parse_grid(grid_str));
      print_sweep_summary(x_name, rows);
      if (!out.empty()) write_sweep_csv(out, x_name, rows);
    });
  };
  add_sweep("sweep-money", "equilibrium and welfare across money supplies", "m",
            /*needs_money=*/false, /*takes_altruists=*/true,
            [&](const Population& p, const std::vector<double>& grid) {
              return sweep_money(p, altruists, grid, tol);
            });
  add_sweep("sweep-altruists", "equilibrium and welfare across free-service fractions", "a",
            /*needs_money=*/true, /*takes_altruists=*/false,
            [&](const Population& p, const std::vector<double>& grid) {
              return sweep_altruists(p, money, grid, tol);
            });
  add_sweep("sweep-hoarders", "equilibrium and welfare across hoarder masses", "f_H",
            /*needs_money=*/true, /*takes_altruists=*/true,
            [&](const Population& p, const std::vector<double>& grid) {
              return sweep_hoarders(p, money, altruists, grid, tol);
            });

  CLI::App* sim_cmd = app.add_subcommand("simulate", "play the round protocol directly");
  sim_cmd->add_option("--config", config, "population JSON")->required();
  sim_cmd->add_option("--money", money, "mean money per non-altruist")->required();
  sim_cmd->add_option("--thresholds", thresholds_str,
                      "semicolon-joined thresholds per standard type "
                      "(default: the computed equilibrium profile)");
  sim_cmd->add_option("--rounds", rounds, "measured rounds")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--burn-in", burn_in, "warm-up rounds (default max(1e6, 100n))");
  sim_cmd->add_option("--seed", seed, "RNG seed");
  sim_cmd->add_option("--record-interval", record_interval,
                      "histogram sampling stride (1 = exact integration)");
  sim_cmd->add_flag("--no-hoarder-requests", no_hoarder_requests,
                    "hoarders never request, their balances only grow");
  sim_cmd->add_option("--out", out, "distribution CSV path (metadata sidecar at <out>.json)");
  add_tol_flags(sim_cmd);
  sim_cmd->callback([&] {
    Population p = load_population(config);
    SimConfig sc;
    sc.population = p;
    if (thresholds_str.empty()) {
      EquilibriumResult eq = find_equilibrium(p, money, p.altruist_fraction, tol);
      std::printf("using equilibrium thresholds: %s%s\n", join_ints(eq.profile).c_str(),
                  eq.crashed ? " (crashed)" : "");
      sc.profile = eq.profile;
    } else {
      sc.profile = parse_threshold_list(thresholds_str);
    }
    sc.mean_money = money;
    sc.rounds = rounds;
    sc.burn_in = burn_in >= 0 ? burn_in : std::max<long long>(1'000'000, 100LL * p.n);
    sc.seed = seed;
    sc.record_interval = record_interval;
    sc.hoarders_request = !no_hoarder_requests;
    SimResult res = run_simulation(sc);
    std::printf("rounds=%lld burn_in=%lld seed=%llu\n", res.rounds_run, res.burn_in_run,
                (unsigned long long)res.seed);
    std::printf("a_hat=%.6g unserved=%.6g welfare_rate=%.12g mean_willing=%.6g\n",
                res.free_service_fraction, res.unserved_fraction, res.welfare_rate,
                res.mean_willing);
    if (payoff_heterogeneous(p)) {
      try {
        MaxEntSolution pred = build_distribution(p, sc.profile, money);
        std::printf("L2 distance from closed form: %.6g\n",
                    compare_to_prediction(res, pred));
      } catch (const ScripError&) {
        // No closed form at this profile (e.g. it cannot hold mean money m).
      }
    }
    if (!out.empty()) {
      write_distribution_csv(out, res.distribution);
      write_sim_json(out + ".json", sc, res);
    }
  });

  CLI::App* infer_cmd = app.add_subcommand("infer", "explain an observed money distribution");
  infer_cmd->add_option("--dist", dist_in, "observed distribution CSV")->required();
  infer_cmd->add_option("--out", out, "explanation JSON path");
  infer_cmd->add_option("--ratios", ratios_out, "per-level ratio CSV path");
  add_tol_flags(infer_cmd);
  infer_cmd->callback([&] {
    ObservedDistribution obs = read_distribution_csv(dist_in);
    Explanation ex = minimal_explanation(obs, tol.inference_ratio_tol, tol);
    std::printf("lambda=%.12g residual=%.6g mean=%.12g\n", ex.lambda, ex.residual,
                obs.mean());
    std::printf("support:");
    for (const auto& [k, f] : ex.mix.entries)
      std::printf(" %s:%.12g", k.str().c_str(), f);
    std::printf("\n");
    if (!out.empty()) write_explanation_json(out, ex);
    if (!ratios_out.empty()) write_ratio_csv(ratios_out, obs);
  });

  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "exact stationary distribution of a tiny system");
  oracle_cmd->add_option("--thresholds", thresholds_str, "semicolon-joined, one per agent")
      ->required();
  oracle_cmd->add_option("--money-total", money_total, "total dollars in play")->required();
  oracle_cmd->add_option("--beta", beta, "shared ability rate");
  oracle_cmd->add_option("--rho", rho, "shared request rate");
  oracle_cmd->add_option("--state-cap", state_cap, "state enumeration guard");
  oracle_cmd->add_option("--out", out, "marginal distribution CSV path");
  oracle_cmd->callback([&] {
    ExactChainSpec spec;
    spec.thresholds = parse_threshold_list(thresholds_str);
    spec.total_money = money_total;
    spec.betas = {beta};
    spec.rhos = {rho};
    spec.state_cap = state_cap;
    ExactChainResult ch = exact_chain(spec);
    std::ostringstream res;
    res << ch.symmetry_residual;
    std::printf("states=%zu symmetry_residual=%s\n", ch.states.size(), res.str().c_str());
    std::vector<double> marginal = to_doubles(ch.marginal);
    std::printf("marginal:");
    for (double q : marginal) std::printf(" %.12g", q);
    std::printf("\n");
    if (!out.empty()) write_distribution_csv(out, marginal);
  });

  CLI::App* suite_cmd = app.add_subcommand("suite", "run a manifest of experiments");
  suite_cmd->add_option("--manifest", manifest, "experiments JSON")->required();
  suite_cmd->add_option("--index", index_path, "status index path (default <manifest>.index.json)");
  suite_cmd->callback([&] {
    run_experiment_suite(manifest, index_path.empty() ? manifest + ".index.json" : index_path);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ScripError& e) {
    std::fprintf(stderr, "%s: %s\n", e.name().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

int run_experiment_suite(const std::string& manifest_path, const std::string& index_path) {
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + manifest_path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("experiments") || !doc["experiments"].is_array())
    throw ConfigError("manifest needs an \"experiments\" array");

  nlohmann::json index;
  index["experiments"] = nlohmann::json::array();
  for (const auto& exp : doc["experiments"]) {
    std::string name = exp.value("name", "");
    nlohmann::json row;
    row["name"] = name;
    if (!exp.contains("argv") || !exp["argv"].is_array() ||
        !std::all_of(exp["argv"].begin(), exp["argv"].end(),
                     [](const nlohmann::json& a) { return a.is_string(); })) {
      row["status"] = 2;
      row["ok"] = false;
      row["error"] = "experiment needs an \"argv\" array of strings";
      index["experiments"].push_back(row);
      continue;
    }
    std::vector<std::string> args{"scripsim"};
    for (const auto& a : exp["argv"]) args.push_back(a.get<std::string>());
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::printf("== %s ==\n", name.c_str());
    int status = parse_and_dispatch(int(argv.size()), argv.data());
    row["status"] = status;
    row["ok"] = status == 0;
    index["experiments"].push_back(row);
  }

  write_text_file(index_path, index.dump(2) + "\n");
  return 0;
}

}  // namespace scrip
