// Release gate: one check per shipped claim, each printed as a single
// PASS/FAIL line. Tolerances are pinned below next to the criterion they
// guard; the exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "scrip/bestreply.hpp"
#include "scrip/exact_chain.hpp"
#include "scrip/inference.hpp"
#include "scrip/maxent.hpp"
#include "scrip/simulator.hpp"
#include "scrip/welfare.hpp"

using namespace scrip;

namespace {

// 1: equilibrium reproduction
constexpr int kEqThresholdSlack = 1;
constexpr double kEqRuntimeSeconds = 10.0;
// 2: inference of the generating mixture
constexpr double kInferFractionTol = 0.01;
constexpr double kInferRuntimeSeconds = 1.0;
// 3: exhaustive exact-chain verification
constexpr int kChainMaxAgents = 4;
constexpr long long kChainMaxMoney = 4;
constexpr int kChainMaxThreshold = 3;
constexpr double kChainRuntimeSeconds = 300.0;
// 4: simulation convergence to the closed form
constexpr long long kSimRounds = 10'000'000;
constexpr long long kSimBurnIn = 1'000'000;
constexpr double kSimL2Bound = 0.02;
constexpr double kSimRuntimeSeconds = 300.0;
// 5: money-supply laws
constexpr double kSweepStep = 0.25;
constexpr double kCrashBracketWidth = 0.05;
constexpr double kMonotoneSlack = 1e-9;
// 6/7: altruist and hoarder sweeps
constexpr double kAltruistStep = 0.05;
constexpr double kHoarderStep = 0.05;
constexpr double kHoarderStabilizedMass = 0.05;
constexpr double kCrashSearchCap = 1024.0;
// 8: monotone best replies
constexpr int kMonotonePopulations = 100;
// 9: explanation multiplicity
constexpr int kMinDistinctExplanations = 3;
// 10: entropy maximality
constexpr int kEntropyInstances = 20;
constexpr int kEntropyPerturbations = 100;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt_profile(const StrategyProfile& p) {
  std::string s = "(";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(p[i]);
  }
  return s + ")";
}

std::vector<double> make_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (double x = lo; x <= hi + 1e-9 * step; x += step) g.push_back(x);
  return g;
}

bool criterion_equilibrium(std::string& detail) {
  Timer t;
  auto eq = find_equilibrium(oracle::two_type_population(), 4.0, 0.0);
  double secs = t.seconds();
  std::ostringstream os;
  os << "profile " << fmt_profile(eq.profile) << " in " << secs << " s";
  detail = os.str();
  if (secs >= kEqRuntimeSeconds) return false;
  return eq.nontrivial && eq.profile.size() == 2 &&
         std::abs(eq.profile[0] - 20) <= kEqThresholdSlack &&
         std::abs(eq.profile[1] - 13) <= kEqThresholdSlack;
}

bool criterion_inference(std::string& detail) {
  auto sol = build_distribution(oracle::two_type_population(), {20, 13}, 4.0);
  ObservedDistribution obs{sol.aggregate, std::nullopt};
  Timer t;
  auto ex = minimal_explanation(obs);
  double secs = t.seconds();

  std::set<int> support;
  for (const auto& [k, f] : ex.mix.entries)
    if (!k.is_infinite()) support.insert(k.value());
  double pi13 = ex.mix.entries.count(Threshold::finite(13))
                    ? ex.mix.entries.at(Threshold::finite(13))
                    : 0.0;
  double pi20 = ex.mix.entries.count(Threshold::finite(20))
                    ? ex.mix.entries.at(Threshold::finite(20))
                    : 0.0;
  std::ostringstream os;
  os << "support {";
  for (int k : support) os << k << " ";
  os << "}, pi = (" << pi13 << ", " << pi20 << ") in " << secs << " s";
  detail = os.str();
  return secs < kInferRuntimeSeconds && support == std::set<int>{13, 20} &&
         std::fabs(pi13 - 0.7) <= kInferFractionTol &&
         std::fabs(pi20 - 0.3) <= kInferFractionTol;
}

bool criterion_exact_chains(std::string& detail) {
  Timer t;
  long long checked = 0, infeasible = 0;
  for (int n = 2; n <= kChainMaxAgents; ++n) {
    std::vector<int> k(size_t(n), 0);
    while (true) {
      long long cap = std::accumulate(k.begin(), k.end(), 0LL);
      for (long long M = 1; M <= kChainMaxMoney; ++M) {
        for (double beta : {1.0, 0.6}) {
          for (double rho : {1.0, 1.5}) {
            ExactChainSpec spec;
            spec.thresholds = k;
            spec.betas = {beta};
            spec.rhos = {rho};
            spec.total_money = M;
            if (cap < M) {
              try {
                exact_chain(spec);
                detail = "expected Infeasible for caps below the money supply";
                return false;
              } catch (const Infeasible&) {
                ++infeasible;
              }
              continue;
            }
            auto res = exact_chain(spec);
            if (res.symmetry_residual != 0) {
              detail = "nonzero symmetry residual";
              return false;
            }
            const Rational uniform(1, (long long)res.states.size());
            for (const auto& pi : res.stationary)
              if (pi != uniform) {
                detail = "stationary distribution not uniform";
                return false;
              }
            Rational mean(0);
            for (size_t i = 0; i < res.marginal.size(); ++i)
              mean += Rational((long long)i) * res.marginal[i];
            if (mean != Rational(M, n)) {
              detail = "marginal mean off the exact money supply";
              return false;
            }
            ++checked;
          }
        }
      }
      size_t i = 0;
      while (i < k.size() && k[i] == kChainMaxThreshold) k[i++] = 0;
      if (i == k.size()) break;
      ++k[i];
    }
  }
  double secs = t.seconds();
  std::ostringstream os;
  os << checked << " systems exactly doubly stochastic (" << infeasible
     << " infeasible rejected) in " << secs << " s";
  detail = os.str();
  return secs < kChainRuntimeSeconds && checked > 0;
}

bool criterion_simulation(std::string& detail) {
  Timer t;
  SimConfig cfg;
  cfg.population = oracle::homogeneous_population(1000);
  cfg.profile = {5};
  cfg.mean_money = 2.0;
  cfg.rounds = kSimRounds;
  cfg.burn_in = kSimBurnIn;
  auto run = run_simulation(cfg);
  auto sol = build_distribution(cfg.population, cfg.profile, cfg.mean_money);

  double l2 = 0.0;
  for (size_t i = 0; i < std::max(run.distribution.size(), sol.aggregate.size()); ++i) {
    double x = i < run.distribution.size() ? run.distribution[i] : 0.0;
    double y = i < sol.aggregate.size() ? sol.aggregate[i] : 0.0;
    l2 += (x - y) * (x - y);
  }
  l2 = std::sqrt(l2);
  double secs = t.seconds();
  std::ostringstream os;
  os << "L2 " << l2 << " after " << kSimRounds << " rounds in " << secs << " s";
  detail = os.str();
  return l2 < kSimL2Bound && secs < kSimRuntimeSeconds;
}

bool criterion_money_laws(std::string& detail) {
  auto p = oracle::two_type_population();
  auto crash = crash_threshold(p, 0.0, kCrashBracketWidth);
  if (crash.status != CrashStatus::Bracketed) {
    detail = "no crash bracket found";
    return false;
  }
  if (crash.upper - crash.lower > kCrashBracketWidth + 1e-12) {
    detail = "bracket wider than requested";
    return false;
  }
  if (!find_equilibrium(p, crash.lower, 0.0).nontrivial) {
    detail = "bracket lower end is not a working economy";
    return false;
  }
  if (!find_equilibrium(p, crash.upper, 0.0).crashed) {
    detail = "bracket upper end did not crash";
    return false;
  }

  auto grid = make_grid(kSweepStep, std::ceil(crash.upper) + 2.0, kSweepStep);
  auto rows = sweep_money(p, 0.0, grid);
  double first_crash_x = -1.0;
  double prev_welfare = -1e300;
  const StrategyProfile* prev_profile = nullptr;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      detail = "sweep row at m = " + std::to_string(r.x) + " failed: " + r.error;
      return false;
    }
    if (r.eq->crashed) {
      if (first_crash_x < 0.0) first_crash_x = r.x;
      continue;
    }
    if (first_crash_x >= 0.0) continue;  // welfare law only binds up to the crash
    if (prev_profile) {
      for (size_t i = 0; i < prev_profile->size(); ++i)
        if (r.eq->profile[i] > (*prev_profile)[i]) {
          detail = "thresholds increased with money at m = " + std::to_string(r.x);
          return false;
        }
    }
    if (r.welfare->per_round < prev_welfare - kMonotoneSlack) {
      detail = "welfare decreased before the crash at m = " + std::to_string(r.x);
      return false;
    }
    prev_welfare = r.welfare->per_round;
    prev_profile = &r.eq->profile;
  }
  if (first_crash_x < 0.0) {
    detail = "no crashed row in the sweep";
    return false;
  }
  if (first_crash_x < crash.lower - kSweepStep - 1e-9 ||
      first_crash_x > crash.upper + kSweepStep + 1e-9) {
    detail = "sweep crash point and bisection bracket disagree";
    return false;
  }
  std::ostringstream os;
  os << "first crash at m = " << first_crash_x << ", bracket [" << crash.lower << ", "
     << crash.upper << "]";
  detail = os.str();
  return true;
}

bool criterion_altruists(std::string& detail) {
  auto p = oracle::homogeneous_population();
  auto crash = crash_threshold(p, 0.0, kCrashBracketWidth);
  const double m = 2.0;
  if (!(m < crash.lower)) {
    detail = "probe money supply is not below the crash";
    return false;
  }
  auto rows = sweep_altruists(p, m, make_grid(0.0, 0.95, kAltruistStep));
  double prev = -1e300;
  int healthy = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      detail = "sweep row at a = " + std::to_string(r.x) + " failed: " + r.error;
      return false;
    }
    if (r.eq->crashed) break;
    if (r.welfare->per_round < prev - kMonotoneSlack) {
      detail = "welfare decreased at a = " + std::to_string(r.x);
      return false;
    }
    prev = r.welfare->per_round;
    ++healthy;
  }
  std::ostringstream os;
  os << healthy << " working rows, welfare non-decreasing to " << prev;
  detail = os.str();
  return healthy >= 2;
}

bool criterion_hoarders(std::string& detail) {
  Population p = oracle::two_type_population();
  p.hoarder_type = AgentType{0.05, 1.0, 1.0, 0.95, 1.0};
  auto rows = sweep_hoarders(p, 2.0, 0.0, make_grid(0.0, 0.5, kHoarderStep));
  const SweepPoint* prev = nullptr;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      detail = "sweep row at f_H = " + std::to_string(r.x) + " failed: " + r.error;
      return false;
    }
    if (!r.eq->nontrivial) {
      detail = "economy collapsed at f_H = " + std::to_string(r.x);
      return false;
    }
    if (prev) {
      for (size_t i = 0; i < r.eq->profile.size(); ++i) {
        if (r.eq->profile[i] < prev->eq->profile[i]) {
          detail = "thresholds fell with hoarder mass at f_H = " + std::to_string(r.x);
          return false;
        }
        if (r.welfare->per_type_utility[i] >
            prev->welfare->per_type_utility[i] + kMonotoneSlack) {
          detail = "standard utility rose with hoarder mass at f_H = " +
                   std::to_string(r.x);
          return false;
        }
      }
    }
    prev = &r;
  }

  Population q = oracle::two_type_population();
  q.types[0].fraction = 0.3 * (1.0 - kHoarderStabilizedMass);
  q.types[1].fraction = 0.7 * (1.0 - kHoarderStabilizedMass);
  q.hoarder_fraction = kHoarderStabilizedMass;
  q.hoarder_type = AgentType{0.05, 1.0, 1.0, 0.95, 1.0};
  auto crash = crash_threshold(q, 0.0, kCrashBracketWidth, kCrashSearchCap);
  if (crash.status != CrashStatus::HoarderStabilized) {
    detail = "expected hoarders to hold the economy up to the search cap";
    return false;
  }
  std::ostringstream os;
  os << rows.size() << " hoarder rows monotone; no crash below m = " << crash.m_crash;
  detail = os.str();
  return crash.m_crash == kCrashSearchCap;
}

bool criterion_monotone_best_reply(std::string& detail) {
  std::mt19937_64 rng(8675309);
  int done = 0, attempts = 0;
  while (done < kMonotonePopulations) {
    if (++attempts > kMonotonePopulations * 30) {
      detail = "could not draw enough feasible instances";
      return false;
    }
    Population p = oracle::random_population(rng);
    StrategyProfile lo(p.types.size()), hi(p.types.size());
    double mix_mean = 0.0;
    for (size_t i = 0; i < p.types.size(); ++i) {
      lo[i] = 1 + int(rng() % 14);
      hi[i] = lo[i] + int(rng() % 11);
      mix_mean += p.types[i].fraction * lo[i];
    }
    double m = 0.35 * mix_mean;
    if (m <= 0.05) continue;
    try {
      auto bl = best_reply_profile(p, lo, m, 0.0);
      auto bh = best_reply_profile(p, hi, m, 0.0);
      for (size_t i = 0; i < bl.size(); ++i)
        if (bl[i] > bh[i]) {
          std::ostringstream os;
          os << "violation: BR" << fmt_profile(lo) << " = " << fmt_profile(bl)
             << " exceeds BR" << fmt_profile(hi) << " = " << fmt_profile(bh);
          detail = os.str();
          return false;
        }
      ++done;
    } catch (const Infeasible&) {
      continue;
    } catch (const ThresholdUnbounded&) {
      continue;
    }
  }
  detail = std::to_string(done) + " comparable pairs, zero violations";
  return true;
}

bool criterion_explanations(std::string& detail) {
  struct Instance {
    StrategyMix mix;
    double m;
    int top;
    int support;
  };
  auto mk = [](std::initializer_list<std::pair<int, double>> entries, double m) {
    Instance inst;
    inst.m = m;
    inst.top = 0;
    for (auto [k, w] : entries) {
      inst.mix.entries[Threshold::finite(k)] = w;
      inst.top = std::max(inst.top, k);
    }
    inst.support = int(entries.size());
    return inst;
  };
  std::vector<Instance> instances = {
      mk({{13, 0.7}, {20, 0.3}}, 4.0),
      mk({{4, 0.5}, {9, 0.5}}, 2.0),
      mk({{6, 1.0}}, 2.5),
  };
  std::ostringstream os;
  for (const auto& inst : instances) {
    auto sol = build_distribution(inst.mix, inst.m);
    ObservedDistribution obs{sol.aggregate, std::nullopt};
    std::vector<double> grid;
    for (double f : {1.0, 1.1, 1.25, 1.5, 2.0, 3.0}) grid.push_back(f * sol.lambda);
    auto fam = enumerate_explanations(obs, grid);
    int valid = 0;
    for (size_t i = 0; i < fam.size(); ++i) {
      if (!fam[i]) continue;
      ++valid;
      const bool generating = i == 0;
      if (!generating && fam[i]->support_size < inst.top - inst.support) {
        std::ostringstream err;
        err << "alternative at lambda x" << grid[i] / sol.lambda << " has support "
            << fam[i]->support_size << " < " << inst.top - inst.support;
        detail = err.str();
        return false;
      }
    }
    if (valid < kMinDistinctExplanations) {
      detail = "only " + std::to_string(valid) + " valid explanations for top " +
               std::to_string(inst.top);
      return false;
    }
    os << valid << "/" << grid.size() << " valid (top " << inst.top << ") ";
  }
  detail = os.str();
  return true;
}

bool criterion_entropy(std::string& detail) {
  std::mt19937_64 rng(1729);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int instances = 0, perturbations = 0, violations = 0;
  while (instances < kEntropyInstances) {
    StrategyMix mix;
    int parts = 1 + int(rng() % 3);
    std::set<int> ks;
    while (int(ks.size()) < parts) ks.insert(2 + int(rng() % 11));
    std::vector<double> w(static_cast<size_t>(parts));
    double wsum = 0.0;
    for (auto& x : w) {
      x = 0.2 + u(rng);
      wsum += x;
    }
    bool hoarders = u(rng) < 0.3;
    double hoarder_mass = hoarders ? 0.1 + 0.2 * u(rng) : 0.0;
    size_t idx = 0;
    double finite_mean_cap = 0.0;
    for (int k : ks) {
      double share = (1.0 - hoarder_mass) * w[idx] / wsum;
      mix.entries[Threshold::finite(k)] = share;
      finite_mean_cap += share * k;
      ++idx;
    }
    if (hoarders) mix.entries[Threshold::infinite()] = hoarder_mass;
    double m = (0.25 + 0.5 * u(rng)) * finite_mean_cap + (hoarders ? 0.5 : 0.0);
    if (m <= 0.05) continue;

    auto sol = build_distribution(mix, m);
    const double h0 = oracle::table_entropy(sol.per_threshold);
    const double mean0 = oracle::table_mean(sol.per_threshold);
    int applied = 0;
    for (int trial = 0; trial < kEntropyPerturbations; ++trial) {
      auto pert = oracle::perturb(sol.per_threshold, rng);
      if (!pert) continue;
      ++applied;
      if (std::fabs(oracle::table_mean(*pert) - mean0) > 1e-9) continue;
      if (oracle::table_entropy(*pert) > h0) ++violations;
    }
    if (applied == 0) continue;  // degenerate draw: retry with a fresh mix
    perturbations += applied;
    ++instances;
  }
  std::ostringstream os;
  os << instances << " instances, " << perturbations << " perturbations, "
     << violations << " violations";
  detail = os.str();
  return violations == 0 && perturbations >= kEntropyInstances * kEntropyPerturbations / 2;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"two-type equilibrium", criterion_equilibrium},
      {"mixture inference", criterion_inference},
      {"exact chain enumeration", criterion_exact_chains},
      {"simulation convergence", criterion_simulation},
      {"money-supply laws", criterion_money_laws},
      {"altruist law", criterion_altruists},
      {"hoarder laws", criterion_hoarders},
      {"monotone best replies", criterion_monotone_best_reply},
      {"explanation multiplicity", criterion_explanations},
      {"entropy maximality", criterion_entropy},
  };

  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    if (!ok) ++failed;
    std::printf("%s %2zu %s: %s\n", ok ? "PASS" : "FAIL", i + 1, criteria[i].name,
                detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - size_t(failed),
              criteria.size());
  return failed;
}
