#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "scrip/maxent.hpp"
#include "scrip/types.hpp"

namespace scrip {

// Seed used by the CLI and anywhere else a default is needed. Runs with equal
// configs and seeds reproduce byte-identical results within one build.
inline constexpr std::uint64_t kDefaultSeed = 1729;

struct SimConfig {
  Population population;
  StrategyProfile profile;       // one threshold per standard type
  double mean_money = 0.0;       // per non-altruist; total supply is rounded
  long long rounds = 0;          // measured rounds, after burn_in
  long long burn_in = 0;
  std::uint64_t seed = kDefaultSeed;
  // Histogram sampling stride. 1 integrates the occupancy exactly (every
  // round); larger values snapshot every record_interval-th measured round.
  long long record_interval = 1;
  // Hoarders normally request like anyone else; turning this off freezes
  // their spending, so their balances only ever grow.
  bool hoarders_request = true;
};

struct SimResult {
  // Exact time average (over the measured rounds) of the money histogram
  // across non-altruists, normalised to sum 1.
  std::vector<double> distribution;
  double welfare_rate = 0.0;           // realized per-round welfare, standard gains only
  double free_service_fraction = 0.0;  // rounds served by an altruist / rounds
  double unserved_fraction = 0.0;      // requester got nothing this round / rounds
  long long paid_trades = 0;
  long long free_trades = 0;
  long long unserved = 0;
  double mean_willing = 0.0;  // average paid-volunteer pool size (standard + hoarder)
  std::vector<int> final_money;  // all agents, altruists included (always 0)
  // Sum over measured rounds of per-round welfare discounted at delta^(1/n)
  // per round; present when every standard type shares delta.
  std::optional<double> discounted_welfare;
  long long rounds_run = 0;
  long long burn_in_run = 0;
  std::uint64_t seed = 0;
  long long money_total = 0;
  int n_standard = 0;
  int n_hoarders = 0;
  int n_altruists = 0;
};

// Plays the request/volunteer protocol round by round: a weighted-random
// requester, a binomially thinned able pool, a uniform server among the able
// volunteers, one unit of money moving on every paid trade.
SimResult run_simulation(const SimConfig& cfg);

// L2 distance between the simulated money distribution and the closed-form
// aggregate (shorter vector zero-padded).
double compare_to_prediction(const SimResult& sim, const MaxEntSolution& predicted);

}  // namespace scrip
