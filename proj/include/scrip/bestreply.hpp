#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "scrip/maxent.hpp"
#include "scrip/types.hpp"

namespace scrip {

// Per-round event rates a single agent faces when everyone else plays the
// given mix at mean money m with free-service fraction a.
struct EnvironmentRates {
  int n = 0;
  double free_service_fraction = 0.0;  // a
  double zero_fraction = 0.0;          // mass of moneyed agents at 0
  double at_threshold_fraction = 0.0;  // mass sitting exactly at a finite threshold
  double request_prob = 0.0;           // 1/n: this agent is the round's requester
  double earn_prob = 0.0;              // chosen to perform a paid service this round

  // delta^{1/n}: one round is 1/n of the agent's natural discounting period.
  double per_round_discount(const AgentType& t) const {
    return std::pow(t.delta, 1.0 / double(n));
  }
};

EnvironmentRates environment_rates(const Population& p, const StrategyProfile& profile,
                                   double m, double a, const ToleranceConfig& cfg = {});

struct ValueFunction {
  std::vector<double> values;  // V(0..k_max)
  int k_max = 0;
  int sweeps = 0;
  double residual = 0.0;  // sup-norm one-step Bellman residual at exit
};

// Solves the single-agent dynamic program on money levels 0..k_max: each
// round the agent requests with probability request_prob (free service with
// probability a, else pays one unit if it has one) and otherwise may accept
// paid work at earn_prob for net -alpha + one unit. Values are pre-round,
// discounted by per_round_discount(t).
ValueFunction value_iteration(const AgentType& t, const EnvironmentRates& rates, int k_max,
                              double tol);

// Smallest i at which one more unit of money stops being worth the work:
// k = min { i >= 0 : discount * (V(i+1) - V(i)) <= alpha }. Grows the
// truncation until the answer is insensitive to it; ThresholdUnbounded past
// the hard cap. earn_prob == 0 short-circuits to 0.
int best_threshold(const AgentType& t, const EnvironmentRates& rates,
                   const ToleranceConfig& cfg = {});

// One synchronous best-reply step for every standard type against the
// environment induced by `profile`.
StrategyProfile best_reply_profile(const Population& p, const StrategyProfile& profile,
                                   double m, double a, const ToleranceConfig& cfg = {});

struct EquilibriumResult {
  StrategyProfile profile;
  std::optional<MaxEntSolution> solution;  // absent when crashed
  bool crashed = false;     // no nontrivial equilibrium: money cannot circulate
  bool nontrivial = false;  // some standard type volunteers (threshold > 0)
  double welfare = 0.0;     // per-round welfare rate at the outcome
  std::vector<StrategyProfile> iterations;  // trace, initial profile included
};

// Greatest equilibrium by monotone best-reply dynamics started from the
// all-k_max_initial profile. The sequence is componentwise non-increasing;
// it either settles on a nontrivial fixed point or collapses (all-zero fixed
// point, or an intermediate profile that cannot hold mean money m).
EquilibriumResult find_equilibrium(const Population& p, double m, double a,
                                   const ToleranceConfig& cfg = {});

}  // namespace scrip
