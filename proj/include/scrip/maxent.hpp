#pragma once

#include <map>
#include <vector>

#include "scrip/types.hpp"

namespace scrip {

// Stationary money distribution for a strategy mix, in closed form: within a
// threshold class the occupancy of level i is proportional to lambda^i, and a
// single lambda couples the classes through the mean-money constraint.
struct MaxEntSolution {
  double lambda = 0.0;
  double mean_money = 0.0;
  // Joint occupancy table, one row per threshold with positive mass. Row k
  // holds masses for money levels 0..k; the infinite-threshold row is
  // truncated where its remaining tail is below 1e-12.
  std::map<Threshold, std::vector<double>> per_threshold;
  // Column sums of the table: aggregate[i] = fraction of moneyed agents
  // holding exactly i.
  std::vector<double> aggregate;
  double zero_fraction = 0.0;          // aggregate[0]
  double at_threshold_fraction = 0.0;  // mass sitting exactly at a finite threshold
};

// P(money = i | threshold k) = lambda^i / (1 + lambda + ... + lambda^k).
// Stable for any lambda > 0; exact at lambda = 1.
double geometric_weight(int i, int k, double lambda);

// Mean of the truncated geometric on {0..k}, or lambda/(1-lambda) for the
// infinite threshold. Throws DivergentMean when k is infinite and lambda >= 1.
double mean_money_for_threshold(Threshold k, double lambda);

// Finds the unique lambda > 0 matching mean money m for the mix. Throws
// Infeasible when no lambda can reach m (m <= 0, or m at or above the ceiling
// sum_k pi_k * k of a hoarder-free mix).
double solve_lambda(const StrategyMix& mix, double m, const ToleranceConfig& cfg = {});

MaxEntSolution build_distribution(const StrategyMix& mix, double m,
                                  const ToleranceConfig& cfg = {});

// Population-level convenience: requires common beta and rho across the
// moneyed masses (NotPayoffHeterogeneous otherwise), then solves for the mix
// induced by the profile.
MaxEntSolution build_distribution(const Population& p, const StrategyProfile& profile,
                                  double m, const ToleranceConfig& cfg = {});

// Shannon entropy (natural log) of the joint occupancy table.
double entropy_of(const MaxEntSolution& sol);

}  // namespace scrip
