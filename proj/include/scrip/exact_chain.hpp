#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <vector>

#include "scrip/types.hpp"

namespace scrip {

using Rational = boost::multiprecision::cpp_rational;

// A fully explicit instance of the money chain: one threshold per agent,
// ability/request rates either shared (size 1) or per agent. Mixed beta or
// rho values are rejected; the closed-form stationary result needs them
// common, and this module exists to check exactly that.
struct ExactChainSpec {
  std::vector<int> thresholds;
  std::vector<double> betas{1.0};
  std::vector<double> rhos{1.0};
  long long total_money = 0;
  size_t state_cap = 2'000'000;  // enumeration guard
};

struct ExactChainResult {
  // Reachable money allocations x with sum(x) = total_money, 0 <= x_i <= k_i,
  // in lexicographic order.
  std::vector<std::vector<int>> states;
  // Sparse transition rows in rational arithmetic, diagonal included.
  std::vector<std::map<int, Rational>> transitions;
  std::vector<Rational> stationary;
  // max |P(s -> s') - P(s' -> s)| over all pairs; exactly zero for every
  // admissible input.
  Rational symmetry_residual;
  // Exact aggregate money distribution: fraction of (state, agent) mass at
  // each money level under the stationary distribution.
  std::vector<Rational> marginal;
};

ExactChainResult exact_chain(const ExactChainSpec& spec);

// Convenience overload: realises the population's standard types (and
// hoarders, whose threshold saturates at total_money) as explicit agents.
// Populations with altruists are rejected; agent counts follow the same
// largest-remainder rounding as the simulator.
ExactChainResult exact_chain(const Population& p, const StrategyProfile& profile,
                             long long total_money, size_t state_cap = 2'000'000);

std::vector<double> to_doubles(const std::vector<Rational>& xs);

}  // namespace scrip
