#pragma once

#include <optional>
#include <vector>

#include "scrip/bestreply.hpp"
#include "scrip/types.hpp"

namespace scrip {

// An observed aggregate money distribution: fractions[i] is the share of
// moneyed agents holding exactly i. The top index must carry positive mass.
struct ObservedDistribution {
  std::vector<double> fractions;
  std::optional<long long> sample_size;  // when known, for the record only

  int top_index() const { return int(fractions.size()) - 1; }
  double mean() const;
  // No zero entries below the top index (every level reachable).
  bool fully_supported() const;
  void validate() const;
};

// A candidate account of an observed distribution: the temperature lambda and
// the threshold mix that reproduce it.
struct Explanation {
  double lambda = 0.0;
  StrategyMix mix;
  // L2 gap between the observation and the distribution rebuilt from the mix
  // at the observed mean.
  double residual = 0.0;
  int support_size = 0;
  int top_threshold = 0;
};

// Peels threshold masses off the distribution top-down for a given lambda:
// the top level pins pi_K, lower levels subtract the geometric contributions
// of everything above. NegativeMass when some level demands pi < -tol.
StrategyMix reconstruct_mix(const ObservedDistribution& obs, double lambda,
                            double tol = 1e-9);

// Smallest-support account of the observation. Level ratios r_i = M_i/M_{i-1}
// equal lambda away from thresholds and dip below it one step above each
// threshold; the largest ratio-run average estimates lambda, the dips locate
// the support. Falls back to growing the support, then to the full
// reconstruction, before giving up with NoExplanation. `tol` is the relative
// ratio-run tolerance (raise it for noisy observations).
Explanation minimal_explanation(const ObservedDistribution& obs, double tol,
                                const ToleranceConfig& cfg = {});
Explanation minimal_explanation(const ObservedDistribution& obs);

// The whole identifiability picture: one entry per candidate lambda, empty
// where the reconstruction demands negative mass.
std::vector<std::optional<Explanation>> enumerate_explanations(
    const ObservedDistribution& obs, const std::vector<double>& lambdas,
    const ToleranceConfig& cfg = {});

struct DeltaInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Discount factors under which an agent with the given payoff parameters
// best-responds with exactly threshold k in this environment. NoSolution when
// no delta in the searchable range produces k.
DeltaInterval calibrate_type(int k, const EnvironmentRates& rates, double beta,
                             double rho, double alpha, double gamma,
                             const ToleranceConfig& cfg = {});

}  // namespace scrip
