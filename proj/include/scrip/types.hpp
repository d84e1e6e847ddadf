#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scrip/errors.hpp"

namespace scrip {

// Strategy threshold: volunteer for paid work while money < k. The infinite
// threshold (hoarders: always volunteer, never stop accumulating) is a
// distinct state, not a large integer, so geometric-series limits stay exact.
class Threshold {
 public:
  constexpr Threshold() = default;

  static constexpr Threshold finite(int k) {
    if (k < 0 || k >= kInfiniteRaw) throw ParameterRangeError("threshold out of range");
    Threshold t;
    t.raw_ = k;
    return t;
  }

  static constexpr Threshold infinite() {
    Threshold t;
    t.raw_ = kInfiniteRaw;
    return t;
  }

  constexpr bool is_infinite() const { return raw_ == kInfiniteRaw; }

  constexpr int value() const {
    if (is_infinite()) throw ParameterRangeError("infinite threshold has no finite value");
    return raw_;
  }

  // Finite thresholds order ascending; infinite compares greatest.
  constexpr auto operator<=>(const Threshold&) const = default;

  std::string str() const { return is_infinite() ? "inf" : std::to_string(raw_); }

 private:
  static constexpr int kInfiniteRaw = std::numeric_limits<int>::max();
  int raw_ = 0;
};

// One agent type: cost of performing a service (alpha), probability of being
// able to perform it (beta), value of receiving it (gamma), discount factor
// per expected own-request interval (delta), relative request rate (rho).
struct AgentType {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  double delta = 0.0;
  double rho = 1.0;

  friend bool operator==(const AgentType&, const AgentType&) = default;
};

struct TypeShare {
  AgentType type;
  double fraction = 0.0;
};

// Population description. Standard types play threshold strategies chosen by
// the best-reply machinery; hoarders volunteer at every wealth level (the
// infinite threshold) while requesting and paying like anyone else; altruists
// provide free service, hold no money, and never request.
struct Population {
  std::vector<TypeShare> types;
  int n = 0;
  double hoarder_fraction = 0.0;
  double altruist_fraction = 0.0;
  // Payoff parameters for the hoarder mass. Optional when the standard types
  // share beta and rho (the common values are reused); required otherwise.
  std::optional<AgentType> hoarder_type;

  double standard_fraction() const;
};

// One finite threshold per standard type, aligned with Population::types.
using StrategyProfile = std::vector<int>;

// Fraction of the moneyed (non-altruist) population playing each threshold.
struct StrategyMix {
  std::map<Threshold, double> entries;

  double total() const;
  double hoarder_mass() const;
  // Largest finite threshold with positive mass, if any.
  std::optional<int> max_finite_threshold() const;
  void validate() const;
};

// Numeric knobs shared across the solvers. Defaults are the pinned values the
// rest of the library and the test suite assume.
struct ToleranceConfig {
  double lambda_bisection_tol = 1e-12;    // relative, on the mean-money residual
  double value_iteration_tol = 1e-10;     // sup-norm of the one-step Bellman residual
  double inference_ratio_tol = 1e-6;      // relative, for ratio-run grouping
  int k_max_initial = 200;                // starting truncation for value iteration
  int k_max_hard_cap = 12800;             // doubling stops here -> ThresholdUnbounded

  void validate() const;
};

// Checks population invariants, returning the population unchanged so calls
// compose. Non-fatal advisories (e.g. gamma <= alpha for a standard type) are
// appended to *warnings when provided.
Population validate_population(const Population& p,
                               std::vector<std::string>* warnings = nullptr);

// True when all standard types (and the hoarder mass, if any) share beta and
// rho. Heterogeneity in alpha, gamma, delta is fine; beta or rho differences
// break the closed-form stationary distribution.
bool payoff_heterogeneous(const Population& p);

// Aggregates per-type thresholds into a mix over the non-altruist population:
// standard fractions renormalised by 1/(1 - altruist_fraction), hoarder mass
// mapped to the infinite threshold. Types sharing a threshold merge.
StrategyMix profile_to_mix(const Population& p, const StrategyProfile& profile);

// Payoff parameters of the hoarder mass: hoarder_type when given, otherwise
// inherited from the standard types provided they agree on alpha, beta and
// rho (ConfigError when they don't).
AgentType resolve_hoarder_type(const Population& p);

// Largest-remainder apportionment of n seats to the given non-negative
// weights. Deterministic: ties go to the lower index.
std::vector<int> apportion_counts(const std::vector<double>& weights, int n);

}  // namespace scrip
