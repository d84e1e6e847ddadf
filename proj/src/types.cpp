#include "scrip/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scrip {

namespace {

constexpr double kFractionSumTol = 1e-9;

void check_unit_interval(double v, const char* name, bool open_left, bool open_right,
                         const std::string& ctx) {
  bool ok = std::isfinite(v);
  if (ok) {
    ok = open_left ? v > 0.0 : v >= 0.0;
    if (ok) ok = open_right ? v < 1.0 : v <= 1.0;
  }
  if (!ok) {
    std::ostringstream os;
    os << ctx << ": " << name << " = " << v << " outside its admissible range";
    throw ParameterRangeError(os.str());
  }
}

void check_type_params(const AgentType& t, const std::string& ctx) {
  if (!std::isfinite(t.alpha) || t.alpha < 0.0)
    throw ParameterRangeError(ctx + ": alpha must be finite and >= 0");
  check_unit_interval(t.beta, "beta", true, false, ctx);
  if (!std::isfinite(t.gamma) || t.gamma < 0.0)
    throw ParameterRangeError(ctx + ": gamma must be finite and >= 0");
  check_unit_interval(t.delta, "delta", true, true, ctx);
  if (!std::isfinite(t.rho) || t.rho <= 0.0)
    throw ParameterRangeError(ctx + ": rho must be finite and > 0");
}

}  // namespace

double Population::standard_fraction() const {
  double s = 0.0;
  for (const auto& ts : types) s += ts.fraction;
  return s;
}

double StrategyMix::total() const {
  double s = 0.0;
  for (const auto& [k, f] : entries) s += f;
  return s;
}

double StrategyMix::hoarder_mass() const {
  auto it = entries.find(Threshold::infinite());
  return it == entries.end() ? 0.0 : it->second;
}

std::optional<int> StrategyMix::max_finite_threshold() const {
  std::optional<int> best;
  for (const auto& [k, f] : entries) {
    if (!k.is_infinite() && f > 0.0) {
      if (!best || k.value() > *best) best = k.value();
    }
  }
  return best;
}

void StrategyMix::validate() const {
  for (const auto& [k, f] : entries) {
    if (!std::isfinite(f) || f < 0.0)
      throw ParameterRangeError("strategy mix has a negative or non-finite share at " + k.str());
  }
  if (std::abs(total() - 1.0) > kFractionSumTol)
    throw FractionSumError("strategy mix shares sum to " + std::to_string(total()) +
                           ", expected 1");
}

void ToleranceConfig::validate() const {
  if (!(lambda_bisection_tol > 0.0) || !(value_iteration_tol > 0.0) ||
      !(inference_ratio_tol > 0.0))
    throw ParameterRangeError("tolerances must be positive");
  if (k_max_initial < 1 || k_max_hard_cap < k_max_initial)
    throw ParameterRangeError("k_max_initial must be >= 1 and <= k_max_hard_cap");
}

Population validate_population(const Population& p, std::vector<std::string>* warnings) {
  if (p.n < 2) throw ParameterRangeError("population size n must be >= 2");
  check_unit_interval(p.hoarder_fraction, "hoarder_fraction", false, false, "population");
  check_unit_interval(p.altruist_fraction, "altruist_fraction", false, false, "population");
  if (p.altruist_fraction >= 1.0)
    throw ParameterRangeError("population: altruist_fraction must be < 1");

  double sum = p.hoarder_fraction + p.altruist_fraction;
  for (size_t i = 0; i < p.types.size(); ++i) {
    const auto& ts = p.types[i];
    std::string ctx = "types[" + std::to_string(i) + "]";
    check_type_params(ts.type, ctx);
    if (!std::isfinite(ts.fraction) || ts.fraction < 0.0)
      throw ParameterRangeError(ctx + ": fraction must be finite and >= 0");
    sum += ts.fraction;
    if (warnings && ts.type.gamma <= ts.type.alpha)
      warnings->push_back(ctx + ": gamma <= alpha, paid service destroys surplus");
  }
  if (std::abs(sum - 1.0) > kFractionSumTol) {
    std::ostringstream os;
    os << "population fractions sum to " << sum << ", expected 1";
    throw FractionSumError(os.str());
  }
  if (p.hoarder_type) check_type_params(*p.hoarder_type, "hoarder_type");
  return p;
}

bool payoff_heterogeneous(const Population& p) {
  std::optional<double> beta, rho;
  auto absorb = [&](double b, double r) {
    if (!beta) {
      beta = b;
      rho = r;
      return true;
    }
    return b == *beta && r == *rho;
  };
  for (const auto& ts : p.types)
    if (!absorb(ts.type.beta, ts.type.rho)) return false;
  if (p.hoarder_fraction > 0.0 && p.hoarder_type)
    if (!absorb(p.hoarder_type->beta, p.hoarder_type->rho)) return false;
  return true;
}

std::vector<int> apportion_counts(const std::vector<double>& weights, int n) {
  if (n < 0) throw ParameterRangeError("cannot apportion a negative count");
  size_t m = weights.size();
  if (m == 0) throw ParameterRangeError("cannot apportion to zero groups");
  std::vector<int> counts(m, 0);
  std::vector<std::pair<double, size_t>> rema(m);
  long long assigned = 0;
  for (size_t i = 0; i < m; ++i) {
    if (!(weights[i] >= 0.0)) throw ParameterRangeError("apportionment weight < 0");
    double exact = weights[i] * double(n);
    double fl = std::floor(exact + 1e-9);
    counts[i] = int(fl);
    assigned += counts[i];
    rema[i] = {exact - fl, i};
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (size_t j = 0; assigned < n; ++j, ++assigned) counts[rema[j % m].second]++;
  while (assigned > n) {  // defensive; floors keep the sum at or below n
    for (size_t i = 0; i < m && assigned > n; ++i)
      if (counts[i] > 0) {
        counts[i]--;
        assigned--;
      }
  }
  return counts;
}

AgentType resolve_hoarder_type(const Population& p) {
  if (p.hoarder_type) return *p.hoarder_type;
  if (p.types.empty())
    throw ConfigError("hoarder_type required: no standard types to inherit from");
  const AgentType& first = p.types.front().type;
  for (const auto& ts : p.types) {
    if (ts.type.alpha != first.alpha || ts.type.beta != first.beta ||
        ts.type.rho != first.rho)
      throw ConfigError(
          "hoarder_type required: standard types disagree on alpha, beta or rho");
  }
  return first;
}

StrategyMix profile_to_mix(const Population& p, const StrategyProfile& profile) {
  if (profile.size() != p.types.size())
    throw ParameterRangeError("profile has " + std::to_string(profile.size()) +
                              " thresholds for " + std::to_string(p.types.size()) + " types");
  double moneyed = 1.0 - p.altruist_fraction;
  StrategyMix mix;
  for (size_t i = 0; i < profile.size(); ++i) {
    if (profile[i] < 0) throw ParameterRangeError("negative threshold in profile");
    if (p.types[i].fraction <= 0.0) continue;
    mix.entries[Threshold::finite(profile[i])] += p.types[i].fraction / moneyed;
  }
  if (p.hoarder_fraction > 0.0)
    mix.entries[Threshold::infinite()] += p.hoarder_fraction / moneyed;
  return mix;
}

}  // namespace scrip
