#include "scrip/inference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "scrip/maxent.hpp"

namespace scrip {

double ObservedDistribution::mean() const {
  double m = 0.0;
  for (size_t i = 0; i < fractions.size(); ++i) m += double(i) * fractions[i];
  return m;
}

bool ObservedDistribution::fully_supported() const {
  for (double f : fractions)
    if (f <= 0.0) return false;
  return true;
}

void ObservedDistribution::validate() const {
  if (fractions.empty()) throw ParameterRangeError("observed distribution is empty");
  double sum = 0.0;
  for (double f : fractions) {
    if (!std::isfinite(f) || f < 0.0)
      throw ParameterRangeError("observed fractions must be finite and >= 0");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw FractionSumError("observed fractions sum to " + std::to_string(sum));
  if (fractions.back() <= 0.0)
    throw ParameterRangeError("top money level must carry positive mass");
}

namespace {

// Top-down peel restricted to a support set. Returns the raw (unclamped)
// masses keyed by threshold; levels outside the support contribute none.
std::map<int, double> peel_support(const std::vector<double>& M, const std::set<int>& support,
                                   double lambda) {
  std::map<int, double> pi;
  int K = int(M.size()) - 1;
  for (int j = K; j >= 0; --j) {
    if (!support.count(j)) continue;
    double pred = 0.0;
    for (const auto& [l, mass] : pi)
      if (l > j) pred += mass * geometric_weight(j, l, lambda);
    pi[j] = (M[size_t(j)] - pred) / geometric_weight(j, j, lambda);
  }
  return pi;
}

StrategyMix to_mix(const std::map<int, double>& pi) {
  StrategyMix mix;
  double sum = 0.0;
  for (const auto& [k, mass] : pi) {
    double m = std::max(mass, 0.0);
    if (m > 0.0) {
      mix.entries[Threshold::finite(k)] = m;
      sum += m;
    }
  }
  if (sum <= 0.0) throw NegativeMass("reconstruction left no positive mass");
  for (auto& [k, m] : mix.entries) m /= sum;
  return mix;
}

double rebuild_residual(const ObservedDistribution& obs, const StrategyMix& mix,
                        const ToleranceConfig& cfg) {
  MaxEntSolution sol = build_distribution(mix, obs.mean(), cfg);
  size_t len = std::max(sol.aggregate.size(), obs.fractions.size());
  double s = 0.0;
  for (size_t i = 0; i < len; ++i) {
    double a = i < obs.fractions.size() ? obs.fractions[i] : 0.0;
    double b = i < sol.aggregate.size() ? sol.aggregate[i] : 0.0;
    s += (a - b) * (a - b);
  }
  return std::sqrt(s);
}

Explanation finish(const ObservedDistribution& obs, double lambda, const StrategyMix& mix,
                   const ToleranceConfig& cfg) {
  Explanation e;
  e.lambda = lambda;
  e.mix = mix;
  e.residual = rebuild_residual(obs, mix, cfg);
  e.support_size = int(mix.entries.size());
  e.top_threshold = obs.top_index();
  return e;
}

}  // namespace

StrategyMix reconstruct_mix(const ObservedDistribution& obs, double lambda, double tol) {
  obs.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterRangeError("reconstruction needs lambda > 0");
  if (!(tol >= 0.0)) throw ParameterRangeError("tolerance must be >= 0");

  int K = obs.top_index();
  std::set<int> all;
  for (int j = 0; j <= K; ++j) all.insert(j);
  std::map<int, double> pi = peel_support(obs.fractions, all, lambda);
  for (const auto& [j, mass] : pi) {
    if (mass < -tol) {
      std::ostringstream os;
      os << "level " << j << " demands mass " << mass << " at lambda " << lambda;
      throw NegativeMass(os.str());
    }
  }
  return to_mix(pi);
}

Explanation minimal_explanation(const ObservedDistribution& obs) {
  return minimal_explanation(obs, ToleranceConfig{}.inference_ratio_tol);
}

Explanation minimal_explanation(const ObservedDistribution& obs, double tol,
                                const ToleranceConfig& cfg) {
  cfg.validate();
  obs.validate();
  if (!(tol > 0.0) || !std::isfinite(tol))
    throw ParameterRangeError("ratio tolerance must be positive");
  if (!obs.fully_supported())
    throw ParameterRangeError("minimal explanation needs every level populated");
  int K = obs.top_index();
  if (K < 1) throw ParameterRangeError("need at least two money levels");

  const std::vector<double>& M = obs.fractions;

  std::vector<double> ratio(size_t(K) + 1, 0.0);
  for (int i = 1; i <= K; ++i) ratio[size_t(i)] = M[size_t(i)] / M[size_t(i - 1)];

  // Ratio runs: consecutive levels whose ratios agree within tol share one
  // lambda estimate; the top run(s) sit strictly at lambda, dips mark the
  // levels just above a threshold.
  double lambda_hat = 0.0;
  {
    double run_sum = ratio[1];
    int run_len = 1;
    auto close_run = [&] { lambda_hat = std::max(lambda_hat, run_sum / run_len); };
    for (int i = 2; i <= K; ++i) {
      double mean = run_sum / run_len;
      if (std::abs(ratio[size_t(i)] - mean) <= tol * mean) {
        run_sum += ratio[size_t(i)];
        ++run_len;
      } else {
        close_run();
        run_sum = ratio[size_t(i)];
        run_len = 1;
      }
    }
    close_run();
  }

  std::set<int> support{K};
  for (int i = 1; i <= K; ++i)
    if (ratio[size_t(i)] < lambda_hat * (1.0 - tol)) support.insert(i - 1);

  // Grow the support until the rebuilt distribution matches: each failed
  // attempt promotes the level with the largest unexplained mass.
  const double mass_floor = -std::max(tol, 1e-12);
  const double accept = std::max(1e-8, 10.0 * tol);
  while (true) {
    std::map<int, double> pi = peel_support(M, support, lambda_hat);
    bool negative = false;
    for (const auto& [j, mass] : pi)
      if (mass < mass_floor) negative = true;

    if (!negative) {
      try {
        StrategyMix mix = to_mix(pi);
        Explanation e = finish(obs, lambda_hat, mix, cfg);
        if (e.residual <= accept) return e;
      } catch (const ScripError&) {
        // fall through to support growth
      }
    }

    if (int(support.size()) == K + 1) break;
    int worst = -1;
    double worst_gap = 0.0;
    for (int j = 0; j <= K; ++j) {
      if (support.count(j)) continue;
      double pred = 0.0;
      for (const auto& [l, mass] : pi)
        if (l > j && mass > 0.0) pred += mass * geometric_weight(j, l, lambda_hat);
      double gap = std::abs(M[size_t(j)] - pred);
      if (worst < 0 || gap > worst_gap) {
        worst = j;
        worst_gap = gap;
      }
    }
    support.insert(worst);
  }

  // Full-support peel as the last resort, at the estimated lambda.
  try {
    StrategyMix mix = reconstruct_mix(obs, lambda_hat, std::max(tol, 1e-9));
    Explanation e = finish(obs, lambda_hat, mix, cfg);
    if (e.residual <= accept) return e;
  } catch (const ScripError&) {
  }
  std::ostringstream os;
  os << "no threshold mix at lambda " << lambda_hat << " reproduces the observation";
  throw NoExplanation(os.str());
}

std::vector<std::optional<Explanation>> enumerate_explanations(
    const ObservedDistribution& obs, const std::vector<double>& lambdas,
    const ToleranceConfig& cfg) {
  cfg.validate();
  obs.validate();
  std::vector<std::optional<Explanation>> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    try {
      StrategyMix mix = reconstruct_mix(obs, lam, 1e-9);
      out.push_back(finish(obs, lam, mix, cfg));
    } catch (const NegativeMass&) {
      out.emplace_back();
    }
  }
  return out;
}

DeltaInterval calibrate_type(int k, const EnvironmentRates& rates, double beta, double rho,
                             double alpha, double gamma, const ToleranceConfig& cfg) {
  cfg.validate();
  if (k < 0) throw ParameterRangeError("target threshold must be >= 0");

  // The per-round discount approaches 1 as delta does, and value iteration
  // slows in step; the cap keeps every probe tractable.
  const double lo_edge = 1e-6;
  const double hi_edge = 0.9999;
  const double dtol = 1e-9;

  std::map<double, long> cache;
  auto g = [&](double delta) -> long {
    auto it = cache.find(delta);
    if (it != cache.end()) return it->second;
    AgentType t{alpha, beta, gamma, delta, rho};
    long v;
    try {
      v = best_threshold(t, rates, cfg);
    } catch (const ThresholdUnbounded&) {
      v = std::numeric_limits<long>::max();
    }
    cache.emplace(delta, v);
    // More patience must never buy a lower threshold.
    long prev = -1;
    for (const auto& [d, kv] : cache) {
      if (kv < prev)
        throw MonotonicityViolation("threshold decreased as delta increased near " +
                                    std::to_string(d));
      prev = kv;
    }
    return v;
  };

  if (g(lo_edge) > k)
    throw NoSolution("threshold exceeds " + std::to_string(k) + " for every delta");
  if (g(hi_edge) < k)
    throw NoSolution("threshold stays below " + std::to_string(k) +
                     " for every delta up to " + std::to_string(hi_edge));

  // First delta on the ladder reaching the target, then bisect each boundary.
  auto lowest_reaching = [&](long target, double floor_val) -> double {
    if (g(floor_val) >= target) return floor_val;
    double lo = floor_val, hi = hi_edge;
    for (double step : {0.5, 0.9, 0.99, 0.999}) {
      if (step <= lo || step >= hi) continue;
      if (g(step) >= target)
        hi = step;
      else
        lo = step;
      if (g(step) >= target) break;
    }
    while (hi - lo > dtol) {
      double mid = 0.5 * (lo + hi);
      if (g(mid) >= target)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  };

  DeltaInterval out;
  out.lower = k == 0 ? lo_edge : lowest_reaching(k, lo_edge);
  out.upper = g(hi_edge) == k ? hi_edge : lowest_reaching(k + 1, out.lower);
  if (out.upper <= out.lower)
    throw NoSolution("no delta window attains threshold " + std::to_string(k));
  if (g(0.5 * (out.lower + out.upper)) != k)
    throw NoSolution("threshold jumps past " + std::to_string(k));
  return out;
}

}  // namespace scrip
