#include "scrip/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scrip {

namespace {

constexpr double kHoarderTailMass = 1e-12;

// Sum of lambda^j for j in 0..k, scaled by lambda^{-k} when lambda > 1 so the
// largest term is 1 and nothing overflows.
struct ScaledPartition {
  double z;       // the (possibly scaled) partition sum
  bool scaled;    // true => weights are lambda^{i-k}/z instead of lambda^i/z
};

ScaledPartition partition(int k, double lambda) {
  ScaledPartition p{0.0, lambda > 1.0};
  if (p.scaled) {
    double term = 1.0;  // lambda^{k-k}
    p.z = term;
    for (int j = k - 1; j >= 0; --j) {
      term /= lambda;
      p.z += term;
    }
  } else {
    double term = 1.0;
    p.z = term;
    for (int j = 1; j <= k; ++j) {
      term *= lambda;
      p.z += term;
    }
  }
  return p;
}

}  // namespace

double geometric_weight(int i, int k, double lambda) {
  if (i < 0 || i > k) return 0.0;
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterRangeError("geometric_weight needs lambda > 0");
  ScaledPartition p = partition(k, lambda);
  double num = p.scaled ? std::pow(lambda, double(i - k)) : std::pow(lambda, double(i));
  return num / p.z;
}

double mean_money_for_threshold(Threshold k, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ParameterRangeError("mean_money_for_threshold needs lambda > 0");
  if (k.is_infinite()) {
    if (lambda >= 1.0)
      throw DivergentMean("infinite threshold has divergent mean at lambda >= 1");
    return lambda / (1.0 - lambda);
  }
  int kk = k.value();
  ScaledPartition p = partition(kk, lambda);
  double num = 0.0;
  if (p.scaled) {
    double term = 1.0;
    num = double(kk) * term;
    for (int j = kk - 1; j >= 1; --j) {
      term /= lambda;
      num += double(j) * term;
    }
  } else {
    double term = 1.0;
    for (int j = 1; j <= kk; ++j) {
      term *= lambda;
      num += double(j) * term;
    }
  }
  return num / p.z;
}

namespace {

double mix_mean(const StrategyMix& mix, double lambda) {
  double m = 0.0;
  for (const auto& [k, f] : mix.entries) {
    if (f <= 0.0) continue;
    m += f * mean_money_for_threshold(k, lambda);
  }
  return m;
}

}  // namespace

double solve_lambda(const StrategyMix& mix, double m, const ToleranceConfig& cfg) {
  cfg.validate();
  mix.validate();
  if (!(m > 0.0) || !std::isfinite(m))
    throw Infeasible("mean money must be positive and finite, got " + std::to_string(m));

  bool has_hoarders = mix.hoarder_mass() > 0.0;
  double ceiling = 0.0;
  bool any_positive_k = has_hoarders;
  for (const auto& [k, f] : mix.entries) {
    if (f <= 0.0 || k.is_infinite()) continue;
    ceiling += f * double(k.value());
    if (k.value() > 0) any_positive_k = true;
  }
  if (!any_positive_k)
    throw Infeasible("every moneyed agent spends down to 0; no lambda can hold mean " +
                     std::to_string(m));
  if (!has_hoarders && m >= ceiling) {
    std::ostringstream os;
    os << "mean money " << m << " at or above the holdable ceiling " << ceiling;
    throw Infeasible(os.str());
  }

  const double tol = cfg.lambda_bisection_tol * (1.0 + m);
  auto residual = [&](double lambda) { return mix_mean(mix, lambda) - m; };

  // Bracket the root. The mean is strictly increasing in lambda, from 0 at
  // lambda -> 0+ to the ceiling (hoarder-free, as lambda -> inf) or +inf
  // (hoarders, as lambda -> 1-).
  double lo = has_hoarders ? 0.5 : 1.0;
  int guard = 0;
  while (residual(lo) > 0.0) {
    lo *= 0.5;
    if (++guard > 2000) throw NonConvergence("failed to bracket lambda from below");
  }
  if (residual(lo) == 0.0) return lo;

  double hi;
  if (has_hoarders) {
    double gap = 0.25;
    hi = 1.0 - gap;
    guard = 0;
    while (hi <= lo || residual(hi) < 0.0) {
      gap *= 0.5;
      hi = 1.0 - gap;
      if (++guard > 2000 || gap <= 0.0)
        throw NonConvergence("failed to bracket lambda below 1");
    }
  } else {
    hi = 1.0;
    guard = 0;
    while (residual(hi) < 0.0) {
      hi *= 2.0;
      if (++guard > 2000) throw NonConvergence("failed to bracket lambda from above");
    }
  }
  if (residual(hi) == 0.0) return hi;

  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    mid = 0.5 * (lo + hi);
    double r = residual(mid);
    if (std::abs(r) <= tol) return mid;
    if (r < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-16 * hi) break;
  }
  if (std::abs(residual(mid)) <= 1e3 * tol) return mid;
  throw NonConvergence("lambda bisection stalled with residual " +
                       std::to_string(residual(mid)));
}

MaxEntSolution build_distribution(const StrategyMix& mix, double m,
                                  const ToleranceConfig& cfg) {
  MaxEntSolution sol;
  sol.lambda = solve_lambda(mix, m, cfg);
  sol.mean_money = m;

  size_t agg_len = 1;
  for (const auto& [k, f] : mix.entries) {
    if (f <= 0.0) continue;
    std::vector<double> row;
    if (k.is_infinite()) {
      // Tail mass after index t is f * lambda^{t+1}; stop once it dips below
      // the fixed truncation budget.
      double lam = sol.lambda;
      row.push_back(f * (1.0 - lam));
      double mass = row[0];
      double term = row[0];
      while (f - mass >= kHoarderTailMass) {
        term *= lam;
        row.push_back(term);
        mass += term;
      }
    } else {
      int kk = k.value();
      row.resize(size_t(kk) + 1);
      for (int i = 0; i <= kk; ++i) row[size_t(i)] = f * geometric_weight(i, kk, sol.lambda);
      sol.at_threshold_fraction += row[size_t(kk)];
    }
    agg_len = std::max(agg_len, row.size());
    sol.per_threshold.emplace(k, std::move(row));
  }

  sol.aggregate.assign(agg_len, 0.0);
  for (const auto& [k, row] : sol.per_threshold)
    for (size_t i = 0; i < row.size(); ++i) sol.aggregate[i] += row[i];
  sol.zero_fraction = sol.aggregate[0];
  return sol;
}

MaxEntSolution build_distribution(const Population& p, const StrategyProfile& profile,
                                  double m, const ToleranceConfig& cfg) {
  validate_population(p);
  if (!payoff_heterogeneous(p))
    throw NotPayoffHeterogeneous(
        "closed-form distribution needs common beta and rho across moneyed types");
  return build_distribution(profile_to_mix(p, profile), m, cfg);
}

double entropy_of(const MaxEntSolution& sol) {
  double h = 0.0;
  for (const auto& [k, row] : sol.per_threshold)
    for (double x : row)
      if (x > 0.0) h -= x * std::log(x);
  return h;
}

}  // namespace scrip
