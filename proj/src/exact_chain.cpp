#include "scrip/exact_chain.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

namespace scrip {

namespace {

Rational rational_pow(const Rational& base, long long e) {
  Rational acc(1);
  for (long long i = 0; i < e; ++i) acc *= base;
  return acc;
}

// All x with sum = money, 0 <= x_i <= min(k_i, money), lexicographic.
std::vector<std::vector<int>> enumerate_states(const std::vector<int>& caps,
                                               long long money, size_t cap) {
  size_t n = caps.size();
  std::vector<long long> suffix(n + 1, 0);
  for (size_t i = n; i > 0; --i) suffix[i - 1] = suffix[i] + caps[i - 1];

  std::vector<std::vector<int>> states;
  std::vector<int> x(n, 0);
  // Depth-first with remaining-capacity pruning.
  std::function<void(size_t, long long)> rec = [&](size_t i, long long rem) {
    if (rem > suffix[i]) return;
    if (i == n) {
      states.push_back(x);
      if (states.size() > cap)
        throw StateSpaceTooLarge("state space exceeds cap of " + std::to_string(cap));
      return;
    }
    int hi = int(std::min<long long>(caps[i], rem));
    for (int v = 0; v <= hi; ++v) {
      x[i] = v;
      rec(i + 1, rem - v);
    }
    x[i] = 0;
  };
  rec(0, money);
  return states;
}

}  // namespace

ExactChainResult exact_chain(const ExactChainSpec& spec) {
  size_t n = spec.thresholds.size();
  if (n < 1) throw ParameterRangeError("chain needs at least one agent");
  if (spec.total_money < 0) throw ParameterRangeError("total money must be >= 0");
  for (int k : spec.thresholds)
    if (k < 0) throw ParameterRangeError("negative threshold in chain spec");

  auto broadcast = [&](const std::vector<double>& v, const char* what) {
    if (v.size() != 1 && v.size() != n)
      throw ParameterRangeError(std::string(what) + " must have 1 or n entries");
    return v.size() == 1 ? std::vector<double>(n, v[0]) : v;
  };
  std::vector<double> betas = broadcast(spec.betas, "betas");
  std::vector<double> rhos = broadcast(spec.rhos, "rhos");
  for (double b : betas)
    if (!(b > 0.0 && b <= 1.0)) throw ParameterRangeError("beta outside (0, 1]");
  for (double r : rhos)
    if (!(r > 0.0)) throw ParameterRangeError("rho must be > 0");
  for (size_t i = 1; i < n; ++i)
    if (betas[i] != betas[0] || rhos[i] != rhos[0])
      throw NotPayoffHeterogeneous(
          "exact chain needs a common beta and rho; heterogeneity in alpha, gamma, "
          "delta is the supported kind");

  std::vector<int> caps(n);
  long long total_cap = 0;
  for (size_t i = 0; i < n; ++i) {
    caps[i] = int(std::min<long long>(spec.thresholds[i], spec.total_money));
    total_cap += caps[i];
  }
  if (spec.total_money > total_cap)
    throw Infeasible("total money " + std::to_string(spec.total_money) +
                     " exceeds what the thresholds can hold");

  ExactChainResult out;
  out.states = enumerate_states(caps, spec.total_money, spec.state_cap);
  size_t N = out.states.size();

  auto state_index = [&](const std::vector<int>& s) {
    auto it = std::lower_bound(out.states.begin(), out.states.end(), s);
    return int(it - out.states.begin());
  };

  const Rational beta(betas[0]);
  const Rational one(1);
  Rational rho_total(0);
  std::vector<Rational> rho_r(n);
  for (size_t i = 0; i < n; ++i) {
    rho_r[i] = Rational(rhos[i]);
    rho_total += rho_r[i];
  }

  // Serve probability for one of W willing agents: sum over able subsets of
  // P(subset) / |subset|, which collapses to (1 - (1-beta)^W) / W.
  std::vector<Rational> serve_prob(n + 1, Rational(0));
  for (size_t w = 1; w <= n; ++w)
    serve_prob[w] = (one - rational_pow(one - beta, (long long)w)) / Rational((unsigned)w);

  out.transitions.assign(N, {});
  for (size_t si = 0; si < N; ++si) {
    const std::vector<int>& x = out.states[si];
    auto& row = out.transitions[si];
    Rational stay(0);
    for (size_t u = 0; u < n; ++u) {
      Rational pick_u = rho_r[u] / rho_total;
      if (x[u] == 0) {
        stay += pick_u;  // broke requester: nothing moves
        continue;
      }
      int willing = 0;
      for (size_t j = 0; j < n; ++j)
        if (j != u && x[j] < caps[j]) ++willing;
      if (willing == 0) {
        stay += pick_u;
        continue;
      }
      Rational per_target = pick_u * serve_prob[size_t(willing)];
      Rational moved(0);
      std::vector<int> y = x;
      for (size_t v = 0; v < n; ++v) {
        if (v == u || x[v] >= caps[v]) continue;
        y[u] = x[u] - 1;
        y[v] = x[v] + 1;
        row[state_index(y)] += per_target;
        moved += per_target;
        y[u] = x[u];
        y[v] = x[v];
      }
      stay += pick_u - moved;  // nobody able this round
    }
    row[int(si)] += stay;
  }

  // Every nonzero directed edge is visited, so a pair whose reverse entry is
  // missing still gets compared against zero.
  out.symmetry_residual = Rational(0);
  for (size_t si = 0; si < N; ++si) {
    for (const auto& [sj, pij] : out.transitions[si]) {
      if (size_t(sj) == si) continue;
      const auto& other = out.transitions[size_t(sj)];
      auto it = other.find(int(si));
      Rational pji = it == other.end() ? Rational(0) : it->second;
      Rational d = pij >= pji ? pij - pji : pji - pij;
      if (d > out.symmetry_residual) out.symmetry_residual = d;
    }
  }

  // Row sums are 1 by construction; symmetric transitions then make every
  // column sum 1 as well, and the uniform distribution is stationary.
  std::vector<Rational> colsum(N, Rational(0));
  for (size_t si = 0; si < N; ++si)
    for (const auto& [sj, pij] : out.transitions[si]) colsum[size_t(sj)] += pij;
  for (size_t sj = 0; sj < N; ++sj) {
    if (colsum[sj] != one)
      throw std::logic_error("transition matrix is not doubly stochastic");
  }
  out.stationary.assign(N, one / Rational((unsigned long long)N));

  long long max_level = 0;
  for (int c : caps) max_level = std::max<long long>(max_level, c);
  out.marginal.assign(size_t(max_level) + 1, Rational(0));
  Rational weight = one / (Rational((unsigned long long)N) * Rational((unsigned)n));
  for (const auto& s : out.states)
    for (int xi : s) out.marginal[size_t(xi)] += weight;
  return out;
}

ExactChainResult exact_chain(const Population& p, const StrategyProfile& profile,
                             long long total_money, size_t state_cap) {
  validate_population(p);
  if (p.altruist_fraction > 0.0)
    throw ConfigError("the exact chain tracks money only; altruists are not supported");
  if (profile.size() != p.types.size())
    throw ParameterRangeError("profile has one threshold per standard type");

  std::vector<double> weights;
  for (const auto& ts : p.types) weights.push_back(ts.fraction);
  weights.push_back(p.hoarder_fraction);
  std::vector<int> counts = apportion_counts(weights, p.n);

  ExactChainSpec spec;
  spec.total_money = total_money;
  spec.state_cap = state_cap;
  spec.betas.clear();
  spec.rhos.clear();
  for (size_t i = 0; i < p.types.size(); ++i) {
    for (int c = 0; c < counts[i]; ++c) {
      spec.thresholds.push_back(profile[i]);
      spec.betas.push_back(p.types[i].type.beta);
      spec.rhos.push_back(p.types[i].type.rho);
    }
  }
  int hoarders = counts[p.types.size()];
  if (hoarders > 0) {
    AgentType ht = resolve_hoarder_type(p);
    // A hoarder never stops volunteering; within a fixed money supply the
    // cap total_money is equivalent to an infinite threshold.
    long long k = std::min<long long>(total_money, std::numeric_limits<int>::max());
    for (int c = 0; c < hoarders; ++c) {
      spec.thresholds.push_back(int(k));
      spec.betas.push_back(ht.beta);
      spec.rhos.push_back(ht.rho);
    }
  }
  if (spec.thresholds.empty()) throw ConfigError("population realises no moneyed agents");
  return exact_chain(spec);
}

std::vector<double> to_doubles(const std::vector<Rational>& xs) {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = xs[i].convert_to<double>();
  return out;
}

}  // namespace scrip
