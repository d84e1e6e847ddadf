#include "scrip/bestreply.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scrip/welfare.hpp"

namespace scrip {

namespace {

// Coefficients of the two per-state affine maps V(i) -> value. Neighbor terms
// are folded into the constant during a sweep; only the self-coefficient
// matters for the exact per-state solve.
struct StageCoeffs {
  double disc;     // per-round discount
  double pr;       // request probability
  double pe;       // earn probability
  double a;        // free-service fraction
  double alpha;
  double gamma;
};

// One application of the Bellman operator at state i given a value snapshot.
double bellman_apply(const StageCoeffs& c, const std::vector<double>& v, int i, int kmax) {
  double req = c.a * (c.gamma + c.disc * v[size_t(i)]);
  if (i >= 1)
    req += (1.0 - c.a) * (c.gamma + c.disc * v[size_t(i - 1)]);
  else
    req += (1.0 - c.a) * c.disc * v[0];
  double up = c.disc * v[size_t(std::min(i + 1, kmax))];
  double idle = c.disc * v[size_t(i)];
  double work = c.pe * (-c.alpha + up) + (1.0 - c.pe) * idle;
  return c.pr * req + (1.0 - c.pr) * std::max(idle, work);
}

}  // namespace

EnvironmentRates environment_rates(const Population& p, const StrategyProfile& profile,
                                   double m, double a, const ToleranceConfig& cfg) {
  validate_population(p);
  if (!(a >= 0.0 && a <= 1.0))
    throw ParameterRangeError("free-service fraction a must lie in [0, 1]");
  MaxEntSolution sol = build_distribution(p, profile, m, cfg);

  EnvironmentRates r;
  r.n = p.n;
  r.free_service_fraction = a;
  r.zero_fraction = sol.zero_fraction;
  r.at_threshold_fraction = sol.at_threshold_fraction;
  r.request_prob = 1.0 / double(p.n);
  // Paid work arrives at rate (1-a)(1-M_0)/n per agent and is shared by the
  // 1-tau fraction still below their threshold.
  double denom = double(p.n) * (1.0 - r.at_threshold_fraction);
  if (denom <= 0.0) {
    r.earn_prob = (1.0 - r.zero_fraction) > 0.0 ? 1.0 : 0.0;
  } else {
    r.earn_prob = std::min(1.0, (1.0 - a) * (1.0 - r.zero_fraction) / denom);
  }
  return r;
}

ValueFunction value_iteration(const AgentType& t, const EnvironmentRates& rates, int k_max,
                              double tol) {
  if (k_max < 1) throw ParameterRangeError("value iteration needs k_max >= 1");
  if (!(tol > 0.0)) throw ParameterRangeError("value iteration needs tol > 0");

  StageCoeffs c{rates.per_round_discount(t), rates.request_prob, rates.earn_prob,
                rates.free_service_fraction, t.alpha, t.gamma};

  // Gauss-Seidel with the self-loop solved exactly per state: both choices
  // are affine in V(i) with slope < 1, and the fixed point of their max is
  // the max of the per-choice fixed points. Convergence is still certified
  // against the plain Bellman operator below.
  const double self_req = c.pr * c.a * c.disc;
  const double self_req0 = self_req + c.pr * (1.0 - c.a) * c.disc;
  const double den_idle = 1.0 - self_req - (1.0 - c.pr) * c.disc;
  const double den_idle0 = 1.0 - self_req0 - (1.0 - c.pr) * c.disc;
  const double den_work = 1.0 - self_req - (1.0 - c.pr) * (1.0 - c.pe) * c.disc;
  const double den_work0 = 1.0 - self_req0 - (1.0 - c.pr) * (1.0 - c.pe) * c.disc;

  std::vector<double> v(size_t(k_max) + 1, 0.0);

  auto relax_state = [&](int i) {
    double req_const = c.pr * c.a * c.gamma;
    if (i >= 1)
      req_const += c.pr * (1.0 - c.a) * (c.gamma + c.disc * v[size_t(i - 1)]);
    double work_const;
    if (i < k_max)
      work_const = (1.0 - c.pr) * c.pe * (-c.alpha + c.disc * v[size_t(i + 1)]);
    else
      work_const = (1.0 - c.pr) * c.pe * (-c.alpha);  // up-move folds into self
    double di = i == 0 ? den_idle0 : den_idle;
    double dw = i == 0 ? den_work0 : den_work;
    if (i == k_max) dw = di;  // both branches then share the full self loop
    double v_idle = req_const / di;
    double v_work = (req_const + work_const) / dw;
    v[size_t(i)] = std::max(v_idle, v_work);
  };

  // Sweep cap from the measured contraction modulus of the folded system.
  double worst_ratio = 0.0;
  {
    double off_idle = c.pr * (1.0 - c.a) * c.disc;
    double off_work = off_idle + (1.0 - c.pr) * c.pe * c.disc;
    worst_ratio = std::max(off_idle / den_idle, off_work / den_work);
    worst_ratio = std::min(worst_ratio * worst_ratio, 1.0 - 1e-12);  // Gauss-Seidel ~ squared
  }
  const long cap = std::min<long>(5000000, 1000 + long(60.0 / -std::log(worst_ratio)));

  ValueFunction out;
  out.k_max = k_max;
  double res = std::numeric_limits<double>::infinity();
  long sweep = 0;
  for (; sweep < cap; ++sweep) {
    if (sweep % 2 == 0) {
      for (int i = 0; i <= k_max; ++i) relax_state(i);
    } else {
      for (int i = k_max; i >= 0; --i) relax_state(i);
    }
    res = 0.0;
    for (int i = 0; i <= k_max; ++i)
      res = std::max(res, std::abs(bellman_apply(c, v, i, k_max) - v[size_t(i)]));
    if (res <= tol) break;
  }
  if (res > tol) {
    std::ostringstream os;
    os << "value iteration stalled at residual " << res << " after " << sweep
       << " sweeps (k_max " << k_max << ")";
    throw NonConvergence(os.str());
  }
  out.values = std::move(v);
  out.sweeps = int(std::min<long>(sweep + 1, std::numeric_limits<int>::max()));
  out.residual = res;
  return out;
}

int best_threshold(const AgentType& t, const EnvironmentRates& rates,
                   const ToleranceConfig& cfg) {
  cfg.validate();
  if (rates.earn_prob <= 0.0) return 0;  // money cannot be earned, never volunteer

  int k_max = cfg.k_max_initial;
  for (;;) {
    ValueFunction vf = value_iteration(t, rates, k_max, cfg.value_iteration_tol);
    double disc = rates.per_round_discount(t);

    int k = k_max;
    for (int i = 0; i < k_max; ++i) {
      if (disc * (vf.values[size_t(i + 1)] - vf.values[size_t(i)]) <= t.alpha) {
        k = i;
        break;
      }
    }
    // Optimal one-more-unit values must switch off once and stay off.
    for (int i = k + 1; i < k_max; ++i) {
      if (disc * (vf.values[size_t(i + 1)] - vf.values[size_t(i)]) > t.alpha)
        throw MonotonicityViolation(
            "marginal value of money is not monotone: work set not downward closed at " +
            std::to_string(i));
    }
    // Values near the truncation edge are biased by the clamp; only accept a
    // threshold comfortably inside the window.
    int margin = std::max(8, k_max / 8);
    if (k <= k_max - margin) return k;
    if (k_max >= cfg.k_max_hard_cap)
      throw ThresholdUnbounded("threshold still at the truncation edge at k_max " +
                               std::to_string(k_max));
    k_max = std::min(cfg.k_max_hard_cap, k_max * 2);
  }
}

StrategyProfile best_reply_profile(const Population& p, const StrategyProfile& profile,
                                   double m, double a, const ToleranceConfig& cfg) {
  EnvironmentRates rates = environment_rates(p, profile, m, a, cfg);
  StrategyProfile next(p.types.size(), 0);
  for (size_t i = 0; i < p.types.size(); ++i)
    next[i] = best_threshold(p.types[i].type, rates, cfg);
  return next;
}

EquilibriumResult find_equilibrium(const Population& p, double m, double a,
                                   const ToleranceConfig& cfg) {
  validate_population(p);
  cfg.validate();
  if (!(m > 0.0) || !std::isfinite(m))
    throw ParameterRangeError("mean money m must be positive and finite");
  if (!(a >= 0.0 && a <= 1.0))
    throw ParameterRangeError("free-service fraction a must lie in [0, 1]");

  EquilibriumResult out;

  if (p.types.empty()) {
    // Hoarders only: nothing to optimise, the closed-form distribution is the
    // whole answer and no one trades for pay.
    out.profile = {};
    out.iterations = {out.profile};
    out.solution = build_distribution(p, out.profile, m, cfg);
    out.welfare = welfare_rate(p, *out.solution, out.profile, a).per_round;
    return out;
  }

  auto finish_crashed = [&](const StrategyProfile& last) {
    out.profile = last;
    out.crashed = true;
    out.nontrivial = false;
    out.solution.reset();
    out.welfare = crashed_welfare(p, a).per_round;
    return out;
  };

  int start_k = cfg.k_max_initial;
  for (;;) {
    out.iterations.clear();
    StrategyProfile cur(p.types.size(), start_k);
    out.iterations.push_back(cur);
    bool restart = false;

    // From the top of the lattice the best-reply sequence is componentwise
    // non-increasing, so it terminates; each strict step lowers some entry.
    long step_cap = long(start_k) * long(p.types.size()) + 2;
    for (long step = 0; step < step_cap; ++step) {
      StrategyProfile next;
      try {
        next = best_reply_profile(p, cur, m, a, cfg);
      } catch (const Infeasible&) {
        return finish_crashed(cur);
      }

      bool above_start = false;
      for (size_t i = 0; i < next.size(); ++i) {
        if (next[i] > cur[i]) {
          if (step == 0) {
            above_start = true;  // start point was not the top; raise it
          } else {
            throw MonotonicityViolation("best-reply sequence increased at type " +
                                        std::to_string(i));
          }
        }
      }
      if (above_start) {
        if (start_k >= cfg.k_max_hard_cap)
          throw ThresholdUnbounded("no dominating start profile below the hard cap");
        start_k = std::min(cfg.k_max_hard_cap, start_k * 2);
        restart = true;
        break;
      }

      out.iterations.push_back(next);
      if (next == cur) break;
      cur = std::move(next);
    }
    if (restart) continue;

    bool all_zero = std::all_of(cur.begin(), cur.end(), [](int k) { return k == 0; });
    if (all_zero) return finish_crashed(cur);

    out.profile = cur;
    out.nontrivial = true;
    out.solution = build_distribution(p, cur, m, cfg);
    out.welfare = welfare_rate(p, *out.solution, cur, a).per_round;
    return out;
  }
}

}  // namespace scrip
