#include "scrip/welfare.hpp"

#include <cmath>
#include <sstream>

#include "parallel.hpp"

namespace scrip {

namespace {

std::optional<double> common_standard_delta(const Population& p) {
  std::optional<double> d;
  for (const auto& ts : p.types) {
    if (!d)
      d = ts.type.delta;
    else if (ts.type.delta != *d)
      return std::nullopt;
  }
  return d;
}

void attach_discounted_total(const Population& p, WelfareReport& r) {
  if (auto d = common_standard_delta(p); d && *d < 1.0)
    r.discounted_total = r.per_round / (1.0 - *d);
}

}  // namespace

WelfareReport welfare_rate(const Population& p, const MaxEntSolution& sol,
                           const StrategyProfile& profile, double a) {
  validate_population(p);
  if (!(a >= 0.0 && a <= 1.0))
    throw ParameterRangeError("free-service fraction a must lie in [0, 1]");
  if (profile.size() != p.types.size())
    throw ParameterRangeError("profile/type count mismatch in welfare_rate");

  double lam = sol.lambda;
  size_t nt = p.types.size();

  // Per-type conditional masses under the stationary distribution: being
  // broke (money 0) and sitting exactly at the threshold. Both depend only on
  // the type's threshold, not on how much mass plays it.
  std::vector<double> broke(nt), at_cap(nt);
  for (size_t i = 0; i < nt; ++i) {
    int k = profile[i];
    broke[i] = geometric_weight(0, k, lam);
    at_cap[i] = geometric_weight(k, k, lam);
  }

  double free_gain = 0.0;   // consumption when service is free
  double paid_gain = 0.0;   // consumption bought with money
  double paid_mass = 0.0;   // requester mass that pays in a round
  double willing = 0.0;     // mass competing for the job
  double willing_cost = 0.0;
  for (size_t i = 0; i < nt; ++i) {
    double f = p.types[i].fraction;
    const AgentType& t = p.types[i].type;
    free_gain += f * t.gamma;
    paid_gain += f * (1.0 - broke[i]) * t.gamma;
    paid_mass += f * (1.0 - broke[i]);
    double w = f * (1.0 - at_cap[i]);
    willing += w;
    willing_cost += w * t.alpha;
  }
  double hoarder_alpha = 0.0;
  if (p.hoarder_fraction > 0.0) {
    hoarder_alpha = resolve_hoarder_type(p).alpha;
    willing += p.hoarder_fraction;  // hoarders always volunteer
    willing_cost += p.hoarder_fraction * hoarder_alpha;
  }
  double mean_alpha = willing > 0.0 ? willing_cost / willing : 0.0;

  WelfareReport r;
  r.per_round = a * free_gain + (1.0 - a) * (paid_gain - paid_mass * mean_alpha);
  // A round's trade happens when the requester can pay, which the aggregate
  // zero-money fraction governs; the surplus of a type-t trade is
  // gamma_t - alpha_t, so a type's utility rate is (1 - M_0)(gamma_t - alpha_t)
  // plus whatever the free channel serves.
  double m0 = sol.aggregate.empty() ? 0.0 : sol.aggregate[0];
  r.per_type_utility.resize(nt);
  for (size_t i = 0; i < nt; ++i) {
    const AgentType& t = p.types[i].type;
    r.per_type_utility[i] = a * t.gamma + (1.0 - a) * (1.0 - m0) * (t.gamma - t.alpha);
  }
  // Hoarders trade at rate lambda per unit mass (their broke fraction is
  // 1 - lambda); the money they take is worth nothing to them, so only the
  // work cost registers.
  r.hoarder_utility = p.hoarder_fraction > 0.0 ? -(1.0 - a) * lam * hoarder_alpha : 0.0;
  attach_discounted_total(p, r);
  return r;
}

WelfareReport crashed_welfare(const Population& p, double a) {
  validate_population(p);
  if (!(a >= 0.0 && a <= 1.0))
    throw ParameterRangeError("free-service fraction a must lie in [0, 1]");
  WelfareReport r;
  r.per_type_utility.resize(p.types.size());
  for (size_t i = 0; i < p.types.size(); ++i) {
    r.per_type_utility[i] = a * p.types[i].type.gamma;
    r.per_round += p.types[i].fraction * r.per_type_utility[i];
  }
  r.hoarder_utility = 0.0;
  attach_discounted_total(p, r);
  return r;
}

CrashSearchResult crash_threshold(const Population& p, double a, double width, double m_cap,
                                  const ToleranceConfig& cfg) {
  validate_population(p);
  if (!(width > 0.0)) throw ParameterRangeError("crash bracket width must be > 0");
  if (!(m_cap > 0.0)) throw ParameterRangeError("crash search cap must be > 0");

  CrashSearchResult out;
  auto healthy = [&](double m) {
    ++out.evaluations;
    EquilibriumResult eq = find_equilibrium(p, m, a, cfg);
    return !eq.crashed && eq.nontrivial;
  };

  double lo = std::min(0.25, 0.5 * m_cap);
  if (!healthy(lo)) {
    out.status = CrashStatus::Degenerate;
    out.m_crash = 0.0;
    out.lower = 0.0;
    out.upper = lo;
    return out;
  }

  double hi = std::min(std::max(1.0, 2.0 * lo), m_cap);
  bool hi_is_cap = hi >= m_cap;
  while (healthy(hi)) {
    lo = hi;
    if (hi_is_cap) {
      out.status = CrashStatus::HoarderStabilized;
      out.m_crash = m_cap;
      out.lower = lo;
      out.upper = m_cap;
      return out;
    }
    hi = std::min(hi * 2.0, m_cap);
    hi_is_cap = hi >= m_cap;
  }

  while (hi - lo > width) {
    double mid = 0.5 * (lo + hi);
    if (healthy(mid))
      lo = mid;
    else
      hi = mid;
  }
  out.status = CrashStatus::Bracketed;
  out.lower = lo;
  out.upper = hi;
  out.m_crash = out.midpoint();
  return out;
}

std::vector<SweepPoint> sweep_money(const Population& p, double a,
                                    const std::vector<double>& m_grid,
                                    const ToleranceConfig& cfg) {
  validate_population(p);
  std::vector<SweepPoint> rows(m_grid.size());
  detail::for_each_index(m_grid.size(), [&](size_t i) {
    SweepPoint& row = rows[i];
    row.x = m_grid[i];
    try {
      EquilibriumResult eq = find_equilibrium(p, m_grid[i], a, cfg);
      row.welfare = eq.crashed || !eq.solution
                        ? crashed_welfare(p, a)
                        : welfare_rate(p, *eq.solution, eq.profile, a);
      row.eq = std::move(eq);
    } catch (const ScripError& e) {
      row.error = e.name() + std::string(": ") + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("error: ") + e.what();
    }
  });
  return rows;
}

std::vector<SweepPoint> sweep_altruists(const Population& p, double m,
                                        const std::vector<double>& a_grid,
                                        const ToleranceConfig& cfg) {
  validate_population(p);
  std::vector<SweepPoint> rows(a_grid.size());
  detail::for_each_index(a_grid.size(), [&](size_t i) {
    SweepPoint& row = rows[i];
    row.x = a_grid[i];
    try {
      EquilibriumResult eq = find_equilibrium(p, m, a_grid[i], cfg);
      row.welfare = eq.crashed || !eq.solution
                        ? crashed_welfare(p, a_grid[i])
                        : welfare_rate(p, *eq.solution, eq.profile, a_grid[i]);
      row.eq = std::move(eq);
    } catch (const ScripError& e) {
      row.error = e.name() + std::string(": ") + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("error: ") + e.what();
    }
  });
  return rows;
}

namespace {

// Population with hoarder mass h, standard fractions rescaled to keep their
// relative proportions and the altruist share untouched.
Population with_hoarder_fraction(const Population& base, double h) {
  if (!(h >= 0.0) || h + base.altruist_fraction >= 1.0)
    throw ParameterRangeError("hoarder fraction " + std::to_string(h) +
                              " leaves no room for standard types");
  Population p = base;
  double std_now = base.standard_fraction();
  double std_target = 1.0 - h - base.altruist_fraction;
  if (std_now <= 0.0)
    throw ParameterRangeError("hoarder sweep needs a standard population to rescale");
  for (auto& ts : p.types) ts.fraction *= std_target / std_now;
  p.hoarder_fraction = h;
  return p;
}

}  // namespace

std::vector<SweepPoint> sweep_hoarders(const Population& p, double m, double a,
                                       const std::vector<double>& hoarder_grid,
                                       const ToleranceConfig& cfg) {
  validate_population(p);
  std::vector<SweepPoint> rows(hoarder_grid.size());
  detail::for_each_index(hoarder_grid.size(), [&](size_t i) {
    SweepPoint& row = rows[i];
    row.x = hoarder_grid[i];
    try {
      Population ph = with_hoarder_fraction(p, hoarder_grid[i]);
      EquilibriumResult eq = find_equilibrium(ph, m, a, cfg);
      row.welfare = eq.crashed || !eq.solution
                        ? crashed_welfare(ph, a)
                        : welfare_rate(ph, *eq.solution, eq.profile, a);
      row.eq = std::move(eq);
    } catch (const ScripError& e) {
      row.error = e.name() + std::string(": ") + e.what();
    } catch (const std::exception& e) {
      row.error = std::string("error: ") + e.what();
    }
  });
  return rows;
}

}  // namespace scrip
