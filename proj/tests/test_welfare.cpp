#include <cmath>
#include <cstdlib>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "scrip/bestreply.hpp"
#include "scrip/welfare.hpp"

using namespace scrip;

namespace {

// Recomputes the per-round welfare rate straight from the definition: served
// requesters gain gamma, every paid service costs its server alpha in
// proportion to their share of the willing pool. Independent of the library's
// conditional-mass bookkeeping.
double direct_welfare(const Population& p, const MaxEntSolution& sol,
                      const StrategyProfile& profile, double a) {
  double free_gain = 0.0, paid_gain = 0.0, paid_mass = 0.0, willing = 0.0;
  for (size_t i = 0; i < p.types.size(); ++i) {
    const auto& t = p.types[i].type;
    const double f = p.types[i].fraction;
    const int k = profile[i];
    const double broke = geometric_weight(0, k, sol.lambda);
    const double at_cap = geometric_weight(k, k, sol.lambda);
    free_gain += f * t.gamma;
    paid_gain += f * (1.0 - broke) * t.gamma;
    paid_mass += f * (1.0 - broke);
    willing += f * (1.0 - at_cap);
  }
  if (p.hoarder_fraction > 0.0) willing += p.hoarder_fraction;
  double avg_alpha = 0.0;
  if (paid_mass > 0.0 && willing > 0.0) {
    double acc = 0.0;
    for (size_t i = 0; i < p.types.size(); ++i) {
      const int k = profile[i];
      const double at_cap = geometric_weight(k, k, sol.lambda);
      acc += p.types[i].fraction * (1.0 - at_cap) * p.types[i].type.alpha;
    }
    if (p.hoarder_fraction > 0.0)
      acc += p.hoarder_fraction * resolve_hoarder_type(p).alpha;
    avg_alpha = acc / willing;
  }
  return a * free_gain + (1.0 - a) * (paid_gain - paid_mass * avg_alpha);
}

}  // namespace

TEST_SUITE("welfare") {

TEST_CASE("half-broke homogeneous economy earns just under half the surplus") {
  auto p = oracle::homogeneous_population();
  // Threshold 1 at m = 0.5 pins lambda at 1: exactly half the agents broke.
  auto sol = build_distribution(p, {1}, 0.5);
  CHECK(sol.lambda == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.zero_fraction == doctest::Approx(0.5).epsilon(1e-9));

  auto w = welfare_rate(p, sol, {1}, 0.0);
  CHECK(w.per_round == doctest::Approx(0.475).epsilon(1e-9));
  REQUIRE(w.discounted_total.has_value());
  CHECK(*w.discounted_total == doctest::Approx(9.5).epsilon(1e-9));

  SUBCASE("free service for everyone lifts the rate to the full surplus") {
    auto full = welfare_rate(p, sol, {1}, 1.0);
    CHECK(full.per_round == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(full.discounted_total.has_value());
    CHECK(*full.discounted_total == doctest::Approx(20.0).epsilon(1e-9));
  }
}

TEST_CASE("homogeneous welfare reduces to served mass times surplus") {
  Population p;
  p.types = {{{0.15, 1.0, 1.2, 0.9, 1.0}, 1.0}};
  p.n = 500;
  auto sol = build_distribution(p, {7}, 3.0);
  auto w = welfare_rate(p, sol, {7}, 0.0);
  CHECK(w.per_round ==
        doctest::Approx((1.0 - sol.zero_fraction) * (1.2 - 0.15)).epsilon(1e-12));
}

TEST_CASE("welfare falls exactly as the broke fraction rises") {
  auto p = oracle::homogeneous_population();
  std::vector<std::pair<double, double>> points;  // (zero_fraction, welfare)
  for (double m : {1.0, 2.0, 4.0, 6.0, 8.0}) {
    auto sol = build_distribution(p, {10}, m);
    points.emplace_back(sol.zero_fraction, welfare_rate(p, sol, {10}, 0.0).per_round);
  }
  for (size_t i = 1; i < points.size(); ++i) {
    CHECK(points[i].first < points[i - 1].first);    // more money, fewer broke
    CHECK(points[i].second > points[i - 1].second);  // and strictly more welfare
  }
}

TEST_CASE("the library welfare matches a direct recomputation") {
  SUBCASE("two types") {
    auto p = oracle::two_type_population();
    auto sol = build_distribution(p, {20, 13}, 4.0);
    auto w = welfare_rate(p, sol, {20, 13}, 0.0);
    CHECK(w.per_round == doctest::Approx(direct_welfare(p, sol, {20, 13}, 0.0))
                             .epsilon(1e-12));
  }
  SUBCASE("with hoarders and altruists in the mix") {
    Population p;
    p.types = {{{0.05, 1.0, 1.0, 0.95, 1.0}, 0.5}, {{0.15, 1.0, 1.0, 0.95, 1.0}, 0.2}};
    p.hoarder_fraction = 0.2;
    p.altruist_fraction = 0.1;
    p.hoarder_type = AgentType{0.1, 1.0, 0.8, 0.9, 1.0};
    p.n = 1000;
    auto sol = build_distribution(p, {12, 8}, 2.0);
    for (double a : {0.0, 0.3}) {
      CAPTURE(a);
      auto w = welfare_rate(p, sol, {12, 8}, a);
      CHECK(w.per_round == doctest::Approx(direct_welfare(p, sol, {12, 8}, a))
                               .epsilon(1e-12));
      CHECK(w.hoarder_utility < 0.0);  // hoarders only ever pay the work cost
    }
  }
}

TEST_CASE("per-type utilities scale the trade rate by each type's surplus") {
  Population p;
  p.types = {{{0.05, 1.0, 1.0, 0.95, 1.0}, 0.5}, {{0.15, 1.0, 1.0, 0.95, 1.0}, 0.3}};
  p.hoarder_fraction = 0.2;
  p.hoarder_type = AgentType{0.05, 1.0, 1.0, 0.95, 1.0};
  p.n = 1000;
  const StrategyProfile profile{15, 9};
  auto sol = build_distribution(p, profile, 3.0);
  const double a = 0.2;
  auto w = welfare_rate(p, sol, profile, a);
  REQUIRE(w.per_type_utility.size() == 2);
  // Trades happen when the requester can pay, so every type's utility rides
  // the same 1 - M_0 rate, weighted by its own surplus gamma - alpha.
  const double m0 = sol.aggregate[0];
  for (size_t i = 0; i < p.types.size(); ++i) {
    const AgentType& t = p.types[i].type;
    CHECK(w.per_type_utility[i] ==
          doctest::Approx(a * t.gamma + (1.0 - a) * (1.0 - m0) * (t.gamma - t.alpha))
              .epsilon(1e-12));
  }
  CHECK(w.hoarder_utility ==
        doctest::Approx(-(1.0 - a) * sol.lambda * 0.05).epsilon(1e-12));
}

TEST_CASE("discounted totals need one shared discount factor") {
  auto p = oracle::two_type_population();
  auto sol = build_distribution(p, {20, 13}, 4.0);
  auto w = welfare_rate(p, sol, {20, 13}, 0.0);
  REQUIRE(w.discounted_total.has_value());
  CHECK(*w.discounted_total == doctest::Approx(w.per_round / (1.0 - 0.95)).epsilon(1e-12));

  auto q = p;
  q.types[1].type.delta = 0.9;
  auto sol2 = build_distribution(q, {20, 13}, 4.0);
  CHECK_FALSE(welfare_rate(q, sol2, {20, 13}, 0.0).discounted_total.has_value());
}

TEST_CASE("a crashed economy only moves the free channel") {
  auto p = oracle::two_type_population();
  CHECK(crashed_welfare(p, 0.0).per_round == doctest::Approx(0.0));
  auto w = crashed_welfare(p, 0.3);
  CHECK(w.per_round == doctest::Approx(0.3 * 1.0).epsilon(1e-12));
  for (double u : w.per_type_utility) CHECK(u == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(w.hoarder_utility == doctest::Approx(0.0));
}

TEST_CASE("crash_threshold brackets the two-type collapse") {
  auto p = oracle::two_type_population();
  auto res = crash_threshold(p, 0.0, 0.25);
  CHECK(res.status == CrashStatus::Bracketed);
  CHECK(res.upper - res.lower <= 0.25 + 1e-12);
  CHECK(res.m_crash == doctest::Approx(res.midpoint()));
  CHECK(res.evaluations >= 3);

  // The bracket ends must genuinely sit on opposite sides of the collapse.
  CHECK(find_equilibrium(p, res.lower, 0.0).nontrivial);
  CHECK(find_equilibrium(p, res.upper, 0.0).crashed);
  CHECK(find_equilibrium(p, res.lower - 0.2, 0.0).nontrivial);
  CHECK(find_equilibrium(p, res.upper + 0.2, 0.0).crashed);
}

TEST_CASE("myopic populations degenerate at any positive supply") {
  // The per-round discount is delta^(1/n), so real myopia needs a small
  // system: here delta^(1/2) = 1e-6 and a dollar is never worth the work.
  Population p;
  p.types = {{{0.05, 1.0, 1.0, 1e-12, 1.0}, 1.0}};
  p.n = 2;
  auto res = crash_threshold(p, 0.0);
  CHECK(res.status == CrashStatus::Degenerate);
  CHECK(res.m_crash == doctest::Approx(0.0));
}

TEST_CASE("hoarders absorb any tested money supply") {
  Population p = oracle::two_type_population();
  p.types[0].fraction = 0.27;
  p.types[1].fraction = 0.63;
  p.hoarder_fraction = 0.10;
  p.hoarder_type = AgentType{0.05, 1.0, 1.0, 0.95, 1.0};
  auto res = crash_threshold(p, 0.0, 0.05, 64.0);
  CHECK(res.status == CrashStatus::HoarderStabilized);
  CHECK(res.m_crash == doctest::Approx(64.0));
  CHECK(res.upper == doctest::Approx(64.0));
}

TEST_CASE("money sweeps report per-row results and failures") {
  auto p = oracle::two_type_population();

  SUBCASE("healthy and crashed rows coexist") {
    auto rows = sweep_money(p, 0.0, {2.0, 4.0, 30.0});
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) CHECK(r.error.empty());
    CHECK(rows[0].eq->nontrivial);
    CHECK(rows[1].eq->nontrivial);
    CHECK(rows[2].eq->crashed);
    CHECK(rows[0].x == doctest::Approx(2.0));
    // Lower supply, weakly higher thresholds.
    for (size_t i = 0; i < 2; ++i)
      CHECK(rows[0].eq->profile[i] >= rows[1].eq->profile[i]);
  }
  SUBCASE("a failing row is recorded, not thrown") {
    ToleranceConfig cramped;
    cramped.k_max_initial = 8;
    cramped.k_max_hard_cap = 8;
    auto rows = sweep_money(p, 0.0, {4.0}, cramped);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].error.find("ThresholdUnbounded") != std::string::npos);
    CHECK_FALSE(rows[0].eq.has_value());
  }
  SUBCASE("a single worker thread gives the same answers") {
    setenv("SCRIPSIM_THREADS", "1", 1);
    auto serial = sweep_money(p, 0.0, {2.0, 4.0});
    unsetenv("SCRIPSIM_THREADS");
    auto parallel = sweep_money(p, 0.0, {2.0, 4.0});
    REQUIRE(serial.size() == parallel.size());
    for (size_t i = 0; i < serial.size(); ++i) {
      CHECK(serial[i].eq->profile == parallel[i].eq->profile);
      CHECK(serial[i].welfare->per_round ==
            doctest::Approx(parallel[i].welfare->per_round).epsilon(1e-15));
    }
  }
}

TEST_CASE("altruists weakly improve welfare until they kill the currency") {
  auto p = oracle::homogeneous_population();
  auto rows = sweep_altruists(p, 2.0, {0.0, 0.2, 0.4, 0.6, 0.8});
  REQUIRE(rows.size() == 5);
  double prev = -1.0;
  for (const auto& r : rows) {
    REQUIRE(r.error.empty());
    if (r.eq->crashed) break;
    CHECK(r.welfare->per_round >= prev - 1e-9);
    prev = r.welfare->per_round;
  }
}

TEST_CASE("hoarders push thresholds up and standard utility down") {
  Population p = oracle::two_type_population();
  p.hoarder_type = AgentType{0.05, 1.0, 1.0, 0.95, 1.0};
  auto rows = sweep_hoarders(p, 2.0, 0.0, {0.0, 0.1, 0.2, 0.3});
  REQUIRE(rows.size() == 4);
  for (size_t i = 1; i < rows.size(); ++i) {
    REQUIRE(rows[i].error.empty());
    REQUIRE(rows[i].eq.has_value());
    for (size_t t = 0; t < 2; ++t) {
      CHECK(rows[i].eq->profile[t] >= rows[i - 1].eq->profile[t]);
      CHECK(rows[i].welfare->per_type_utility[t] <=
            rows[i - 1].welfare->per_type_utility[t] + 1e-9);
    }
  }
}

}  // TEST_SUITE("welfare")
