#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scrip/bestreply.hpp"
#include "scrip/maxent.hpp"
#include "scrip/types.hpp"

namespace scrip {

struct WelfareReport {
  double per_round = 0.0;
  // per_round / (1 - delta), present when all standard types share delta.
  std::optional<double> discounted_total;
  // Expected per-round utility rate of each standard type, aligned with
  // Population::types: (1 - M_0)(gamma_t - alpha_t) through the paid channel
  // plus a * gamma_t through the free one.
  std::vector<double> per_type_utility;
  double hoarder_utility = 0.0;  // per unit of hoarder mass: work cost, no gain
};

// Per-round welfare rate of a working economy: requesters consume gamma when
// served (free with probability a, else iff they hold money), and the service
// cost alpha falls on the willing pool in proportion to willingness.
WelfareReport welfare_rate(const Population& p, const MaxEntSolution& sol,
                           const StrategyProfile& profile, double a);

// Welfare once money has stopped circulating: only free service happens.
WelfareReport crashed_welfare(const Population& p, double a);

enum class CrashStatus {
  Bracketed,          // nontrivial at lower, crashed at upper, upper-lower <= width
  Degenerate,         // no nontrivial equilibrium even at the smallest probe
  HoarderStabilized,  // no crash found below m_cap: hoarders absorb the surplus
};

struct CrashSearchResult {
  CrashStatus status = CrashStatus::Bracketed;
  // Bracket midpoint when Bracketed, 0 when Degenerate, the search cap when
  // HoarderStabilized (a lower bound: no crash was found below it).
  double m_crash = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int evaluations = 0;

  double midpoint() const { return 0.5 * (lower + upper); }
};

// Locates the largest sustainable mean money by doubling until a crash shows
// up, then bisecting the bracket down to `width`. Both bracket ends come from
// direct find_equilibrium evaluations.
CrashSearchResult crash_threshold(const Population& p, double a, double width = 0.05,
                                  double m_cap = 1024.0, const ToleranceConfig& cfg = {});

struct SweepPoint {
  double x = 0.0;  // the swept coordinate
  std::optional<EquilibriumResult> eq;
  std::optional<WelfareReport> welfare;
  std::string error;  // "<ErrorName>: detail" when the row failed, else empty
};

// Equilibrium + welfare at each grid value. Rows are independent and run in
// parallel (SCRIPSIM_THREADS caps the worker count); per-row failures land in
// SweepPoint::error instead of aborting the sweep.
std::vector<SweepPoint> sweep_money(const Population& p, double a,
                                    const std::vector<double>& m_grid,
                                    const ToleranceConfig& cfg = {});
std::vector<SweepPoint> sweep_altruists(const Population& p, double m,
                                        const std::vector<double>& a_grid,
                                        const ToleranceConfig& cfg = {});
// Re-scales the standard-type fractions to make room for each hoarder mass in
// the grid, keeping their relative proportions.
std::vector<SweepPoint> sweep_hoarders(const Population& p, double m, double a,
                                       const std::vector<double>& hoarder_grid,
                                       const ToleranceConfig& cfg = {});

}  // namespace scrip
