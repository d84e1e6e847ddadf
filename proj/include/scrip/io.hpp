#pragma once

#include <string>
#include <vector>

#include "scrip/inference.hpp"
#include "scrip/maxent.hpp"
#include "scrip/simulator.hpp"
#include "scrip/types.hpp"
#include "scrip/welfare.hpp"

namespace scrip {

// JSON population config:
//   { "types": [ {"alpha":., "beta":., "gamma":., "delta":., "rho":., "fraction":.}, ... ],
//     "n": int, "hoarder_fraction": ., "altruist_fraction": ., "hoarder_type": {...} }
// The fraction keys and hoarder_type are optional; unknown keys are rejected.
Population load_population(const std::string& path);
Population parse_population(const std::string& json_text);

// CSV with header `money,fraction`, one row per money level starting at 0.
ObservedDistribution read_distribution_csv(const std::string& path);

// All writers format numbers with 12 significant digits and replace the
// target atomically (write to a temp file in the same directory, then rename).
void write_text_file(const std::string& path, const std::string& content);
void write_distribution_csv(const std::string& path, const std::vector<double>& fractions);
// Per-type rows `type_index,money,fraction`, finite-threshold rows only.
void write_per_type_csv(const std::string& path, const MaxEntSolution& sol);
// Single row `m,a,crashed,lambda,M0,tau,welfare_rate,thresholds`; thresholds
// are semicolon-joined. Crashed rows leave lambda/M0/tau empty.
void write_equilibrium_csv(const std::string& path, double m, double a,
                           const EquilibriumResult& eq);
// Header `<x_name>,crashed,lambda,M0,tau,welfare_rate,thresholds`; one row per
// grid point. Rows that failed outright are skipped (reported by the caller).
void write_sweep_csv(const std::string& path, const std::string& x_name,
                     const std::vector<SweepPoint>& rows);
std::string crash_status_name(CrashStatus s);
void write_crash_json(const std::string& path, const CrashSearchResult& r);
// JSON report {lambda, support, pi, residual}.
void write_explanation_json(const std::string& path, const Explanation& ex);
// Rows `money,fraction,ratio` with ratio = M_i / M_{i-1} (empty on row 0).
void write_ratio_csv(const std::string& path, const ObservedDistribution& obs);
void write_sim_json(const std::string& path, const SimConfig& cfg, const SimResult& sim);

}  // namespace scrip
