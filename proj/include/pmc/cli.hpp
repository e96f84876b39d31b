// SPDX-License-Identifier: Apache-2.0
//
// Command implementations behind the `pmc` executable. Each command takes a
// RunConfig, writes its files under config.out and returns the process exit
// code (see ExitCode); argument parsing lives in tools/pmc.cpp.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmc/chart.hpp"
#include "pmc/diffgeo.hpp"

namespace pmc {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitInfeasible = 2, kExitIo = 3 };

struct RunConfig {
  std::string command;
  std::string family;
  /// eps, a, b, c, lambda, hnorm and any key=value extras (ka, kb, height_scale).
  std::map<std::string, double> params;
  int nx = 81;
  int ny = 81;
  std::optional<Domain> domain;   // empty: the family's own rectangle ("auto")
  std::optional<double> fd_step;  // empty: the grid spacing
  double tol = 1e-4;
  bool poincare = false;
  std::filesystem::path out = "pmc_out";

  double param(const std::string& key, double fallback) const;
  /// Throws UsageError for grids below 5 x 5 or non-positive tolerances.
  void validate() const;
};

/// Names accepted by --family.
std::vector<std::string> family_names();

struct FamilyChart {
  ImmersionChart chart;
  Domain domain;       // grid rectangle used when the config says "auto"
  bool pmc = false;    // product target
};

/// Builds the chart a config describes. Infeasible parameters raise
/// DomainError whose message names the violated restriction clause.
FamilyChart build_family(const RunConfig& cfg);

GridSpec grid_for(const RunConfig& cfg, const FamilyChart& fc);
/// fd_step defaults to the grid spacing (capped at half the chart's pad);
/// stencils are fourth order.
AnalysisOptions analysis_options_for(const RunConfig& cfg, const GridSpec& grid, const ImmersionChart& chart);

struct Check {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass() const { return value <= tol; }
};

struct VerifyResult {
  std::vector<Check> checks;
  bool all_pass() const;
  const Check* first_failure() const;
};

/// Full certification suite of one chart: pointwise checks with their fixed
/// thresholds, identity residuals and holomorphy against `tol`, and (for
/// charts flagged with `hopf_vanishes`) max |theta_j| <= 1e-7.
VerifyResult verify_invariants(const SurfaceInvariants& inv, double tol, bool hopf_vanishes);

int cmd_generate(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_correspond(const RunConfig& cfg, std::ostream& log);
int cmd_report(const RunConfig& cfg, std::ostream& log);

/// Dispatches on cfg.command and maps library exceptions to exit codes.
int run_command(const RunConfig& cfg, std::ostream& log);

}  // namespace pmc
