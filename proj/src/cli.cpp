// SPDX-License-Identifier: Apache-2.0
#include "pmc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "pmc/correspondence.hpp"
#include "pmc/errors.hpp"
#include "pmc/families.hpp"
#include "pmc/io.hpp"

namespace pmc {

namespace {

Epsilon eps_of(const RunConfig& cfg, double fallback) {
  const double e = cfg.param("eps", fallback);
  if (e == 1.0) return Epsilon::sphere();
  if (e == -1.0) return Epsilon::hyperbolic();
  throw DomainError("eps must be +1 or -1");
}

ProfileParams feasible_params(const RunConfig& cfg) {
  const ProfileParams prm = ProfileParams::make(eps_of(cfg, -1.0), cfg.param("a", -2.0), cfg.param("b", 1.0),
                                                cfg.param("c", 0.0));
  const FeasibilityVerdict v = check_restrictions(prm);
  if (!v.feasible) {
    throw DomainError("infeasible parameters (eps=" + format_number(prm.eps.sign()) + ", a=" + format_number(prm.a) +
                      ", b=" + format_number(prm.b) + ", c=" + format_number(prm.c) + "): restriction " +
                      v.description + " fails");
  }
  return prm;
}

std::string fmt(double v) { return format_number(v); }

std::string fmt_tol(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Metadata chart_metadata(const RunConfig& cfg, const ImmersionChart& chart, const GridSpec& g) {
  Metadata md{{"family", cfg.family}, {"chart", chart.family}, {"target", chart.target.name()},
              {"eps", fmt(chart.eps.sign())}};
  for (const auto& [k, v] : chart.params) md.emplace_back("param." + k, fmt(v));
  md.emplace_back("grid.nx", std::to_string(g.nx));
  md.emplace_back("grid.ny", std::to_string(g.ny));
  md.emplace_back("grid.domain", fmt(g.domain.x0) + "," + fmt(g.domain.x1) + "," + fmt(g.domain.y0) + "," +
                                     fmt(g.domain.y1));
  for (size_t i = 0; i < chart.notes.size(); ++i) md.emplace_back("note." + std::to_string(i), chart.notes[i]);
  return md;
}

void write_checks(std::ostream& os, const VerifyResult& r) {
  for (const Check& c : r.checks) {
    os << "check." << c.name << '=' << fmt(c.value) << " tol " << fmt_tol(c.tol) << (c.pass() ? " PASS" : " FAIL") << '\n';
  }
  os << "verdict=" << (r.all_pass() ? "PASS" : "FAIL") << '\n';
}

std::string obj_name(const std::string& stem, const Mesh& m) { return stem + "_" + m.name + ".obj"; }

void write_meshes(const std::filesystem::path& dir, const std::string& stem, const ImmersionChart& chart,
                  const GridSpec& g, bool poincare) {
  for (const Mesh& m : chart_meshes(chart, g, {.poincare = poincare})) {
    write_file(dir / obj_name(stem, m), [&](std::ostream& os) { write_obj(os, m); });
  }
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0.0;
  for (const cplx& z : v) m = std::max(m, std::abs(z));
  return m;
}

}  // namespace

double RunConfig::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void RunConfig::validate() const {
  if (nx < 5 || ny < 5) throw UsageError("grid must be at least 5 x 5");
  if (!(tol > 0.0)) throw UsageError("tolerance must be positive");
  if (fd_step && !(*fd_step > 0.0)) throw UsageError("fd-step must be positive");
  if (domain && !(domain->width() > 0.0 && domain->height() > 0.0)) throw UsageError("empty domain");
}

std::vector<std::string> family_names() {
  return {"prop4", "example2", "phi0", "product", "prop6", "psi", "leite", "torus", "torus_lift"};
}

FamilyChart build_family(const RunConfig& cfg) {
  const std::string& f = cfg.family;
  const Domain d = cfg.domain.value_or(kUnitSquare);
  const double margin = 0.2;  // profile span beyond the stencil pad
  FamilyChart out;
  if (f == "prop4" || f == "example2") {
    ProfileParams prm;
    if (f == "example2") {
      const double lam = cfg.param("lambda", 1.0);
      if (!(lam >= 0.0)) throw DomainError("example2 needs lambda >= 0");
      prm = ProfileParams::make(Epsilon::hyperbolic(), -(1.0 + lam * lam), 1.0, 0.0);
    } else {
      prm = feasible_params(cfg);
    }
    out.chart = pmc_profile_family(prm, default_profile(prm, d.x0 - margin, d.x1 + margin), d);
  } else if (f == "phi0") {
    out.chart = pmc_phi0(cfg.param("hnorm", 0.25), d);
  } else if (f == "product") {
    out.chart = product_of_curves(eps_of(cfg, 1.0), cfg.param("ka", 1.0), cfg.param("kb", 1.0), d);
  } else if (f == "prop6") {
    const ProfileParams prm = feasible_params(cfg);
    out.chart = cmc_profile_family(prm, default_profile(prm, d.x0 - margin, d.x1 + margin), d);
  } else if (f == "psi") {
    out.chart = cmc_psi_lambda(cfg.param("lambda", 1.0), d);
  } else if (f == "leite") {
    out.chart = cmc_leite(cfg.param("hnorm", 0.25), d);
  } else if (f == "torus" || f == "torus_lift") {
    const TorusCharts t = cmc_torus(cfg.param("a", 2.0), cfg.param("b", 1.0));
    if (f == "torus") {
      out.chart = t.circle;
    } else {
      const double s = cfg.param("height_scale", 1.0);
      out.chart = geodesic_inclusion(s == 1.0 ? t.line : scale_height(t.line, s));
    }
    out.domain = cfg.domain.value_or(t.circle.domain);
    out.pmc = out.chart.target.is_product();
    return out;
  } else {
    std::string known;
    for (const auto& n : family_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown family '" + f + "' (known: " + known + ")");
  }
  out.domain = d;
  out.pmc = out.chart.target.is_product();
  return out;
}

GridSpec grid_for(const RunConfig& cfg, const FamilyChart& fc) { return GridSpec{cfg.nx, cfg.ny, fc.domain}; }

AnalysisOptions analysis_options_for(const RunConfig& cfg, const GridSpec& grid, const ImmersionChart& chart) {
  AnalysisOptions o;
  // Five-point stencils reach two steps beyond the grid, which must stay
  // inside the chart's evaluable pad.
  o.fd_step = cfg.fd_step.value_or(std::min({grid.hx(), grid.hy(), 0.5 * chart.pad}));
  o.fourth_order = true;
  return o;
}

bool VerifyResult::all_pass() const { return first_failure() == nullptr; }

const Check* VerifyResult::first_failure() const {
  for (const Check& c : checks) {
    if (!c.pass()) return &c;
  }
  return nullptr;
}

VerifyResult verify_invariants(const SurfaceInvariants& inv, double tol, bool hopf_vanishes) {
  VerifyResult r;
  const Summary s = summarize(inv);
  const GridSpec& g = inv.grid;
  r.checks.push_back({"conformal_defect", s.max_conformal_defect, 1e-6});
  r.checks.push_back({"hnorm_variation", (s.max_hnorm - s.min_hnorm) / std::max(s.max_hnorm, 1e-300), 1e-6});
  if (inv.target.is_product()) {
    r.checks.push_back({"parallelism", s.max_parallelism, 1e-5});
    r.checks.push_back({"kaehler_two_path", s.max_kbar_gap, 1e-5});
    r.checks.push_back({"hopf_formula_agreement", s.max_theta_gap, 1e-5});
    r.checks.push_back({"curvature_bound_excess", std::max(s.max_curvature_excess, 0.0), 1e-6});
    for (int j = 1; j <= 2; ++j) {
      const std::vector<cplx> th = theta_field(inv, j);
      r.checks.push_back({"theta" + std::to_string(j) + "_holomorphy", holomorphy_residual(th, g.nx, g.ny, g.hx(), g.hy()), tol});
      if (hopf_vanishes) r.checks.push_back({"theta" + std::to_string(j) + "_vanishing", max_abs(th), 1e-7});
    }
  } else {
    const AbreschRosenberg ar = abresch_rosenberg(inv, std::numeric_limits<double>::infinity());
    r.checks.push_back({"theta_ar_holomorphy", ar.holomorphy, tol});
  }
  for (const IdentityResidual& ir : identity_residuals(inv)) r.checks.push_back({ir.name, ir.normalized, tol});
  return r;
}

int cmd_generate(const RunConfig& cfg, std::ostream& log) {
  const FamilyChart fc = build_family(cfg);
  const GridSpec g = grid_for(cfg, fc);
  const SurfaceInvariants inv = analyze(fc.chart, g, {.stencils = false});
  const Summary s = summarize(inv);
  Metadata md = chart_metadata(cfg, fc.chart, g);
  md.emplace_back("summary.hnorm_min", fmt(s.min_hnorm));
  md.emplace_back("summary.hnorm_max", fmt(s.max_hnorm));
  md.emplace_back("summary.conformal_defect", fmt(s.max_conformal_defect));
  if (fc.pmc) md.emplace_back("summary.c_gap", fmt(s.max_c_gap));
  write_meshes(cfg.out, cfg.family, fc.chart, g, cfg.poincare);
  write_file(cfg.out / (cfg.family + ".meta.txt"), [&](std::ostream& os) { write_metadata(os, md); });
  log << "generated " << cfg.family << " on " << g.nx << "x" << g.ny << " into " << cfg.out.string() << '\n';
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  const FamilyChart fc = build_family(cfg);
  const GridSpec g = grid_for(cfg, fc);
  const SurfaceInvariants inv = analyze(fc.chart, g, analysis_options_for(cfg, g, fc.chart));
  const VerifyResult r = verify_invariants(inv, cfg.tol, cfg.family == "phi0");
  write_file(cfg.out / (cfg.family + ".verify.txt"), [&](std::ostream& os) {
    write_metadata(os, chart_metadata(cfg, fc.chart, g));
    write_checks(os, r);
  });
  for (const Check& c : r.checks) {
    log << (c.pass() ? "PASS " : "FAIL ") << c.name << " = " << fmt(c.value) << " (tol " << fmt_tol(c.tol) << ")\n";
  }
  if (const Check* bad = r.first_failure()) {
    log << "verification failed: " << bad->name << '\n';
    return kExitVerifyFailed;
  }
  return kExitOk;
}

int cmd_report(const RunConfig& cfg, std::ostream& log) {
  const FamilyChart fc = build_family(cfg);
  const GridSpec g = grid_for(cfg, fc);
  const SurfaceInvariants inv = analyze(fc.chart, g, analysis_options_for(cfg, g, fc.chart));
  write_file(cfg.out / (cfg.family + ".invariants.csv"), [&](std::ostream& os) { write_invariants_csv(os, inv); });
  write_file(cfg.out / (cfg.family + ".report.txt"), [&](std::ostream& os) {
    Metadata md = chart_metadata(cfg, fc.chart, g);
    const Summary s = summarize(inv);
    md.emplace_back("summary.conformal_defect", fmt(s.max_conformal_defect));
    md.emplace_back("summary.parallelism", fmt(s.max_parallelism));
    md.emplace_back("summary.hnorm_min", fmt(s.min_hnorm));
    md.emplace_back("summary.hnorm_max", fmt(s.max_hnorm));
    for (const IdentityResidual& ir : identity_residuals(inv)) md.emplace_back("residual." + ir.name, fmt(ir.normalized));
    write_metadata(os, md);
  });
  log << "wrote invariants of " << cfg.family << " (" << g.nx * g.ny << " points)\n";
  return kExitOk;
}

int cmd_correspond(const RunConfig& cfg, std::ostream& log) {
  const FamilyChart fc = build_family(cfg);
  if (!fc.pmc) throw UsageError("correspond needs a PMC family (product target); '" + cfg.family + "' is CMC");
  GridSpec g = grid_for(cfg, fc);
  if (std::abs(g.hx() - g.hy()) > 1e-12 * std::max(g.hx(), g.hy())) {
    // Reconstructed charts are certified with one stencil step for both
    // directions. An automatic period rectangle becomes a square of half the
    // shorter period (the full period is too coarse at the default grid); an
    // explicit rectangle is refused.
    if (cfg.domain || g.nx != g.ny) {
      throw UsageError("correspond needs equal grid spacing in x and y; adjust --domain or --nx/--ny");
    }
    const double side = 0.5 * std::min(g.domain.width(), g.domain.height());
    g.domain = Domain{g.domain.x0, g.domain.x0 + side, g.domain.y0, g.domain.y0 + side};
  }
  const PmcFrenetData data = extract_pmc_data(fc.chart, g);
  write_file(cfg.out / "frenet_pmc.csv", [&](std::ostream& os) { write_frenet_csv(os, data); });

  Metadata md = chart_metadata(cfg, fc.chart, g);
  VerifyResult checks;
  const double e = data.eps.sign();
  CmcFrenetData cmc[2];
  Reconstruction rec[2];
  for (int j = 0; j < 2; ++j) {
    const std::string tag = "j" + std::to_string(j + 1);
    cmc[j] = pmc_to_cmc(data, j + 1);
    rec[j] = integrate_cmc_frenet(cmc[j]);
    write_file(cfg.out / ("frenet_cmc_" + tag + ".csv"), [&](std::ostream& os) { write_frenet_csv(os, cmc[j]); });
    write_meshes(cfg.out, "cmc_" + tag, rec[j].chart, rec[j].grid, cfg.poincare);

    AnalysisOptions opt;
    opt.fd_step = rec[j].grid.hx();
    opt.fourth_order = true;
    const SurfaceInvariants inv = analyze(rec[j].chart, rec[j].interior, opt);
    const AbreschRosenberg ar = abresch_rosenberg(inv, std::numeric_limits<double>::infinity());
    const Summary s = summarize(inv);
    double theta_gap = 0.0;
    for (int k = 0; k < rec[j].interior.ny; ++k) {
      for (int i = 0; i < rec[j].interior.nx; ++i) {
        const size_t m = static_cast<size_t>(2 * (k + 2)) * g.nx + 2 * (i + 2);
        const cplx theta_j = 2.0 * std::numbers::sqrt2 * data.hnorm * data.f[j][m] + 0.5 * e * data.gamma[j][m] * data.gamma[j][m];
        theta_gap = std::max(theta_gap, std::abs(2.0 * ar.theta[static_cast<size_t>(k) * rec[j].interior.nx + i] - theta_j));
      }
    }
    const double h_gap = std::max(std::abs(s.max_hnorm - data.hnorm), std::abs(s.min_hnorm - data.hnorm));
    md.emplace_back(tag + ".eta_path_defect", fmt(cmc[j].eta_path_defect));
    md.emplace_back(tag + ".loop_closure", fmt(rec[j].loop_closure));
    md.emplace_back(tag + ".hnorm_min", fmt(s.min_hnorm));
    md.emplace_back(tag + ".hnorm_max", fmt(s.max_hnorm));
    md.emplace_back(tag + ".gauge", rec[j].chart.notes.empty() ? "" : rec[j].chart.notes.front());
    checks.checks.push_back({tag + ".hnorm_match", h_gap, 1e-4});
    checks.checks.push_back({tag + ".theta_ar_match", theta_gap, 1e-4});
  }
  const PmcFrenetData back = cmc_to_pmc(cmc[0], cmc[1], 1e-6);
  double round_trip = std::abs(back.hnorm - data.hnorm);
  for (size_t m = 0; m < data.size(); ++m) {
    round_trip = std::max(round_trip, std::abs(back.u[m] - data.u[m]));
    for (int j = 0; j < 2; ++j) {
      round_trip = std::max({round_trip, std::abs(back.C[j][m] - data.C[j][m]), std::abs(back.f[j][m] - data.f[j][m]),
                             std::abs(back.gamma[j][m] - data.gamma[j][m])});
    }
  }
  checks.checks.push_back({"data_round_trip", round_trip, 1e-6});

  double factor_gap = 0.0;
  for (size_t m = 0; m < data.size(); ++m) {
    factor_gap = std::max({factor_gap, std::abs(data.gamma[0][m] - data.gamma[1][m]), std::abs(data.f[0][m] - data.f[1][m])});
  }
  const CongruenceVerdict v = weak_congruence_check(rec[0].chart, rec[1].chart, rec[0].grid);
  md.emplace_back("factorizing_data_gap", fmt(factor_gap));
  md.emplace_back("congruence.metric_gap", fmt(v.metric_gap));
  md.emplace_back("congruence.direct_distance", fmt(v.direct.distance));
  md.emplace_back("congruence.reflected_distance", fmt(v.reflected.distance));
  md.emplace_back("congruence.congruent", v.congruent ? "yes" : "no");
  md.emplace_back("congruence.weakly_congruent", v.weakly_congruent ? "yes" : "no");
  md.emplace_back("congruence.reason", v.reason);
  write_file(cfg.out / "correspondence.txt", [&](std::ostream& os) {
    write_metadata(os, md);
    write_checks(os, checks);
  });
  for (const auto& [k, val] : md) {
    if (k.rfind("j", 0) == 0 || k.rfind("congruence", 0) == 0 || k == "factorizing_data_gap") log << k << " = " << val << '\n';
  }
  for (const Check& c : checks.checks) {
    log << (c.pass() ? "PASS " : "FAIL ") << c.name << " = " << fmt(c.value) << " (tol " << fmt_tol(c.tol) << ")\n";
  }
  return checks.all_pass() ? kExitOk : kExitVerifyFailed;
}

int run_command(const RunConfig& cfg, std::ostream& log) {
  try {
    cfg.validate();
    if (cfg.command == "generate") return cmd_generate(cfg, log);
    if (cfg.command == "verify") return cmd_verify(cfg, log);
    if (cfg.command == "correspond") return cmd_correspond(cfg, log);
    if (cfg.command == "report") return cmd_report(cfg, log);
    throw UsageError("unknown command '" + cfg.command + "'");
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConsistencyError& e) {
    log << "verification failed: " << e.what() << '\n';
    return kExitVerifyFailed;
  } catch (const std::logic_error& e) {
    // DomainError, PreconditionError and UsageError: the request itself is
    // not admissible.
    log << "error: " << e.what() << '\n';
    return kExitInfeasible;
  }
}

}  // namespace pmc
