// SPDX-License-Identifier: Apache-2.0
//
// pmc: construct PMC/CMC surface families, certify their identities, run the
// PMC <-> CMC data correspondence and export meshes and tables.
//
//   pmc generate   --family prop4 --eps -1 --a -2 --b 1 --c 0 --out DIR
//   pmc verify     --family phi0 --hnorm 0.25
//   pmc correspond --family prop4 --eps -1 --a -2 --b 1 --c 0
//   pmc report     --family torus --a 2 --b 1
//
// Extra family parameters go in as key=value tokens (ka=1 kb=1,
// height_scale=1.01). Exit codes: 0 ok, 1 verification failed,
// 2 infeasible parameters or invalid request, 3 I/O error.
#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "pmc/cli.hpp"

namespace {

struct Flags {
  pmc::RunConfig cfg;
  std::vector<std::string> extras;
  std::string domain = "auto";
  double fd_step = 0.0;
  std::map<std::string, double> named;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--family", f.cfg.family, "surface family")->required()->check(CLI::IsMember(pmc::family_names()));
  for (const char* key : {"eps", "a", "b", "c", "lambda", "hnorm"}) {
    sub->add_option(std::string("--") + key, f.named[key], std::string("family parameter ") + key);
  }
  sub->add_option("--nx", f.cfg.nx, "grid nodes in x")->capture_default_str();
  sub->add_option("--ny", f.cfg.ny, "grid nodes in y")->capture_default_str();
  sub->add_option("--domain", f.domain, "x0,x1,y0,y1 or auto")->capture_default_str();
  sub->add_option("--fd-step", f.fd_step, "stencil step (default: grid spacing)");
  sub->add_option("--tol", f.cfg.tol, "identity residual tolerance")->capture_default_str();
  sub->add_flag("--poincare", f.cfg.poincare, "project H^2 factors to the Poincare disk");
  sub->add_option("--out", f.cfg.out, "output directory")->capture_default_str();
  sub->add_option("extras", f.extras, "additional key=value parameters");
}

std::optional<pmc::Domain> parse_domain(const std::string& s) {
  if (s == "auto") return std::nullopt;
  std::stringstream ss(s);
  std::array<double, 4> v{};
  char comma = 0;
  if (!(ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3]) || !ss.eof()) {
    throw CLI::ValidationError("--domain", "expected x0,x1,y0,y1 or auto");
  }
  return pmc::Domain{v[0], v[1], v[2], v[3]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel and constant mean curvature surfaces: construction, certification, correspondence"};
  app.require_subcommand(1);
  Flags flags;
  for (const char* cmd : {"generate", "verify", "correspond", "report"}) {
    add_common(app.add_subcommand(cmd, std::string(cmd) + " a family member"), flags);
  }
  try {
    app.parse(argc, argv);
    flags.cfg.command = app.get_subcommands().front()->get_name();
    flags.cfg.domain = parse_domain(flags.domain);
    const CLI::App* sub = app.get_subcommands().front();
    for (const auto& [key, value] : flags.named) {
      if (sub->count("--" + key) > 0) flags.cfg.params[key] = value;
    }
    if (sub->count("--fd-step") > 0) flags.cfg.fd_step = flags.fd_step;
    for (const std::string& kv : flags.extras) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("extras", "'" + kv + "' is not key=value");
      flags.cfg.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmc::kExitInfeasible;
  } catch (const std::invalid_argument&) {
    std::cerr << "error: key=value tokens need numeric values\n";
    return pmc::kExitInfeasible;
  }
  return pmc::run_command(flags.cfg, std::cerr);
}
