// SPDX-License-Identifier: Apache-2.0
#include "pmc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "pmc/errors.hpp"

namespace pmc {

namespace {

constexpr double kTorusRadius = 3.0;

Mesh grid_mesh(std::string name, const GridSpec& g, std::vector<Eigen::Vector3d> vertices) {
  Mesh m;
  m.name = std::move(name);
  m.vertices = std::move(vertices);
  for (int k = 0; k + 1 < g.ny; ++k) {
    for (int i = 0; i + 1 < g.nx; ++i) {
      const int a = k * g.nx + i, b = a + 1, c = a + g.nx, d = c + 1;
      m.triangles.push_back({a, b, d});
      m.triangles.push_back({a, d, c});
    }
  }
  return m;
}

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  // "-0.0000000000" and "0.0000000000" are the same vertex.
  if (std::string(buf) == "-0.0000000000") return "0.0000000000";
  return buf;
}

void csv_row(std::ostream& os, const std::vector<double>& values) {
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) os << ',';
    os << format_number(values[i]);
  }
  os << '\n';
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::Vector2d disk_projection(const Eigen::Vector3d& p) {
  const double den = 1.0 + p.z();
  if (std::abs(den) < 1e-12) throw DomainError("disk_projection: point at the projection pole");
  return {p.x() / den, p.y() / den};
}

std::vector<Mesh> chart_meshes(const ImmersionChart& chart, const GridSpec& grid, const MeshOptions& opt) {
  if (grid.nx < 2 || grid.ny < 2) throw DomainError("chart_meshes: grid needs at least 2 x 2 nodes");
  const size_t n = static_cast<size_t>(grid.nx) * grid.ny;
  std::vector<Vec6> pts(n);
  for (int k = 0; k < grid.ny; ++k) {
    for (int i = 0; i < grid.nx; ++i) pts[static_cast<size_t>(k) * grid.nx + i] = chart.evaluate(grid.x(i), grid.y(k));
  }

  std::vector<Mesh> out;
  if (chart.target.is_product()) {
    const bool flatten = opt.poincare && !chart.eps.is_sphere();
    for (int f = 0; f < 2; ++f) {
      std::vector<Eigen::Vector3d> v(n);
      for (size_t m = 0; m < n; ++m) {
        const Eigen::Vector3d q = pts[m].segment<3>(3 * f);
        if (flatten) {
          const Eigen::Vector2d d = disk_projection(q);
          v[m] = {d.x(), d.y(), 0.0};
        } else {
          v[m] = q;
        }
      }
      out.push_back(grid_mesh(f == 0 ? "phi" : "psi", grid, std::move(v)));
    }
    return out;
  }

  std::vector<Eigen::Vector3d> v(n);
  for (size_t m = 0; m < n; ++m) {
    const Eigen::Vector2d d = disk_projection(pts[m].head<3>());
    if (chart.target.kind == TargetKind::kFactorTimesLine) {
      v[m] = {d.x(), d.y(), pts[m](3)};
    } else {
      const double ang = std::atan2(pts[m](4), pts[m](3));
      v[m] = {(kTorusRadius + d.x()) * std::cos(ang), (kTorusRadius + d.x()) * std::sin(ang), d.y()};
    }
  }
  out.push_back(grid_mesh("surface", grid, std::move(v)));
  return out;
}

void write_obj(std::ostream& os, const Mesh& mesh) {
  os << "o " << mesh.name << '\n';
  for (const auto& v : mesh.vertices) os << "v " << fixed10(v.x()) << ' ' << fixed10(v.y()) << ' ' << fixed10(v.z()) << '\n';
  for (const auto& t : mesh.triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void write_metadata(std::ostream& os, const Metadata& md) {
  for (const auto& [k, v] : md) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw UsageError("write_metadata: key '" + k + "' is not a plain key=value pair");
    }
    os << k << '=' << v << '\n';
  }
}

void write_invariants_csv(std::ostream& os, const SurfaceInvariants& inv) {
  const bool product = inv.target.is_product();
  const bool st = inv.options.stencils;
  os << "x,y,u,hnorm,conformal_defect,K_gauss_equation,K_stencil,parallelism";
  if (product) {
    os << ",C1,C2,theta1_re,theta1_im,theta2_re,theta2_im\n";
  } else {
    os << ",nu,height,theta_ar_re,theta_ar_im\n";
  }
  for (int k = 0; k < inv.grid.ny; ++k) {
    for (int i = 0; i < inv.grid.nx; ++i) {
      const PointGeometry& g = inv.at(i, k);
      std::vector<double> row{g.x, g.y, g.u, g.hnorm, g.conformal_defect, g.k_gauss,
                              st ? inv.st(i, k).K : 0.0, st ? inv.st(i, k).parallelism : 0.0};
      if (product) {
        row.insert(row.end(), {g.C[0], g.C[1], g.theta[0].real(), g.theta[0].imag(), g.theta[1].real(),
                               g.theta[1].imag()});
      } else {
        row.insert(row.end(), {g.nu, g.height, g.theta_ar.real(), g.theta_ar.imag()});
      }
      csv_row(os, row);
    }
  }
}

void write_frenet_csv(std::ostream& os, const PmcFrenetData& d) {
  os << "x,y,u,hnorm,C1,C2,gamma1_re,gamma1_im,gamma2_re,gamma2_im,f1_re,f1_im,f2_re,f2_im\n";
  for (int k = 0; k < d.grid.ny; ++k) {
    for (int i = 0; i < d.grid.nx; ++i) {
      const size_t m = static_cast<size_t>(k) * d.grid.nx + i;
      csv_row(os, {d.grid.x(i), d.grid.y(k), d.u[m], d.hnorm, d.C[0][m], d.C[1][m], d.gamma[0][m].real(),
                   d.gamma[0][m].imag(), d.gamma[1][m].real(), d.gamma[1][m].imag(), d.f[0][m].real(),
                   d.f[0][m].imag(), d.f[1][m].real(), d.f[1][m].imag()});
    }
  }
}

void write_frenet_csv(std::ostream& os, const CmcFrenetData& d) {
  os << "x,y,u,H,nu,eta,p_re,p_im\n";
  for (int k = 0; k < d.grid.ny; ++k) {
    for (int i = 0; i < d.grid.nx; ++i) {
      const size_t m = static_cast<size_t>(k) * d.grid.nx + i;
      csv_row(os, {d.grid.x(i), d.grid.y(k), d.u[m], d.H, d.nu[m], d.eta[m], d.p[m].real(), d.p[m].imag()});
    }
  }
}

std::ostream& open_output(const std::filesystem::path& path, std::unique_ptr<std::ostream>& holder) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw IoError("cannot open " + path.string() + " for writing");
  holder = std::move(f);
  return *holder;
}

void close_output(const std::filesystem::path& path, std::unique_ptr<std::ostream>& holder) {
  auto* f = dynamic_cast<std::ofstream*>(holder.get());
  if (f) f->close();
  if (!holder || holder->fail()) throw IoError("writing " + path.string() + " failed");
  holder.reset();
}

}  // namespace pmc
