// SPDX-License-Identifier: Apache-2.0
//
// Plain-text exports: OBJ meshes, CSV tables and key=value metadata. All
// numbers are printed with fixed formats so identical inputs give
// byte-identical files.
#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pmc/chart.hpp"
#include "pmc/correspondence.hpp"
#include "pmc/diffgeo.hpp"

namespace pmc {

struct Mesh {
  std::string name;
  std::vector<Eigen::Vector3d> vertices;        // grid order, index k * nx + i
  std::vector<std::array<int, 3>> triangles;    // zero-based
};

/// (x1, x2) / (1 + x3): stereographic projection of S^2 from the south pole,
/// or the Poincare disk model of the upper sheet of H^2.
Eigen::Vector2d disk_projection(const Eigen::Vector3d& p);

struct MeshOptions {
  bool poincare = false;  // project H^2 factors of product targets to the disk
};

/// Meshes of a chart sampled on a grid (two triangles per cell).
///   product target: one mesh per factor, each in 3-space;
///   M^2 x R:        (disk projection of the factor, height);
///   M^2 x S^1(r):   the factor's disk projection rotated about the z axis by
///                   the circle angle, at distance 3 from it (a solid torus).
std::vector<Mesh> chart_meshes(const ImmersionChart& chart, const GridSpec& grid, const MeshOptions& opt = {});

void write_obj(std::ostream& os, const Mesh& mesh);

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// One key=value line per entry; keys must not contain '=' or newlines.
void write_metadata(std::ostream& os, const Metadata& md);

/// One row per grid point: coordinates, u, |H|, K and the family-specific
/// invariants (C_j, theta_j for products; nu, eta, theta_AR otherwise).
void write_invariants_csv(std::ostream& os, const SurfaceInvariants& inv);

void write_frenet_csv(std::ostream& os, const PmcFrenetData& d);
void write_frenet_csv(std::ostream& os, const CmcFrenetData& d);

/// Formats a double with 17 significant digits.
std::string format_number(double v);

/// Opens `path` for writing (creating parent directories) and calls `fill`.
/// Throws IoError when the file cannot be created or written.
template <class F>
void write_file(const std::filesystem::path& path, F fill);

/// Implementation detail of write_file.
std::ostream& open_output(const std::filesystem::path& path, std::unique_ptr<std::ostream>& holder);
void close_output(const std::filesystem::path& path, std::unique_ptr<std::ostream>& holder);

template <class F>
void write_file(const std::filesystem::path& path, F fill) {
  std::unique_ptr<std::ostream> holder;
  fill(open_output(path, holder));
  close_output(path, holder);
}

}  // namespace pmc
