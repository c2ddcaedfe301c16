#ifndef HYPERFE_RVE_MESH_HPP
#define HYPERFE_RVE_MESH_HPP

#include <cstdint>
#include <vector>

#include "hyperfe/mechanics.hpp"
#include "hyperfe/quad4.hpp"

namespace hyperfe {

// Square unit cell [-L/2, L/2]^2.
struct RveDomain {
  double L = 1.0;
  static constexpr int dim = 2;
};

// Pairing of periodic boundary nodes. master[i] == i for independent nodes;
// right/top boundary nodes point at their left/bottom partners and all four
// corners collapse onto the bottom-left corner, which is also pinned to
// remove the rigid translation of the fluctuation field.
struct PeriodicMap {
  std::vector<int> master;
  int pinned_node = 0;
};

struct RveMesh {
  RveDomain domain;
  int n_per_side = 0;
  double fiber_fraction_target = 0.0;
  double fiber_radius = 0.0;
  double realized_fiber_fraction = 0.0;

  Eigen::MatrixX2d nodes;
  Eigen::MatrixX4i elements;
  std::vector<Phase> phase;              // per element
  std::vector<GaussPointGeom> gauss;     // 4 per element
  PeriodicMap periodic;

  std::uint64_t hash = 0;  // provenance tag over geometry and tagging

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_elements() const { return static_cast<int>(elements.rows()); }
  int n_gauss() const { return 4 * n_elements(); }
  double volume() const { return domain.L * domain.L; }
};

// Structured n x n quad grid on the centered square; an element is tagged
// fiber iff its centroid lies inside the centered circle of radius
// r = L * sqrt(fraction / pi).
RveMesh build_rve_mesh(int n_per_side, double fiber_fraction, double L = 1.0);

}  // namespace hyperfe

#endif
