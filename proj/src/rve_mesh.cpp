#include "hyperfe/rve_mesh.hpp"

#include <cmath>
#include <stdexcept>

#include "hyperfe/hash.hpp"

namespace hyperfe {

std::vector<GaussPointGeom> precompute_quadrature(
    const Eigen::MatrixX2d& nodes, const Eigen::MatrixX4i& elements) {
  const auto& pts = gauss22_points();
  std::vector<GaussPointGeom> out;
  out.reserve(static_cast<std::size_t>(4 * elements.rows()));
  for (Eigen::Index e = 0; e < elements.rows(); ++e) {
    Eigen::Matrix<double, 4, 2> xe;
    for (int a = 0; a < 4; ++a) xe.row(a) = nodes.row(elements(e, a));
    for (const auto& [xi, eta] : pts) {
      const Eigen::Matrix<double, 4, 2> dn = quad4_shape_grad(xi, eta);
      const Eigen::Matrix2d jac = dn.transpose() * xe;  // dx/dxi
      const double detj = jac.determinant();
      if (!(detj > 0.0))
        throw std::runtime_error("precompute_quadrature: non-positive Jacobian in element " +
                                 std::to_string(e));
      GaussPointGeom g;
      g.dndx = dn * jac.inverse();
      g.wdetj = detj;  // 2x2 Gauss weights are 1
      g.x = (quad4_shape(xi, eta).transpose() * xe).transpose();
      out.push_back(g);
    }
  }
  return out;
}

RveMesh build_rve_mesh(int n_per_side, double fiber_fraction, double L) {
  if (n_per_side < 8)
    throw std::invalid_argument("build_rve_mesh: n_per_side must be >= 8");
  if (!(fiber_fraction > 0.0) || !(fiber_fraction < M_PI / 4.0))
    throw std::invalid_argument(
        "build_rve_mesh: fiber_fraction must lie in (0, pi/4) so the fiber "
        "circle fits inside the cell");
  if (!(L > 0.0)) throw std::invalid_argument("build_rve_mesh: L must be > 0");

  RveMesh mesh;
  mesh.domain.L = L;
  mesh.n_per_side = n_per_side;
  mesh.fiber_fraction_target = fiber_fraction;
  mesh.fiber_radius = L * std::sqrt(fiber_fraction / M_PI);

  const int n = n_per_side;
  const int nn = n + 1;
  const double h = L / n;

  mesh.nodes.resize(nn * nn, 2);
  for (int j = 0; j < nn; ++j)
    for (int i = 0; i < nn; ++i) {
      mesh.nodes(j * nn + i, 0) = -0.5 * L + i * h;
      mesh.nodes(j * nn + i, 1) = -0.5 * L + j * h;
    }

  mesh.elements.resize(n * n, 4);
  mesh.phase.resize(static_cast<std::size_t>(n * n));
  int n_fiber = 0;
  const double r2 = mesh.fiber_radius * mesh.fiber_radius;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int e = j * n + i;
      mesh.elements.row(e) << j * nn + i, j * nn + i + 1, (j + 1) * nn + i + 1,
          (j + 1) * nn + i;
      const double cx = -0.5 * L + (i + 0.5) * h;
      const double cy = -0.5 * L + (j + 0.5) * h;
      const bool fiber = cx * cx + cy * cy < r2;
      mesh.phase[static_cast<std::size_t>(e)] =
          fiber ? Phase::Fiber : Phase::Matrix;
      if (fiber) ++n_fiber;
    }
  mesh.realized_fiber_fraction = static_cast<double>(n_fiber) / (n * n);

  mesh.gauss = precompute_quadrature(mesh.nodes, mesh.elements);

  // Periodic map: right edge -> left edge, top edge -> bottom edge, all four
  // corners -> bottom-left corner.
  auto node_id = [nn](int i, int j) { return j * nn + i; };
  mesh.periodic.master.resize(static_cast<std::size_t>(nn * nn));
  for (int k = 0; k < nn * nn; ++k)
    mesh.periodic.master[static_cast<std::size_t>(k)] = k;
  for (int j = 1; j < n; ++j)
    mesh.periodic.master[static_cast<std::size_t>(node_id(n, j))] =
        node_id(0, j);
  for (int i = 1; i < n; ++i)
    mesh.periodic.master[static_cast<std::size_t>(node_id(i, n))] =
        node_id(i, 0);
  const int corner = node_id(0, 0);
  mesh.periodic.master[static_cast<std::size_t>(node_id(n, 0))] = corner;
  mesh.periodic.master[static_cast<std::size_t>(node_id(0, n))] = corner;
  mesh.periodic.master[static_cast<std::size_t>(node_id(n, n))] = corner;
  mesh.periodic.pinned_node = corner;

  Fnv1a hasher;
  hasher.add(n_per_side).add(L).add(fiber_fraction);
  hasher.add_bytes(mesh.nodes.data(), sizeof(double) * mesh.nodes.size());
  for (Phase ph : mesh.phase) hasher.add(static_cast<int>(ph));
  mesh.hash = hasher.value();
  return mesh;
}

}  // namespace hyperfe
