#ifndef HYPERFE_QUAD4_HPP
#define HYPERFE_QUAD4_HPP

#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Dense>

// Bilinear 4-node quadrilateral with 2x2 Gauss quadrature, shared by the
// RVE and macroscale solvers. Node order is counter-clockwise starting at
// (-1,-1). Element displacement vectors are ordered (ux0..ux3, uy0..uy3)
// to match the global x-then-y stacked layout.

namespace hyperfe {

// Shape gradients in physical coordinates plus integration data at one
// Gauss point of one element.
struct GaussPointGeom {
  Eigen::Matrix<double, 4, 2> dndx;  // dN_a/dx, dN_a/dy
  double wdetj = 0.0;                // quadrature weight * |J|
  Eigen::Vector2d x;                 // physical location
};

inline Eigen::Vector4d quad4_shape(double xi, double eta) {
  return 0.25 * Eigen::Vector4d((1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                                (1 + xi) * (1 + eta), (1 - xi) * (1 + eta));
}

inline Eigen::Matrix<double, 4, 2> quad4_shape_grad(double xi, double eta) {
  Eigen::Matrix<double, 4, 2> g;
  g << -(1 - eta), -(1 - xi),
        (1 - eta), -(1 + xi),
        (1 + eta),  (1 + xi),
       -(1 + eta),  (1 - xi);
  return 0.25 * g;
}

inline const std::array<std::pair<double, double>, 4>& gauss22_points() {
  static const double a = 1.0 / std::sqrt(3.0);
  static const std::array<std::pair<double, double>, 4> pts = {
      {{-a, -a}, {a, -a}, {a, a}, {-a, a}}};
  return pts;
}

// Strain-displacement matrix in Voigt form with engineering shear.
inline Eigen::Matrix<double, 3, 8> b_matrix(
    const Eigen::Matrix<double, 4, 2>& dndx) {
  Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
  for (int a = 0; a < 4; ++a) {
    b(0, a) = dndx(a, 0);
    b(1, 4 + a) = dndx(a, 1);
    b(2, a) = dndx(a, 1);
    b(2, 4 + a) = dndx(a, 0);
  }
  return b;
}

// Precompute shape gradients and weights at the 2x2 Gauss points of every
// element. Throws on non-positive Jacobians.
std::vector<GaussPointGeom> precompute_quadrature(
    const Eigen::MatrixX2d& nodes, const Eigen::MatrixX4i& elements);

}  // namespace hyperfe

#endif
