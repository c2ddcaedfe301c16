#ifndef HYPERFE_POD_HPP
#define HYPERFE_POD_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/micro_solver.hpp"
#include "hyperfe/rve_mesh.hpp"

namespace hyperfe {

// Mean function and orthonormal POD modes of the snapshot matrix, plus the
// displacement gradients of each mode at the quadrature points of the
// snapshot mesh (filled by mode_gradients).
struct PodBasis {
  Eigen::VectorXd phi0;             // 2m
  Eigen::MatrixXd modes;            // 2m x p, orthonormal columns
  Eigen::VectorXd singular_values;  // all min(2m, N) values, nonincreasing

  // Gradient rows are (dux/dx, dux/dy, duy/dx, duy/dy) per quadrature point.
  Eigen::MatrixXd grad_phi0;               // n_gauss x 4
  std::vector<Eigen::MatrixXd> grad_modes; // p matrices, n_gauss x 4

  std::uint64_t mesh_hash = 0;

  int p() const { return static_cast<int>(modes.cols()); }
  int n_dofs() const { return static_cast<int>(phi0.size()); }
  bool has_gradients() const { return grad_phi0.size() > 0; }

  std::uint64_t content_hash() const;
};

// SVD of the snapshot matrix after removing the row-wise mean; keeps the
// first p left singular vectors.
PodBasis compute_pod(const SnapshotMatrix& snapshots, int p);
PodBasis compute_pod(const Eigen::MatrixXd& U, int p,
                     std::uint64_t mesh_hash = 0);

// Coefficients b = Phi^T (u - phi0).
Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& u);

// phi0 + Phi b.
Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& b);

// Evaluate the displacement gradient of every mode (and the mean) at all
// quadrature points via the element shape-function derivatives. The basis
// must have been built on this mesh.
void mode_gradients(PodBasis& basis, const RveMesh& mesh);

// Gradient of one stacked nodal field at all quadrature points; rows as in
// PodBasis::grad_phi0.
Eigen::MatrixXd field_gradients(const Eigen::VectorXd& field,
                                const RveMesh& mesh);

}  // namespace hyperfe

#endif
