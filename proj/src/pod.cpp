#include "hyperfe/pod.hpp"

#include <iostream>
#include <stdexcept>

#include "hyperfe/hash.hpp"

namespace hyperfe {

std::uint64_t PodBasis::content_hash() const {
  Fnv1a h;
  h.add(mesh_hash).add(p()).add(n_dofs());
  h.add_bytes(phi0.data(), sizeof(double) * phi0.size());
  h.add_bytes(modes.data(), sizeof(double) * modes.size());
  h.add_bytes(singular_values.data(),
              sizeof(double) * singular_values.size());
  return h.value();
}

PodBasis compute_pod(const Eigen::MatrixXd& U, int p, std::uint64_t mesh_hash) {
  const Eigen::Index rows = U.rows();
  const Eigen::Index cols = U.cols();
  if (cols < 2)
    throw std::invalid_argument("compute_pod: need at least 2 snapshots");
  if (p < 1 || p > std::min(rows, cols))
    throw std::invalid_argument("compute_pod: p must lie in [1, min(2m, N)]");

  PodBasis basis;
  basis.mesh_hash = mesh_hash;
  basis.phi0 = U.rowwise().mean();
  const Eigen::MatrixXd centered = U.colwise() - basis.phi0;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinU);
  basis.singular_values = svd.singularValues();
  basis.modes = svd.matrixU().leftCols(p);

  const double s0 = basis.singular_values.size() ? basis.singular_values[0] : 0.0;
  if (p > 0 && basis.singular_values[p - 1] <= 1e-12 * s0)
    std::cerr << "compute_pod: warning: snapshots are rank-deficient below "
                 "the requested " << p << " modes\n";
  return basis;
}

PodBasis compute_pod(const SnapshotMatrix& snapshots, int p) {
  return compute_pod(snapshots.U, p, snapshots.mesh_hash);
}

Eigen::VectorXd project(const PodBasis& basis, const Eigen::VectorXd& u) {
  if (u.size() != basis.phi0.size())
    throw std::invalid_argument("project: displacement length mismatch");
  return basis.modes.transpose() * (u - basis.phi0);
}

Eigen::VectorXd reconstruct(const PodBasis& basis, const Eigen::VectorXd& b) {
  if (b.size() != basis.modes.cols())
    throw std::invalid_argument("reconstruct: coefficient length mismatch");
  return basis.phi0 + basis.modes * b;
}

Eigen::MatrixXd field_gradients(const Eigen::VectorXd& field,
                                const RveMesh& mesh) {
  const int m = mesh.n_nodes();
  if (field.size() != 2 * m)
    throw std::invalid_argument("field_gradients: field length mismatch");
  Eigen::MatrixXd grad(mesh.n_gauss(), 4);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 4, 2> we;  // nodal values (ux, uy) per node
    for (int a = 0; a < 4; ++a) {
      we(a, 0) = field[mesh.elements(e, a)];
      we(a, 1) = field[m + mesh.elements(e, a)];
    }
    for (int q = 0; q < 4; ++q) {
      const int g = 4 * e + q;
      // du_i/dx_j = sum_a dN_a/dx_j * w_a,i
      const Eigen::Matrix2d gm =
          we.transpose() * mesh.gauss[static_cast<std::size_t>(g)].dndx;
      grad.row(g) << gm(0, 0), gm(0, 1), gm(1, 0), gm(1, 1);
    }
  }
  return grad;
}

void mode_gradients(PodBasis& basis, const RveMesh& mesh) {
  if (basis.mesh_hash != 0 && basis.mesh_hash != mesh.hash)
    throw std::runtime_error(
        "mode_gradients: basis was built on a different mesh (hash mismatch)");
  if (basis.n_dofs() != 2 * mesh.n_nodes())
    throw std::runtime_error("mode_gradients: basis/mesh size mismatch");
  basis.mesh_hash = mesh.hash;
  basis.grad_phi0 = field_gradients(basis.phi0, mesh);
  basis.grad_modes.clear();
  basis.grad_modes.reserve(static_cast<std::size_t>(basis.p()));
  for (int k = 0; k < basis.p(); ++k)
    basis.grad_modes.push_back(field_gradients(basis.modes.col(k), mesh));
}

}  // namespace hyperfe
