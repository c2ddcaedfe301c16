#include "hyperfe/surrogate.hpp"

#include <cmath>
#include <stdexcept>

namespace hyperfe {

namespace {

// Voigt strain from a gradient row (dux/dx, dux/dy, duy/dx, duy/dy).
Eigen::Vector3d voigt_from_grad(const Eigen::RowVector4d& g) {
  return {g[0], g[3], g[1] + g[2]};
}

}  // namespace

void SurrogateModel::validate() const {
  net.validate();
  mat.validate();
  if (net.output_dim() != basis.p())
    throw std::runtime_error("SurrogateModel: net width != basis p");
  if (net.input_dim() != 3)
    throw std::runtime_error("SurrogateModel: branch input must be 3");
  const int q = n_gauss();
  if (q == 0 || static_cast<int>(phase_q.size()) != q ||
      strain0.rows() != q || strain0.cols() != 3 ||
      mode_strain.rows() != 3 * q || mode_strain.cols() != basis.p())
    throw std::runtime_error("SurrogateModel: inconsistent quadrature data");
  if (!(volume > 0.0) || (wdetj.array() <= 0.0).any())
    throw std::runtime_error("SurrogateModel: non-positive quadrature weights");
  if (std::abs(wdetj.sum() - volume) > 1e-9 * volume)
    throw std::runtime_error("SurrogateModel: weights do not tile the cell");
}

SurrogateModel build_surrogate(const RveMesh& mesh, PodBasis basis,
                               BranchNet net, const MaterialParams& mat) {
  if (!basis.has_gradients()) mode_gradients(basis, mesh);
  if (basis.mesh_hash != mesh.hash)
    throw std::runtime_error(
        "build_surrogate: basis/mesh provenance hash mismatch");
  if (net.output_dim() != basis.p())
    throw std::runtime_error("build_surrogate: net width != basis p");

  SurrogateModel model;
  const int q = mesh.n_gauss();
  model.wdetj.resize(q);
  model.phase_q.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    model.wdetj[i] = mesh.gauss[static_cast<std::size_t>(i)].wdetj;
    model.phase_q[static_cast<std::size_t>(i)] =
        mesh.phase[static_cast<std::size_t>(i / 4)];
  }
  model.volume = mesh.volume();
  model.mesh_hash = mesh.hash;

  model.strain0.resize(q, 3);
  for (int i = 0; i < q; ++i)
    model.strain0.row(i) = voigt_from_grad(basis.grad_phi0.row(i)).transpose();

  const int p = basis.p();
  model.mode_strain.resize(3 * q, p);
  for (int k = 0; k < p; ++k) {
    const Eigen::MatrixXd& g = basis.grad_modes[static_cast<std::size_t>(k)];
    for (int i = 0; i < q; ++i)
      model.mode_strain.block<3, 1>(3 * i, k) = voigt_from_grad(g.row(i));
  }

  model.net = std::move(net);
  model.basis = std::move(basis);
  model.mat = mat;
  model.validate();
  return model;
}

Eigen::VectorXd predict_displacement(const SurrogateModel& model,
                                     const Strain2D& eps_bar) {
  return reconstruct(model.basis, branch_forward(model.net, eps_bar));
}

Eigen::MatrixXd galerkin_strain_from_coeffs(const SurrogateModel& model,
                                            const Eigen::VectorXd& b) {
  if (b.size() != model.p())
    throw std::invalid_argument("galerkin_strain: coefficient length mismatch");
  Eigen::VectorXd flat = model.mode_strain * b;
  using RowMajor3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
  return model.strain0 +
         Eigen::Map<const RowMajor3>(flat.data(), model.n_gauss(), 3);
}

Eigen::MatrixXd galerkin_strain(const SurrogateModel& model,
                                const Strain2D& eps_bar) {
  return galerkin_strain_from_coeffs(model,
                                     branch_forward(model.net, eps_bar));
}

Eigen::MatrixXd stress_from_strain(const SurrogateModel& model,
                                   const Eigen::MatrixXd& eps_q) {
  const int q = model.n_gauss();
  if (eps_q.rows() != q || eps_q.cols() != 3)
    throw std::invalid_argument("stress_from_strain: strain table mismatch");
  Eigen::MatrixXd sig(q, 4);
  for (int i = 0; i < q; ++i) {
    const Stress2D s =
        evaluate_stress(Strain2D::from_voigt(eps_q.row(i).transpose()),
                        model.phase_q[static_cast<std::size_t>(i)], model.mat);
    sig(i, 0) = s.sig_xx;
    sig(i, 1) = s.sig_yy;
    sig(i, 2) = s.tau_xy;
    sig(i, 3) = s.sig_zz;
  }
  return sig;
}

Eigen::MatrixXd surrogate_stress(const SurrogateModel& model,
                                 const Strain2D& eps_bar) {
  return stress_from_strain(model, galerkin_strain(model, eps_bar));
}

namespace {

Stress2D weighted_average(const SurrogateModel& model,
                          const Eigen::MatrixXd& sig_q) {
  const Eigen::RowVector4d avg =
      (model.wdetj.transpose() * sig_q) / model.volume;
  return {avg[0], avg[1], avg[2], avg[3]};
}

Tangent3x3 tangent_from_fields(const SurrogateModel& model,
                               const Eigen::MatrixXd& eps_q,
                               const Eigen::MatrixXd& jac) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, model.p());
  for (int i = 0; i < model.n_gauss(); ++i) {
    const Tangent3x3 c = material_tangent(
        Strain2D::from_voigt(eps_q.row(i).transpose()),
        model.phase_q[static_cast<std::size_t>(i)], model.mat);
    a.noalias() += model.wdetj[i] * (c * model.mode_strain.middleRows(3 * i, 3));
  }
  return (a * jac) / model.volume;
}

}  // namespace

Stress2D surrogate_homogenize(const SurrogateModel& model,
                              const Strain2D& eps_bar) {
  return weighted_average(model, surrogate_stress(model, eps_bar));
}

Tangent3x3 consistent_tangent(const SurrogateModel& model,
                              const Strain2D& eps_bar) {
  return tangent_from_fields(model, galerkin_strain(model, eps_bar),
                             branch_jacobian(model.net, eps_bar));
}

Tangent3x3 fd_tangent(const SurrogateModel& model, const Strain2D& eps_bar,
                      double step) {
  Tangent3x3 t;
  const Eigen::Vector3d v0 = eps_bar.voigt();
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d vp = v0, vm = v0;
    vp[j] += step;
    vm[j] -= step;
    const Eigen::Vector3d dp =
        surrogate_homogenize(model, Strain2D::from_voigt(vp)).voigt();
    const Eigen::Vector3d dm =
        surrogate_homogenize(model, Strain2D::from_voigt(vm)).voigt();
    t.col(j) = (dp - dm) / (2.0 * step);
  }
  return t;
}

MicroPrediction surrogate_predict(const SurrogateModel& model,
                                  const Strain2D& eps_bar, bool with_tangent) {
  MicroPrediction out;
  out.b = branch_forward(model.net, eps_bar);
  out.u_nodes = reconstruct(model.basis, out.b);
  out.eps_q = galerkin_strain_from_coeffs(model, out.b);
  out.sig_q = stress_from_strain(model, out.eps_q);
  out.sigma_bar = weighted_average(model, out.sig_q);
  if (with_tangent)
    out.tangent = tangent_from_fields(model, out.eps_q,
                                      branch_jacobian(model.net, eps_bar));
  return out;
}

}  // namespace hyperfe
