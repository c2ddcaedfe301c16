#ifndef HYPERFE_SURROGATE_HPP
#define HYPERFE_SURROGATE_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/branch_net.hpp"
#include "hyperfe/pod.hpp"
#include "hyperfe/rve_mesh.hpp"

namespace hyperfe {

// Hybrid micro evaluator: the branch net maps the macro strain to POD
// coefficients, the POD modes act as the trunk, and strain/stress are
// recovered through the quadrature operators and constitutive laws of the
// snapshot mesh. Immutable after construction; all ops are pure.
struct SurrogateModel {
  BranchNet net;
  PodBasis basis;
  MaterialParams mat;

  Eigen::VectorXd wdetj;       // per gauss point
  std::vector<Phase> phase_q;  // per gauss point
  double volume = 0.0;
  std::uint64_t mesh_hash = 0;

  Eigen::MatrixXd strain0;      // n_gauss x 3, Voigt strain of the mean field
  Eigen::MatrixXd mode_strain;  // 3*n_gauss x p, Voigt strain of each mode

  int p() const { return basis.p(); }
  int n_gauss() const { return static_cast<int>(wdetj.size()); }
  void validate() const;
};

// Precomputes the quadrature strain operators. Fills mode gradients if the
// basis does not carry them yet; the basis must stem from `mesh` and the net
// width must match p.
SurrogateModel build_surrogate(const RveMesh& mesh, PodBasis basis,
                               BranchNet net, const MaterialParams& mat);

struct MicroPrediction {
  Eigen::VectorXd b;        // POD coefficients
  Eigen::VectorXd u_nodes;  // stacked [u_x; u_y]
  Eigen::MatrixXd eps_q;    // n_gauss x 3 Voigt
  Eigen::MatrixXd sig_q;    // n_gauss x 4 (sig_xx, sig_yy, tau_xy, sig_zz)
  Stress2D sigma_bar;
  Tangent3x3 tangent = Tangent3x3::Zero();
};

// u = phi0 + sum_k b_k(eps_bar) phi_k, as stacked nodal values.
Eigen::VectorXd predict_displacement(const SurrogateModel& model,
                                     const Strain2D& eps_bar);

// Quadrature-point strain of the reconstructed field; identical to the FE
// symmetric gradient of predict_displacement because both apply the same
// linear operator.
Eigen::MatrixXd galerkin_strain(const SurrogateModel& model,
                                const Strain2D& eps_bar);
Eigen::MatrixXd galerkin_strain_from_coeffs(const SurrogateModel& model,
                                            const Eigen::VectorXd& b);

// Constitutive laws applied per quadrature point, dispatched on phase.
Eigen::MatrixXd surrogate_stress(const SurrogateModel& model,
                                 const Strain2D& eps_bar);
Eigen::MatrixXd stress_from_strain(const SurrogateModel& model,
                                   const Eigen::MatrixXd& eps_q);

// Quadrature volume average of surrogate_stress.
Stress2D surrogate_homogenize(const SurrogateModel& model,
                              const Strain2D& eps_bar);

// Exact d(sigma_bar)/d(eps_bar): material tangents composed with the linear
// mode-strain operator and the branch jacobian.
Tangent3x3 consistent_tangent(const SurrogateModel& model,
                              const Strain2D& eps_bar);

// Central-difference check/fallback on surrogate_homogenize.
Tangent3x3 fd_tangent(const SurrogateModel& model, const Strain2D& eps_bar,
                      double step = 1e-6);

// One branch evaluation shared across displacement, strain, stress,
// homogenized stress and (optionally) the tangent.
MicroPrediction surrogate_predict(const SurrogateModel& model,
                                  const Strain2D& eps_bar,
                                  bool with_tangent = true);

}  // namespace hyperfe

#endif
