#ifndef HYPERFE_MICRO_SOLVER_HPP
#define HYPERFE_MICRO_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/mechanics.hpp"
#include "hyperfe/rve_mesh.hpp"
#include "hyperfe/sampling.hpp"

// Reference finite-element solver for the RVE under periodic displacement
// boundary conditions. The total displacement decomposes as
// u(x) = A(eps_bar) x + u_tilde(x) with u_tilde periodic on opposite faces
// and pinned at the bottom-left corner; the periodic constraints are
// eliminated by master/slave DOF condensation so the Newton systems stay
// symmetric positive definite.

namespace hyperfe {

struct MicroSolution {
  // Total nodal displacement, stacked [u_x(all nodes); u_y(all nodes)].
  Eigen::VectorXd u;
  // Fluctuation on the reduced (condensed) DOFs; used for warm starts.
  Eigen::VectorXd fluct_reduced;
  Eigen::MatrixXd eps_q;  // n_gauss x 3 Voigt strains
  Eigen::MatrixXd sig_q;  // n_gauss x 4 (sig_xx, sig_yy, tau_xy, sig_zz)
  bool converged = false;
  int newton_iters = 0;
  double residual_norm = 0.0;
  std::string diagnostics;
};

struct MicroSolveOptions {
  // Absolute residual inf-norm. Tight enough that warm-started cell solves
  // inside a macro Newton loop resolve the homogenized stress well below the
  // macro driver's relative tolerance; a looser cell tolerance makes the
  // stress history-dependent at a level that stalls the outer iteration.
  double tol = 1e-11;
  int max_iter = 25;
  const Eigen::VectorXd* warm_start = nullptr;  // reduced fluctuation
};

// Affine displacement A(eps_bar) x at a point, with engineering shear split
// symmetrically between the two components.
Eigen::Vector2d affine_displacement(const Strain2D& eps_bar,
                                    const Eigen::Vector2d& x);

MicroSolution solve_micro(const RveMesh& mesh, const Strain2D& eps_bar,
                          const MaterialParams& mat,
                          const MicroSolveOptions& opts = {});

// Volume average of the quadrature stresses.
Stress2D homogenize_stress(const MicroSolution& sol, const RveMesh& mesh);
Stress2D average_stress(const Eigen::MatrixXd& sig_q, const RveMesh& mesh);

// Weighted volume average of the quadrature strains; equals eps_bar for any
// converged periodic solution (kinematic admissibility).
Strain2D average_strain(const MicroSolution& sol, const RveMesh& mesh);

// Consistent homogenized tangent d(sig_bar)/d(eps_bar) of the converged
// periodic cell problem, by static condensation:
//   C = (1/V) [ sum_q w_q C_q  -  H K^-1 H^T ],
// where H = sum_q w_q C_q B_q P gathers the reduced-DOF coupling.
Tangent3x3 fe2_tangent(const RveMesh& mesh, const MicroSolution& sol,
                       const MaterialParams& mat);

struct SnapshotMatrix {
  Eigen::MatrixXd U;                // 2m x n_cols, one column per sample
  Eigen::MatrixXd strains;          // n_cols x 3, the generating sample strains
  std::vector<int> sample_indices;  // sample index per column
  std::vector<int> failed_indices;  // non-converged samples, excluded
  double L = 0.0;
  double magnitude = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t mesh_hash = 0;
};

// Solve every sample and stack the total displacements column-wise. Samples
// are independent and may be distributed over threads; columns are ordered
// by sample index regardless of completion order.
SnapshotMatrix generate_snapshots(const RveMesh& mesh, const SampleSet& set,
                                  const MaterialParams& mat,
                                  double tol = 1e-11, int threads = 1);

}  // namespace hyperfe

#endif
