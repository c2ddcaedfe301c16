#include "hyperfe/micro_solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "hyperfe/rng.hpp"

namespace hyperfe {
namespace {

RveMesh all_matrix_mesh(int n) { return build_rve_mesh(n, 1e-4, 1.0); }

RveMesh all_fiber_mesh(int n) {
  RveMesh m = build_rve_mesh(n, 1e-4, 1.0);
  for (auto& p : m.phase) p = Phase::Fiber;
  return m;
}

double rel3(const Eigen::Vector3d& got, const Eigen::Vector3d& want) {
  return (got - want).norm() / want.norm();
}

// Uniform strain is the exact solution on a homogeneous cell, so the strain
// field, the stress average and the tangent must all collapse to the single-
// phase constitutive law.
TEST(MicroSolver, HomogeneousFiberPatchTest) {
  const RveMesh mesh = all_fiber_mesh(8);
  const MaterialParams mat;
  const Strain2D eps_bar{0.01, -0.004, 0.02};
  const MicroSolution sol = solve_micro(mesh, eps_bar, mat);
  ASSERT_TRUE(sol.converged);

  for (int q = 0; q < mesh.n_gauss(); ++q) {
    EXPECT_NEAR(sol.eps_q(q, 0), eps_bar.eps_xx, 1e-10);
    EXPECT_NEAR(sol.eps_q(q, 1), eps_bar.eps_yy, 1e-10);
    EXPECT_NEAR(sol.eps_q(q, 2), eps_bar.gamma_xy, 1e-10);
  }

  // Total displacement equals the affine map; the fluctuation vanishes.
  const int nn = mesh.n_nodes();
  for (int i = 0; i < nn; ++i) {
    const Eigen::Vector2d ua =
        affine_displacement(eps_bar, mesh.nodes.row(i).transpose());
    EXPECT_NEAR(sol.u[i], ua.x(), 1e-12);
    EXPECT_NEAR(sol.u[nn + i], ua.y(), 1e-12);
  }

  const Stress2D sbar = homogenize_stress(sol, mesh);
  const Eigen::Vector3d want =
      linear_tangent(mat.K_f, mat.G_f, mat.dev_factor) * eps_bar.voigt();
  EXPECT_LT(rel3(sbar.voigt(), want), 1e-8);

  const Tangent3x3 c = fe2_tangent(mesh, sol, mat);
  const Tangent3x3 cw = linear_tangent(mat.K_f, mat.G_f, mat.dev_factor);
  EXPECT_LT((c - cw).norm(), 1e-8 * cw.norm());
}

TEST(MicroSolver, HomogeneousMatrixPatchTest) {
  const RveMesh mesh = all_matrix_mesh(8);
  const MaterialParams mat;
  const Strain2D eps_bar{-0.011, 0.02, -0.017};
  const MicroSolution sol = solve_micro(mesh, eps_bar, mat);
  ASSERT_TRUE(sol.converged);
  // Uniform stress means the initial residual is already zero.
  EXPECT_LE(sol.newton_iters, 1);

  for (int q = 0; q < mesh.n_gauss(); ++q) {
    EXPECT_NEAR(sol.eps_q(q, 0), eps_bar.eps_xx, 1e-10);
    EXPECT_NEAR(sol.eps_q(q, 1), eps_bar.eps_yy, 1e-10);
    EXPECT_NEAR(sol.eps_q(q, 2), eps_bar.gamma_xy, 1e-10);
  }

  const Stress2D sbar = homogenize_stress(sol, mesh);
  const Stress2D want = matrix_stress(eps_bar, mat);
  EXPECT_LT(rel3(sbar.voigt(), want.voigt()), 1e-8);
  EXPECT_NEAR(sbar.sig_zz, want.sig_zz, 1e-8 * std::abs(want.sig_zz) + 1e-12);
}

TEST(MicroSolver, ZeroStrainGivesZeroSolution) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const MicroSolution sol = solve_micro(mesh, {0, 0, 0}, mat);
  ASSERT_TRUE(sol.converged);
  EXPECT_EQ(sol.newton_iters, 0);
  EXPECT_DOUBLE_EQ(sol.u.norm(), 0.0);
  EXPECT_DOUBLE_EQ(sol.sig_q.norm(), 0.0);
}

TEST(MicroSolver, AverageStrainMatchesMacroStrain) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  Rng rng(3);
  for (int k = 0; k < 5; ++k) {
    const Strain2D eps_bar{uniform_range(rng, -0.04, 0.04),
                           uniform_range(rng, -0.04, 0.04),
                           uniform_range(rng, -0.04, 0.04)};
    const MicroSolution sol = solve_micro(mesh, eps_bar, mat);
    ASSERT_TRUE(sol.converged);
    EXPECT_LE(sol.newton_iters, 8);
    const Strain2D avg = average_strain(sol, mesh);
    EXPECT_NEAR(avg.eps_xx, eps_bar.eps_xx, 1e-8);
    EXPECT_NEAR(avg.eps_yy, eps_bar.eps_yy, 1e-8);
    EXPECT_NEAR(avg.gamma_xy, eps_bar.gamma_xy, 1e-8);
  }
}

TEST(MicroSolver, FluctuationIsPeriodic) {
  const RveMesh mesh = build_rve_mesh(12, 0.55, 1.0);
  const MaterialParams mat;
  const Strain2D eps_bar{0.02, -0.01, 0.03};
  const MicroSolution sol = solve_micro(mesh, eps_bar, mat);
  ASSERT_TRUE(sol.converged);

  const int nn = mesh.n_nodes();
  Eigen::VectorXd fluct(2 * nn);
  for (int i = 0; i < nn; ++i) {
    const Eigen::Vector2d ua =
        affine_displacement(eps_bar, mesh.nodes.row(i).transpose());
    fluct[i] = sol.u[i] - ua.x();
    fluct[nn + i] = sol.u[nn + i] - ua.y();
  }
  const double scale = fluct.cwiseAbs().maxCoeff();
  ASSERT_GT(scale, 0.0);  // heterogeneous cell must fluctuate
  for (int i = 0; i < nn; ++i) {
    const int m = mesh.periodic.master[i];
    EXPECT_NEAR(fluct[i], fluct[m], 1e-10 * scale);
    EXPECT_NEAR(fluct[nn + i], fluct[nn + m], 1e-10 * scale);
  }
  // Pinned corner carries zero fluctuation.
  EXPECT_NEAR(fluct[mesh.periodic.pinned_node], 0.0, 1e-14);
  EXPECT_NEAR(fluct[nn + mesh.periodic.pinned_node], 0.0, 1e-14);
}

TEST(MicroSolver, TangentMatchesFiniteDifferences) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  MicroSolveOptions opts;
  opts.tol = 1e-12;

  const Strain2D eps_bar{0.013, -0.021, 0.017};
  const MicroSolution sol = solve_micro(mesh, eps_bar, mat, opts);
  ASSERT_TRUE(sol.converged);
  const Tangent3x3 c = fe2_tangent(mesh, sol, mat);

  Tangent3x3 fd;
  const double h = 1e-6;
  for (int j = 0; j < 3; ++j) {
    Eigen::Vector3d vp = eps_bar.voigt(), vm = eps_bar.voigt();
    vp[j] += h;
    vm[j] -= h;
    const MicroSolution sp =
        solve_micro(mesh, Strain2D::from_voigt(vp), mat, opts);
    const MicroSolution sm =
        solve_micro(mesh, Strain2D::from_voigt(vm), mat, opts);
    ASSERT_TRUE(sp.converged && sm.converged);
    fd.col(j) = (homogenize_stress(sp, mesh).voigt() -
                 homogenize_stress(sm, mesh).voigt()) /
                (2.0 * h);
  }
  EXPECT_LT((c - fd).norm(), 1e-3 * c.norm());
  // Symmetry of the condensed tangent (hyperelastic cell).
  EXPECT_LT((c - c.transpose()).norm(), 1e-8 * c.norm());
}

TEST(MicroSolver, WarmStartReproducesSolution) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const Strain2D eps_bar{0.03, 0.01, -0.02};
  const MicroSolution cold = solve_micro(mesh, eps_bar, mat);
  ASSERT_TRUE(cold.converged);

  MicroSolveOptions opts;
  opts.warm_start = &cold.fluct_reduced;
  const MicroSolution warm = solve_micro(mesh, eps_bar, mat, opts);
  ASSERT_TRUE(warm.converged);
  EXPECT_LE(warm.newton_iters, cold.newton_iters);
  EXPECT_LT(rel3(homogenize_stress(warm, mesh).voigt(),
                 homogenize_stress(cold, mesh).voigt()),
            1e-9);
}

TEST(MicroSolver, NonConvergenceIsReported) {
  // Heterogeneous cell: the first Newton iterate cannot satisfy a tight
  // tolerance, so a one-iteration budget must fail loudly.
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  MicroSolveOptions opts;
  opts.max_iter = 1;
  const MicroSolution sol = solve_micro(mesh, {0.3, 0.2, 0.25}, mat, opts);
  EXPECT_FALSE(sol.converged);
  EXPECT_FALSE(sol.diagnostics.empty());
}

TEST(Snapshots, ColumnsMatchSingleSolves) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  SampleSet set;
  set.samples.resize(3, 3);
  set.samples << 0.01, -0.02, 0.015,
                 -0.005, 0.004, -0.01,
                 0.01, -0.02, 0.015;  // duplicate of row 0
  set.magnitude = 0.04;
  set.seed = 42;

  const SnapshotMatrix snap = generate_snapshots(mesh, set, mat);
  ASSERT_EQ(snap.U.cols(), 3);
  ASSERT_EQ(snap.strains.rows(), 3);
  EXPECT_TRUE(snap.failed_indices.empty());
  EXPECT_EQ(snap.mesh_hash, mesh.hash);
  EXPECT_EQ(snap.U.rows(), 2 * mesh.n_nodes());

  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(snap.sample_indices[static_cast<std::size_t>(i)], i);
    const MicroSolution sol = solve_micro(mesh, set.strain(i), mat);
    ASSERT_TRUE(sol.converged);
    EXPECT_TRUE((snap.U.col(i).array() == sol.u.array()).all());
    EXPECT_TRUE(
        (snap.strains.row(i).transpose().array() ==
         set.strain(i).voigt().array())
            .all());
  }
  // Duplicate samples produce identical columns.
  EXPECT_TRUE((snap.U.col(0).array() == snap.U.col(2).array()).all());
}

TEST(Snapshots, FailedSamplesAreExcluded) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  SampleSet set;
  set.samples.resize(2, 3);
  set.samples << 0.01, 0.0, 0.0,
                 0.02, 0.0, 0.01;
  set.magnitude = 0.04;
  // Unreachable tolerance forces every Newton solve to fail.
  const SnapshotMatrix snap = generate_snapshots(mesh, set, mat, 1e-300);
  EXPECT_EQ(snap.U.cols(), 0);
  EXPECT_EQ(static_cast<int>(snap.failed_indices.size()), 2);
}

TEST(AffineDisplacement, ShearSplitsSymmetrically) {
  const Strain2D eps{0.0, 0.0, 0.02};
  const Eigen::Vector2d u = affine_displacement(eps, {1.0, 2.0});
  EXPECT_DOUBLE_EQ(u.x(), 0.01 * 2.0);
  EXPECT_DOUBLE_EQ(u.y(), 0.01 * 1.0);
  const Strain2D ax{0.01, -0.02, 0.0};
  const Eigen::Vector2d v = affine_displacement(ax, {3.0, 4.0});
  EXPECT_DOUBLE_EQ(v.x(), 0.03);
  EXPECT_DOUBLE_EQ(v.y(), -0.08);
}

}  // namespace
}  // namespace hyperfe
