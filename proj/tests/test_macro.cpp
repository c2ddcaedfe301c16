#include "hyperfe/macro.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include <Eigen/Sparse>

#include "hyperfe/evaluators.hpp"
#include "hyperfe/rng.hpp"

namespace hyperfe {
namespace {

bool has_node(const MacroCase& c, double x, double y) {
  for (int i = 0; i < c.n_nodes(); ++i)
    if (std::abs(c.nodes(i, 0) - x) < 1e-9 && std::abs(c.nodes(i, 1) - y) < 1e-9)
      return true;
  return false;
}

TEST(MacroCase, CooksGeometry) {
  const MacroCase c = build_macro_case("cooks_membrane", 6);
  EXPECT_EQ(c.n_elements(), 36);
  EXPECT_EQ(c.n_nodes(), 49);
  EXPECT_TRUE(has_node(c, 0, 0));
  EXPECT_TRUE(has_node(c, 48, 44));
  EXPECT_TRUE(has_node(c, 48, 60));
  EXPECT_TRUE(has_node(c, 0, 44));
  EXPECT_NEAR(c.nodes.col(0).minCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(c.nodes.col(0).maxCoeff(), 48.0, 1e-12);

  // Left edge fully clamped: one x and one y DOF per boundary node.
  int n_left = 0;
  for (int i = 0; i < c.n_nodes(); ++i)
    if (std::abs(c.nodes(i, 0)) < 1e-12) ++n_left;
  EXPECT_EQ(n_left, 7);
  EXPECT_EQ(static_cast<int>(c.fixed_dofs.size()), 2 * n_left);

  // Upward shear resultant = traction * edge length; zero x resultant.
  const int nn = c.n_nodes();
  EXPECT_NEAR(c.f_ext.head(nn).sum(), 0.0, 1e-9);
  EXPECT_GT(c.f_ext.tail(nn).sum(), 0.0);
  const MacroCase half = build_macro_case("cooks_membrane", 6, 0.5);
  EXPECT_NEAR(half.f_ext.tail(nn).sum(), 0.5 * c.f_ext.tail(nn).sum(), 1e-9);
}

TEST(MacroCase, LProfileGeometry) {
  const int res = 4;
  const MacroCase c = build_macro_case("l_profile", res);
  EXPECT_EQ(c.n_elements(), 3 * res * res);
  const int n = 2 * res + 1;
  EXPECT_EQ(c.n_nodes(), n * n - res * res);
  EXPECT_TRUE(has_node(c, 0, 0));
  EXPECT_TRUE(has_node(c, 100, 0));
  EXPECT_TRUE(has_node(c, 100, 50));
  EXPECT_TRUE(has_node(c, 50, 100));
  EXPECT_TRUE(has_node(c, 0, 100));
  EXPECT_FALSE(has_node(c, 100, 100));  // removed quadrant

  // Clamp along the top edge of the vertical leg (y = 100, x <= 50).
  EXPECT_EQ(static_cast<int>(c.fixed_dofs.size()), 2 * (res + 1));

  // Downward load on the right end face.
  const int nn = c.n_nodes();
  EXPECT_NEAR(c.f_ext.head(nn).sum(), 0.0, 1e-9);
  EXPECT_LT(c.f_ext.tail(nn).sum(), 0.0);
}

TEST(MacroCase, RefinementScalesElementCount) {
  const MacroCase coarse = build_macro_case("cooks_membrane", 4);
  const MacroCase fine = build_macro_case("cooks_membrane", 8);
  EXPECT_EQ(fine.n_elements(), 4 * coarse.n_elements());
  EXPECT_THROW(build_macro_case("cooks_membrane", 0), std::invalid_argument);
  EXPECT_THROW(build_macro_case("unknown", 4), std::invalid_argument);
}

TEST(MacroSolve, ZeroLoadGivesZeroDisplacement) {
  const MacroCase c = build_macro_case("cooks_membrane", 4, 0.0);
  const LinearElasticEvaluator lin(5000.0, 800.0);
  const MacroSolution sol = macro_newton_solve(c, lin);
  EXPECT_TRUE(sol.converged);
  EXPECT_DOUBLE_EQ(sol.d.norm(), 0.0);
  for (int it : sol.iters_per_step) EXPECT_EQ(it, 0);
}

// Independent oracle: direct assembly of the linear-elastic stiffness and a
// single sparse solve must agree with the Newton driver.
TEST(MacroSolve, LinearEvaluatorMatchesDirectSolve) {
  const MacroCase c = build_macro_case("cooks_membrane", 6);
  const double K = 5000.0, G = 800.0;
  const LinearElasticEvaluator lin(K, G);
  const MacroSolution sol = macro_newton_solve(c, lin);
  ASSERT_TRUE(sol.converged);
  // A linear problem converges in exactly one iteration per step.
  for (int it : sol.iters_per_step) EXPECT_EQ(it, 1);

  const int nd = c.n_dofs();
  const int nn = c.n_nodes();
  std::vector<char> fixed(static_cast<std::size_t>(nd), 0);
  for (int dof : c.fixed_dofs) fixed[static_cast<std::size_t>(dof)] = 1;
  const Tangent3x3 C = linear_tangent(K, G, 1.0);

  std::vector<Eigen::Triplet<double>> trips;
  for (int e = 0; e < c.n_elements(); ++e) {
    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    for (int g = 0; g < 4; ++g) {
      const GaussPointGeom& gp = c.gauss[static_cast<std::size_t>(4 * e + g)];
      const Eigen::Matrix<double, 3, 8> B = b_matrix(gp.dndx);
      ke += gp.wdetj * B.transpose() * C * B;
    }
    int dofs[8];
    for (int a = 0; a < 4; ++a) {
      dofs[a] = c.elements(e, a);
      dofs[4 + a] = nn + c.elements(e, a);
    }
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        if (!fixed[static_cast<std::size_t>(dofs[i])] &&
            !fixed[static_cast<std::size_t>(dofs[j])])
          trips.emplace_back(dofs[i], dofs[j], ke(i, j));
  }
  for (int dof : c.fixed_dofs) trips.emplace_back(dof, dof, 1.0);
  Eigen::SparseMatrix<double> Kmat(nd, nd);
  Kmat.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd f = c.f_ext;
  for (int dof : c.fixed_dofs) f[dof] = 0.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Kmat);
  ASSERT_EQ(ldlt.info(), Eigen::Success);
  const Eigen::VectorXd d_direct = ldlt.solve(f);

  EXPECT_LT(relative_l2_error(sol.d, d_direct), 1e-8);
}

TEST(MacroSolve, DirichletDofsStayZero) {
  const MacroCase c = build_macro_case("l_profile", 2);
  const LinearElasticEvaluator lin(5000.0, 800.0);
  const MacroSolution sol = macro_newton_solve(c, lin);
  ASSERT_TRUE(sol.converged);
  for (int dof : c.fixed_dofs) EXPECT_DOUBLE_EQ(sol.d[dof], 0.0);
  EXPECT_GT(sol.d.norm(), 0.0);
  EXPECT_EQ(sol.eps_q.rows(), c.n_gauss());
  EXPECT_EQ(sol.sig_q.rows(), c.n_gauss());
  EXPECT_GT(sol.micro_evals, 0);
}

TEST(RelativeL2Error, HandCases) {
  Eigen::VectorXd b(3);
  b << 3.0, 0.0, 4.0;
  EXPECT_DOUBLE_EQ(relative_l2_error(b, b), 0.0);
  EXPECT_NEAR(relative_l2_error(1.01 * b, b), 0.01, 1e-12);
  // Scale invariance.
  EXPECT_NEAR(relative_l2_error(1.01 * (10.0 * b), 10.0 * b), 0.01, 1e-12);
  Eigen::VectorXd a(3);
  a << -4.0, 0.0, 3.0;  // orthogonal, same norm
  EXPECT_NEAR(relative_l2_error(a, b), std::sqrt(2.0), 1e-12);
  EXPECT_THROW(relative_l2_error(a, Eigen::VectorXd::Zero(3)),
               std::invalid_argument);
  EXPECT_THROW(relative_l2_error(a, Eigen::VectorXd::Zero(4)),
               std::invalid_argument);
}

// The FE2 evaluator must expose exactly the cell solver's homogenized
// quantities; it only adapts the interface.
TEST(Evaluators, Fe2MatchesMicroSolverPipeline) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const Fe2Evaluator fe2(mesh, mat);
  const Strain2D eps{0.014, -0.026, 0.02};

  const MicroEvaluator::Result res = fe2.evaluate(eps);
  const MicroSolution sol = solve_micro(mesh, eps, mat);
  ASSERT_TRUE(sol.converged);
  const Stress2D want = homogenize_stress(sol, mesh);
  const Tangent3x3 cw = fe2_tangent(mesh, sol, mat);
  EXPECT_LT((res.sigma.voigt() - want.voigt()).norm(), 1e-14 * want.voigt().norm());
  EXPECT_NEAR(res.sigma.sig_zz, want.sig_zz, 1e-12);
  EXPECT_LT((res.tangent - cw).norm(), 1e-14 * cw.norm());
}

TEST(Evaluators, Fe2WarmStartViaGpState) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const Fe2Evaluator fe2(mesh, mat);
  const Strain2D eps{0.02, 0.01, -0.015};

  GpState state;
  const MicroEvaluator::Result cold = fe2.evaluate(eps, state);
  EXPECT_TRUE(state.valid);
  EXPECT_GT(state.fluct.size(), 0);
  const MicroEvaluator::Result warm = fe2.evaluate(eps, state);
  EXPECT_LT((warm.sigma.voigt() - cold.sigma.voigt()).norm(),
            1e-9 * cold.sigma.voigt().norm());
}

TEST(Evaluators, Fe2ThrowsWithDiagnosticsOnFailure) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const Fe2Evaluator fe2(mesh, mat, 1e-300, 3);  // unreachable tolerance
  EXPECT_THROW(fe2.evaluate({0.01, 0.0, 0.0}), std::runtime_error);
}

TEST(Evaluators, SurrogateWrapsModel) {
  const RveMesh mesh = build_rve_mesh(8, 0.55, 1.0);
  const MaterialParams mat;
  const SnapshotMatrix snap =
      generate_snapshots(mesh, lhs_sample(10, 0.04, 2), mat);
  const PodBasis basis = compute_pod(snap, 4);
  BranchNet net = BranchNet::create(4, 8, 2, 3);
  net.in_scale = Eigen::Vector3d::Constant(0.02);
  net.out_scale = Eigen::VectorXd::Constant(4, 1e-3);
  net.out_mean = Eigen::VectorXd::Zero(4);
  const SurrogateModel model = build_surrogate(mesh, basis, net, mat);
  const SurrogateEvaluator hybrid(model);
  EXPECT_EQ(hybrid.name(), "hybrid");

  const Strain2D eps{0.01, -0.02, 0.015};
  const MicroEvaluator::Result res = hybrid.evaluate(eps);
  const MicroPrediction pred = surrogate_predict(model, eps);
  EXPECT_LT((res.sigma.voigt() - pred.sigma_bar.voigt()).norm(), 1e-12);
  EXPECT_LT((res.tangent - pred.tangent).norm(), 1e-12 * (1.0 + pred.tangent.norm()));
}

TEST(MacroSolve, ExtrapolationIsCountedAndLogged) {
  const MacroCase c = build_macro_case("cooks_membrane", 3);
  const LinearElasticEvaluator lin(5000.0, 800.0);
  MacroSolveOptions opts;
  opts.strain_range = 1e-12;  // everything counts as out-of-range
  const MacroSolution sol = macro_newton_solve(c, lin, opts);
  ASSERT_TRUE(sol.converged);
  EXPECT_GT(sol.extrapolation_count, 0);
  EXPECT_NE(sol.log.find("extrapolat"), std::string::npos);

  const MacroSolution clean = macro_newton_solve(c, lin);
  EXPECT_EQ(clean.extrapolation_count, 0);
}

class ZeroEvaluator : public MicroEvaluator {
 public:
  Result evaluate(const Strain2D&) const override { return {}; }
  std::string name() const override { return "zero"; }
};

TEST(MacroSolve, SingularTangentReportsNonConvergence) {
  const MacroCase c = build_macro_case("cooks_membrane", 3);
  const ZeroEvaluator zero;
  const MacroSolution sol = macro_newton_solve(c, zero);
  EXPECT_FALSE(sol.converged);
  EXPECT_NE(sol.log.find("singular"), std::string::npos);
  EXPECT_EQ(sol.d.size(), c.n_dofs());  // partial state still returned
}

class ThrowingEvaluator : public MicroEvaluator {
 public:
  Result evaluate(const Strain2D&) const override {
    throw std::runtime_error("cell problem did not converge");
  }
  std::string name() const override { return "throwing"; }
};

TEST(MacroSolve, EvaluatorErrorsCarryLocation) {
  const MacroCase c = build_macro_case("cooks_membrane", 3);
  const ThrowingEvaluator bad;
  try {
    macro_newton_solve(c, bad);
    FAIL() << "expected rethrow";
  } catch (const std::runtime_error& ex) {
    const std::string msg = ex.what();
    EXPECT_NE(msg.find("element"), std::string::npos) << msg;
    EXPECT_NE(msg.find("cell problem did not converge"), std::string::npos);
  }
}

TEST(Benchmark, IdenticalEvaluatorsGiveZeroErrors) {
  const MacroCase c = build_macro_case("cooks_membrane", 4);
  const LinearElasticEvaluator lin(5000.0, 800.0);
  const BenchmarkRow row = benchmark_case(c, lin, lin);
  EXPECT_TRUE(row.reference_converged);
  EXPECT_TRUE(row.hybrid_converged);
  EXPECT_DOUBLE_EQ(row.err_dx, 0.0);
  EXPECT_DOUBLE_EQ(row.err_dy, 0.0);
  EXPECT_DOUBLE_EQ(row.err_sxx, 0.0);
  EXPECT_DOUBLE_EQ(row.err_syy, 0.0);
  EXPECT_DOUBLE_EQ(row.err_txy, 0.0);
  EXPECT_GT(row.speedup, 0.0);
  EXPECT_EQ(row.case_name, "cooks_membrane");
}

TEST(Benchmark, DifferentStiffnessShowsNonzeroError) {
  const MacroCase c = build_macro_case("cooks_membrane", 4);
  const LinearElasticEvaluator ref(5000.0, 800.0);
  const LinearElasticEvaluator softer(5000.0, 700.0);
  const BenchmarkRow row = benchmark_case(c, ref, softer);
  EXPECT_GT(row.err_dy, 0.0);
  EXPECT_GT(row.err_txy, 0.0);
}

}  // namespace
}  // namespace hyperfe
