#ifndef HYPERFE_MACRO_HPP
#define HYPERFE_MACRO_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/mechanics.hpp"
#include "hyperfe/quad4.hpp"

namespace hyperfe {

// Per-Gauss-point scratch a micro evaluator may use across Newton iterations
// (the reference cell solver warm-starts from the previous converged
// fluctuation). Owned by the macro solver, one per Gauss point.
struct GpState {
  Eigen::VectorXd fluct;
  bool valid = false;
};

// Pluggable micro model: macroscale strain in, homogenized stress and
// consistent tangent out. Implementations must be pure w.r.t. their own
// members so Gauss points can be evaluated concurrently; any mutable scratch
// lives in the caller-owned GpState.
class MicroEvaluator {
 public:
  struct Result {
    Stress2D sigma;
    Tangent3x3 tangent = Tangent3x3::Zero();
  };

  virtual ~MicroEvaluator() = default;
  virtual Result evaluate(const Strain2D& eps_bar) const = 0;
  virtual Result evaluate(const Strain2D& eps_bar, GpState&) const {
    return evaluate(eps_bar);
  }
  virtual std::string name() const = 0;
};

// Plane-strain macro problem on bilinear quads with 2x2 Gauss quadrature.
// DOFs are stacked [d_x(all nodes); d_y(all nodes)]; Dirichlet values are
// homogeneous. f_ext holds the consistent nodal loads at full load.
struct MacroCase {
  std::string name;
  Eigen::MatrixX2d nodes;
  Eigen::MatrixX4i elements;
  std::vector<GaussPointGeom> gauss;  // 4 per element
  std::vector<int> fixed_dofs;
  Eigen::VectorXd f_ext;
  int load_steps = 5;

  int n_nodes() const { return static_cast<int>(nodes.rows()); }
  int n_elements() const { return static_cast<int>(elements.rows()); }
  int n_gauss() const { return 4 * n_elements(); }
  int n_dofs() const { return 2 * n_nodes(); }
};

// Benchmark geometries. `resolution` controls mesh density: the tapered
// Cook's membrane panel (corners (0,0), (48,44), (48,60), (0,44) mm, left
// edge clamped, upward shear traction on the right edge) uses a resolution x
// resolution grid; the L-profile (100x100 mm outline, 50 mm legs, top end of
// the vertical leg clamped, downward traction on the right end face) uses
// three resolution x resolution blocks. `load_scale` multiplies the built-in
// traction, which is sized to keep Gauss-point strains within the surrogate
// sampling box.
MacroCase build_macro_case(const std::string& name, int resolution,
                           double load_scale = 1.0);

struct MacroSolveOptions {
  double tol = 1e-8;   // residual inf-norm relative to the first iterate
  int max_iter = 20;   // per load step
  double abs_floor = 1e-10;  // declares tiny first residuals converged
  // When > 0, Gauss strains with any |component| beyond this are counted as
  // extrapolation and noted in the log (warning, not an error).
  double strain_range = 0.0;
};

struct MacroSolution {
  Eigen::VectorXd d;      // stacked nodal displacements
  Eigen::MatrixXd eps_q;  // n_gauss x 3 at final state
  Eigen::MatrixXd sig_q;  // n_gauss x 4 at final state
  bool converged = false;
  std::vector<int> iters_per_step;
  std::vector<double> step_residuals;  // final relative residual per step
  long micro_evals = 0;
  int extrapolation_count = 0;
  double time_micro = 0.0;     // seconds inside evaluator calls
  double time_assembly = 0.0;  // scatter/gather outside the evaluator
  double time_solve = 0.0;     // sparse factorizations + back-substitutions
  double time_total = 0.0;
  std::string log;
};

// Incremental-load Newton solve. Non-convergence returns the partial state
// with converged = false and diagnostics in log; an evaluator exception is
// rethrown with the offending element/Gauss location.
MacroSolution macro_newton_solve(const MacroCase& problem,
                                 const MicroEvaluator& evaluator,
                                 const MacroSolveOptions& opts = {});

// ||a - b||_2 / ||b||_2. Throws if sizes differ or ||b|| == 0.
double relative_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct BenchmarkRow {
  std::string case_name;
  int n_samples = 0;  // training-set size behind the hybrid model (reporting)
  double err_dx = 0.0, err_dy = 0.0;
  double err_sxx = 0.0, err_syy = 0.0, err_txy = 0.0;
  double time_reference = 0.0, time_hybrid = 0.0, speedup = 0.0;
  bool reference_converged = false, hybrid_converged = false;
};

// Solves the case with both evaluators and reports field errors
// (hybrid vs reference) plus the wall-clock ratio.
BenchmarkRow benchmark_case(const MacroCase& problem,
                            const MicroEvaluator& reference,
                            const MicroEvaluator& hybrid,
                            const MacroSolveOptions& opts = {});

// Field errors between two solutions of the same case: nodal d_x, d_y and
// quadrature sigma_xx, sigma_yy, tau_xy.
void fill_error_columns(BenchmarkRow& row, const MacroSolution& hybrid,
                        const MacroSolution& reference, int n_nodes);

}  // namespace hyperfe

#endif
