#include "hyperfe/macro.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Sparse>

namespace hyperfe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Bilinear blend of four corner points over a unit-square grid.
MacroCase quad_patch(const std::string& name,
                     const Eigen::Matrix<double, 4, 2>& corners, int res) {
  MacroCase c;
  c.name = name;
  const int n = res + 1;
  c.nodes.resize(n * n, 2);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double xi = static_cast<double>(i) / res;
      const double eta = static_cast<double>(j) / res;
      const Eigen::RowVector2d p =
          (1 - xi) * (1 - eta) * corners.row(0) +
          xi * (1 - eta) * corners.row(1) + xi * eta * corners.row(2) +
          (1 - xi) * eta * corners.row(3);
      c.nodes.row(j * n + i) = p;
    }
  }
  c.elements.resize(res * res, 4);
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const int a = j * n + i;
      c.elements.row(j * res + i) << a, a + 1, a + n + 1, a + n;
    }
  }
  return c;
}

void fix_node(MacroCase& c, int node) {
  c.fixed_dofs.push_back(node);
  c.fixed_dofs.push_back(c.n_nodes() + node);
}

// Consistent nodal loads for a constant traction along the polyline of
// boundary nodes given in order.
void add_edge_traction(MacroCase& c, const std::vector<int>& edge_nodes,
                       const Eigen::Vector2d& traction) {
  for (std::size_t s = 0; s + 1 < edge_nodes.size(); ++s) {
    const int a = edge_nodes[s];
    const int b = edge_nodes[s + 1];
    const double len = (c.nodes.row(b) - c.nodes.row(a)).norm();
    for (int node : {a, b}) {
      c.f_ext[node] += 0.5 * len * traction.x();
      c.f_ext[c.n_nodes() + node] += 0.5 * len * traction.y();
    }
  }
}

MacroCase build_cooks(int res, double load_scale) {
  Eigen::Matrix<double, 4, 2> corners;
  corners << 0.0, 0.0, 48.0, 44.0, 48.0, 60.0, 0.0, 44.0;
  MacroCase c = quad_patch("cooks_membrane", corners, res);
  c.gauss = precompute_quadrature(c.nodes, c.elements);
  c.f_ext = Eigen::VectorXd::Zero(c.n_dofs());

  const int n = res + 1;
  std::vector<int> right;
  for (int j = 0; j < n; ++j) {
    fix_node(c, j * n + 0);
    right.push_back(j * n + (n - 1));
  }
  // Upward shear on the right edge; the default keeps Gauss strains inside
  // the surrogate sampling box at the benchmark resolution.
  add_edge_traction(c, right, {0.0, 16.0 * load_scale});
  return c;
}

MacroCase build_l_profile(int res, double load_scale) {
  MacroCase c;
  c.name = "l_profile";
  const int n = 2 * res + 1;  // grid over [0,100]^2, 50 mm legs
  const double h = 100.0 / (2 * res);

  std::vector<int> id(static_cast<std::size_t>(n * n), -1);
  std::vector<double> xs, ys;
  int count = 0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (i <= res || j <= res) {  // outside the removed upper-right quadrant
        id[static_cast<std::size_t>(j * n + i)] = count++;
        xs.push_back(i * h);
        ys.push_back(j * h);
      }
    }
  }
  c.nodes.resize(count, 2);
  for (int k = 0; k < count; ++k) c.nodes.row(k) << xs[static_cast<std::size_t>(k)], ys[static_cast<std::size_t>(k)];

  std::vector<Eigen::Vector4i> elems;
  for (int j = 0; j < 2 * res; ++j) {
    for (int i = 0; i < 2 * res; ++i) {
      if (i >= res && j >= res) continue;  // removed quadrant
      const auto nid = [&](int ii, int jj) {
        return id[static_cast<std::size_t>(jj * n + ii)];
      };
      elems.emplace_back(nid(i, j), nid(i + 1, j), nid(i + 1, j + 1),
                         nid(i, j + 1));
    }
  }
  c.elements.resize(static_cast<Eigen::Index>(elems.size()), 4);
  for (std::size_t e = 0; e < elems.size(); ++e)
    c.elements.row(static_cast<Eigen::Index>(e)) = elems[e].transpose();

  c.gauss = precompute_quadrature(c.nodes, c.elements);
  c.f_ext = Eigen::VectorXd::Zero(c.n_dofs());

  // Clamp the top end of the vertical leg; pull the end face of the
  // horizontal leg downward.
  std::vector<int> tip;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int node = id[static_cast<std::size_t>(j * n + i)];
      if (node < 0) continue;
      if (j == n - 1) fix_node(c, node);
      if (i == n - 1) tip.push_back(node);  // ordered by increasing y
    }
  }
  add_edge_traction(c, tip, {0.0, -6.0 * load_scale});
  return c;
}

}  // namespace

MacroCase build_macro_case(const std::string& name, int resolution,
                           double load_scale) {
  if (resolution < 1)
    throw std::invalid_argument("build_macro_case: resolution must be >= 1");
  if (name == "cooks_membrane") return build_cooks(resolution, load_scale);
  if (name == "l_profile") return build_l_profile(resolution, load_scale);
  throw std::invalid_argument("build_macro_case: unknown case '" + name + "'");
}

namespace {

struct Assembly {
  Eigen::VectorXd f_int;
  Eigen::SparseMatrix<double> k;
  Eigen::MatrixXd eps_q;  // n_gauss x 3
  Eigen::MatrixXd sig_q;  // n_gauss x 4
};

void assemble(const MacroCase& problem, const MicroEvaluator& evaluator,
              const Eigen::VectorXd& d, std::vector<GpState>& states,
              const MacroSolveOptions& opts, MacroSolution& sol,
              Assembly& out) {
  const int nn = problem.n_nodes();
  const int ndof = problem.n_dofs();
  out.f_int = Eigen::VectorXd::Zero(ndof);
  out.eps_q.resize(problem.n_gauss(), 3);
  out.sig_q.resize(problem.n_gauss(), 4);

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(problem.n_elements()) * 64);

  const auto t_assembly = Clock::now();
  double micro_acc = 0.0;
  for (int e = 0; e < problem.n_elements(); ++e) {
    std::array<int, 8> dofs{};
    Eigen::Matrix<double, 8, 1> de;
    for (int a = 0; a < 4; ++a) {
      const int node = problem.elements(e, a);
      dofs[static_cast<std::size_t>(a)] = node;
      dofs[static_cast<std::size_t>(4 + a)] = nn + node;
      de[a] = d[node];
      de[4 + a] = d[nn + node];
    }
    Eigen::Matrix<double, 8, 1> fe = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    for (int g = 0; g < 4; ++g) {
      const int q = 4 * e + g;
      const GaussPointGeom& gp = problem.gauss[static_cast<std::size_t>(q)];
      const Eigen::Matrix<double, 3, 8> b = b_matrix(gp.dndx);
      const Eigen::Vector3d eps = b * de;
      if (opts.strain_range > 0.0 &&
          eps.cwiseAbs().maxCoeff() > opts.strain_range)
        ++sol.extrapolation_count;

      MicroEvaluator::Result r;
      const auto t_micro = Clock::now();
      try {
        r = evaluator.evaluate(Strain2D::from_voigt(eps),
                               states[static_cast<std::size_t>(q)]);
      } catch (const std::exception& ex) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "micro evaluation failed at element %d, gauss point %d "
                      "(eps = %.6g, %.6g, %.6g): ",
                      e, g, eps[0], eps[1], eps[2]);
        throw std::runtime_error(std::string(buf) + ex.what());
      }
      micro_acc += seconds_since(t_micro);
      ++sol.micro_evals;

      out.eps_q.row(q) = eps.transpose();
      out.sig_q.row(q) << r.sigma.sig_xx, r.sigma.sig_yy, r.sigma.tau_xy,
          r.sigma.sig_zz;
      fe.noalias() += gp.wdetj * (b.transpose() * r.sigma.voigt());
      ke.noalias() += gp.wdetj * (b.transpose() * r.tangent * b);
    }
    for (int i = 0; i < 8; ++i) {
      out.f_int[dofs[static_cast<std::size_t>(i)]] += fe[i];
      for (int j = 0; j < 8; ++j)
        trips.emplace_back(dofs[static_cast<std::size_t>(i)],
                           dofs[static_cast<std::size_t>(j)], ke(i, j));
    }
  }
  out.k.resize(ndof, ndof);
  out.k.setFromTriplets(trips.begin(), trips.end());
  sol.time_micro += micro_acc;
  sol.time_assembly += seconds_since(t_assembly) - micro_acc;
}

void mask_dirichlet(const MacroCase& problem, Eigen::VectorXd& r,
                    Eigen::SparseMatrix<double>& k) {
  for (int dof : problem.fixed_dofs) r[dof] = 0.0;
  // Zero constrained rows/columns, unit diagonal.
  std::vector<char> fixed(static_cast<std::size_t>(problem.n_dofs()), 0);
  for (int dof : problem.fixed_dofs) fixed[static_cast<std::size_t>(dof)] = 1;
  for (int col = 0; col < k.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(k, col); it; ++it) {
      const bool constrained = fixed[static_cast<std::size_t>(it.row())] ||
                               fixed[static_cast<std::size_t>(col)];
      if (constrained) it.valueRef() = (it.row() == col) ? 1.0 : 0.0;
    }
  }
}

void log_line(MacroSolution& sol, const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  sol.log += buf;
  sol.log += '\n';
}

}  // namespace

MacroSolution macro_newton_solve(const MacroCase& problem,
                                 const MicroEvaluator& evaluator,
                                 const MacroSolveOptions& opts) {
  const auto t_total = Clock::now();
  MacroSolution sol;
  sol.d = Eigen::VectorXd::Zero(problem.n_dofs());
  std::vector<GpState> states(static_cast<std::size_t>(problem.n_gauss()));

  Assembly asmb;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  sol.converged = true;

  for (int step = 1; step <= problem.load_steps; ++step) {
    const double lambda =
        static_cast<double>(step) / static_cast<double>(problem.load_steps);
    const Eigen::VectorXd f_target = lambda * problem.f_ext;

    assemble(problem, evaluator, sol.d, states, opts, sol, asmb);
    Eigen::VectorXd r = f_target - asmb.f_int;
    mask_dirichlet(problem, r, asmb.k);
    const double r0 = r.lpNorm<Eigen::Infinity>();
    double rel = 1.0;
    int iters = 0;
    bool step_ok = r0 <= opts.abs_floor;
    if (step_ok) rel = 0.0;

    while (!step_ok && iters < opts.max_iter) {
      const auto t_solve = Clock::now();
      lu.compute(asmb.k);
      if (lu.info() != Eigen::Success) {
        log_line(sol, "step %d: singular tangent at iteration %d", step,
                 iters + 1);
        sol.time_solve += seconds_since(t_solve);
        break;
      }
      const Eigen::VectorXd delta = lu.solve(r);
      sol.time_solve += seconds_since(t_solve);
      sol.d += delta;
      ++iters;

      assemble(problem, evaluator, sol.d, states, opts, sol, asmb);
      r = f_target - asmb.f_int;
      mask_dirichlet(problem, r, asmb.k);
      const double rn = r.lpNorm<Eigen::Infinity>();
      rel = rn / r0;
      if (rel <= opts.tol || rn <= opts.abs_floor) step_ok = true;
    }

    sol.iters_per_step.push_back(iters);
    sol.step_residuals.push_back(rel);
    log_line(sol, "step %d/%d: %d iterations, relative residual %.3e", step,
             problem.load_steps, iters, rel);
    if (!step_ok) {
      sol.converged = false;
      log_line(sol, "step %d: no convergence within %d iterations", step,
               opts.max_iter);
      break;
    }
  }

  if (sol.extrapolation_count > 0)
    log_line(sol,
             "warning: extrapolation at %d Gauss evaluations beyond the "
             "training strain range (|eps| > %.4g)",
             sol.extrapolation_count, opts.strain_range);

  sol.eps_q = asmb.eps_q;
  sol.sig_q = asmb.sig_q;
  sol.time_total = seconds_since(t_total);
  return sol;
}

double relative_l2_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("relative_l2_error: length mismatch");
  const double nb = b.norm();
  if (!(nb > 0.0))
    throw std::invalid_argument("relative_l2_error: zero reference norm");
  return (a - b).norm() / nb;
}

void fill_error_columns(BenchmarkRow& row, const MacroSolution& hybrid,
                        const MacroSolution& reference, int n_nodes) {
  row.err_dx = relative_l2_error(hybrid.d.head(n_nodes),
                                 reference.d.head(n_nodes));
  row.err_dy = relative_l2_error(hybrid.d.tail(n_nodes),
                                 reference.d.tail(n_nodes));
  row.err_sxx = relative_l2_error(hybrid.sig_q.col(0), reference.sig_q.col(0));
  row.err_syy = relative_l2_error(hybrid.sig_q.col(1), reference.sig_q.col(1));
  row.err_txy = relative_l2_error(hybrid.sig_q.col(2), reference.sig_q.col(2));
}

BenchmarkRow benchmark_case(const MacroCase& problem,
                            const MicroEvaluator& reference,
                            const MicroEvaluator& hybrid,
                            const MacroSolveOptions& opts) {
  BenchmarkRow row;
  row.case_name = problem.name;
  const MacroSolution ref = macro_newton_solve(problem, reference, opts);
  const MacroSolution hyb = macro_newton_solve(problem, hybrid, opts);
  row.reference_converged = ref.converged;
  row.hybrid_converged = hyb.converged;
  row.time_reference = ref.time_total;
  row.time_hybrid = hyb.time_total;
  row.speedup = hyb.time_total > 0.0 ? ref.time_total / hyb.time_total : 0.0;
  fill_error_columns(row, hyb, ref, problem.n_nodes());
  return row;
}

}  // namespace hyperfe
