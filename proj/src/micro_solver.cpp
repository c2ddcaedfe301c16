#include "hyperfe/micro_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <thread>

namespace hyperfe {

namespace {

// Reduced DOF numbering for the condensed periodic system: two unknowns per
// independent non-pinned node. block[i] is valid for slaves as well (it
// resolves through the master), -1 marks the pinned corner family.
struct ReducedDofs {
  std::vector<int> block;
  int n_blocks = 0;
  int n_dofs() const { return 2 * n_blocks; }
};

ReducedDofs build_reduced(const RveMesh& mesh) {
  const int n = mesh.n_nodes();
  ReducedDofs red;
  red.block.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (mesh.periodic.master[static_cast<std::size_t>(i)] == i &&
        i != mesh.periodic.pinned_node)
      red.block[static_cast<std::size_t>(i)] = red.n_blocks++;
  }
  for (int i = 0; i < n; ++i) {
    const int m = mesh.periodic.master[static_cast<std::size_t>(i)];
    if (m != i) red.block[static_cast<std::size_t>(i)] = red.block[static_cast<std::size_t>(m)];
  }
  return red;
}

// Total nodal displacement (stacked x-then-y) for a reduced fluctuation v.
Eigen::VectorXd total_displacement(const RveMesh& mesh, const ReducedDofs& red,
                                   const Strain2D& eps_bar,
                                   const Eigen::VectorXd& v) {
  const int m = mesh.n_nodes();
  Eigen::VectorXd u(2 * m);
  for (int i = 0; i < m; ++i) {
    const Eigen::Vector2d ua = affine_displacement(eps_bar, mesh.nodes.row(i));
    const int b = red.block[static_cast<std::size_t>(i)];
    u[i] = ua[0] + (b >= 0 ? v[2 * b] : 0.0);
    u[m + i] = ua[1] + (b >= 0 ? v[2 * b + 1] : 0.0);
  }
  return u;
}

void compute_fields(const RveMesh& mesh, const MaterialParams& mat,
                    const Eigen::VectorXd& u, Eigen::MatrixXd& eps_q,
                    Eigen::MatrixXd& sig_q) {
  const int m = mesh.n_nodes();
  eps_q.resize(mesh.n_gauss(), 3);
  sig_q.resize(mesh.n_gauss(), 4);
  for (int e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 8, 1> ue;
    for (int a = 0; a < 4; ++a) {
      ue[a] = u[mesh.elements(e, a)];
      ue[4 + a] = u[m + mesh.elements(e, a)];
    }
    const Phase ph = mesh.phase[static_cast<std::size_t>(e)];
    for (int q = 0; q < 4; ++q) {
      const int g = 4 * e + q;
      const Eigen::Vector3d eps =
          b_matrix(mesh.gauss[static_cast<std::size_t>(g)].dndx) * ue;
      eps_q.row(g) = eps;
      const Stress2D s = evaluate_stress(Strain2D::from_voigt(eps), ph, mat);
      sig_q.row(g) << s.sig_xx, s.sig_yy, s.tau_xy, s.sig_zz;
    }
  }
}

// Assemble the reduced residual and, optionally, the reduced tangent at the
// state described by the quadrature strains/stresses.
void assemble(const RveMesh& mesh, const ReducedDofs& red,
              const MaterialParams& mat, const Eigen::MatrixXd& eps_q,
              const Eigen::MatrixXd& sig_q, Eigen::VectorXd& residual,
              Eigen::SparseMatrix<double>* stiffness) {
  residual.setZero(red.n_dofs());
  std::vector<Eigen::Triplet<double>> trips;
  if (stiffness) trips.reserve(static_cast<std::size_t>(mesh.n_elements()) * 64);

  for (int e = 0; e < mesh.n_elements(); ++e) {
    Eigen::Matrix<double, 8, 1> re = Eigen::Matrix<double, 8, 1>::Zero();
    Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
    const Phase ph = mesh.phase[static_cast<std::size_t>(e)];
    for (int q = 0; q < 4; ++q) {
      const int g = 4 * e + q;
      const auto& gp = mesh.gauss[static_cast<std::size_t>(g)];
      const Eigen::Matrix<double, 3, 8> b = b_matrix(gp.dndx);
      re += gp.wdetj * b.transpose() * sig_q.row(g).head<3>().transpose();
      if (stiffness) {
        const Tangent3x3 c =
            material_tangent(Strain2D::from_voigt(eps_q.row(g)), ph, mat);
        ke += gp.wdetj * b.transpose() * c * b;
      }
    }
    int gdof[8];
    for (int a = 0; a < 4; ++a) {
      const int b = red.block[static_cast<std::size_t>(mesh.elements(e, a))];
      gdof[a] = b >= 0 ? 2 * b : -1;
      gdof[4 + a] = b >= 0 ? 2 * b + 1 : -1;
    }
    for (int l = 0; l < 8; ++l) {
      if (gdof[l] < 0) continue;
      residual[gdof[l]] += re[l];
      if (stiffness)
        for (int k = 0; k < 8; ++k)
          if (gdof[k] >= 0) trips.emplace_back(gdof[l], gdof[k], ke(l, k));
    }
  }
  if (stiffness) {
    stiffness->resize(red.n_dofs(), red.n_dofs());
    stiffness->setFromTriplets(trips.begin(), trips.end());
  }
}

}  // namespace

Eigen::Vector2d affine_displacement(const Strain2D& eps_bar,
                                    const Eigen::Vector2d& x) {
  return {eps_bar.eps_xx * x[0] + 0.5 * eps_bar.gamma_xy * x[1],
          eps_bar.eps_yy * x[1] + 0.5 * eps_bar.gamma_xy * x[0]};
}

MicroSolution solve_micro(const RveMesh& mesh, const Strain2D& eps_bar,
                          const MaterialParams& mat,
                          const MicroSolveOptions& opts) {
  if (!(opts.tol > 0.0))
    throw std::invalid_argument("solve_micro: tol must be > 0");
  const ReducedDofs red = build_reduced(mesh);

  MicroSolution sol;
  Eigen::VectorXd v;
  if (opts.warm_start && opts.warm_start->size() == red.n_dofs())
    v = *opts.warm_start;
  else
    v = Eigen::VectorXd::Zero(red.n_dofs());

  Eigen::SparseMatrix<double> k;
  Eigen::VectorXd r;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  bool pattern_done = false;

  for (int iter = 0;; ++iter) {
    sol.u = total_displacement(mesh, red, eps_bar, v);
    compute_fields(mesh, mat, sol.u, sol.eps_q, sol.sig_q);
    assemble(mesh, red, mat, sol.eps_q, sol.sig_q, r, &k);
    sol.residual_norm = r.size() ? r.lpNorm<Eigen::Infinity>() : 0.0;
    if (sol.residual_norm <= opts.tol) {
      sol.converged = true;
      break;
    }
    if (iter >= opts.max_iter) {
      sol.diagnostics = "no convergence after " + std::to_string(iter) +
                        " iterations, residual inf-norm " +
                        std::to_string(sol.residual_norm);
      break;
    }
    if (!pattern_done) {
      ldlt.analyzePattern(k);
      pattern_done = true;
    }
    ldlt.factorize(k);
    if (ldlt.info() != Eigen::Success)
      throw std::runtime_error("solve_micro: singular tangent system");
    v -= ldlt.solve(r);
    ++sol.newton_iters;
  }
  sol.fluct_reduced = std::move(v);
  return sol;
}

Stress2D average_stress(const Eigen::MatrixXd& sig_q, const RveMesh& mesh) {
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  double vol = 0.0;
  for (int g = 0; g < mesh.n_gauss(); ++g) {
    const double w = mesh.gauss[static_cast<std::size_t>(g)].wdetj;
    acc += w * sig_q.row(g).transpose();
    vol += w;
  }
  acc /= vol;
  return {acc[0], acc[1], acc[2], acc[3]};
}

Stress2D homogenize_stress(const MicroSolution& sol, const RveMesh& mesh) {
  if (!sol.converged)
    throw std::runtime_error("homogenize_stress: solution not converged");
  return average_stress(sol.sig_q, mesh);
}

Strain2D average_strain(const MicroSolution& sol, const RveMesh& mesh) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  double vol = 0.0;
  for (int g = 0; g < mesh.n_gauss(); ++g) {
    const double w = mesh.gauss[static_cast<std::size_t>(g)].wdetj;
    acc += w * sol.eps_q.row(g).transpose();
    vol += w;
  }
  acc /= vol;
  return Strain2D::from_voigt(acc);
}

Tangent3x3 fe2_tangent(const RveMesh& mesh, const MicroSolution& sol,
                       const MaterialParams& mat) {
  if (!sol.converged)
    throw std::runtime_error("fe2_tangent: solution not converged");
  const ReducedDofs red = build_reduced(mesh);

  Tangent3x3 c_avg = Tangent3x3::Zero();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, red.n_dofs());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_elements()) * 64);
  double vol = 0.0;

  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Phase ph = mesh.phase[static_cast<std::size_t>(e)];
    int gdof[8];
    for (int a = 0; a < 4; ++a) {
      const int b = red.block[static_cast<std::size_t>(mesh.elements(e, a))];
      gdof[a] = b >= 0 ? 2 * b : -1;
      gdof[4 + a] = b >= 0 ? 2 * b + 1 : -1;
    }
    for (int q = 0; q < 4; ++q) {
      const int g = 4 * e + q;
      const auto& gp = mesh.gauss[static_cast<std::size_t>(g)];
      const Eigen::Matrix<double, 3, 8> b = b_matrix(gp.dndx);
      const Tangent3x3 c =
          material_tangent(Strain2D::from_voigt(sol.eps_q.row(g)), ph, mat);
      c_avg += gp.wdetj * c;
      vol += gp.wdetj;
      const Eigen::Matrix<double, 3, 8> cb = gp.wdetj * c * b;
      const Eigen::Matrix<double, 8, 8> ke =
          gp.wdetj * b.transpose() * c * b;
      for (int l = 0; l < 8; ++l) {
        if (gdof[l] < 0) continue;
        h.col(gdof[l]) += cb.col(l);
        for (int k = 0; k < 8; ++k)
          if (gdof[k] >= 0) trips.emplace_back(gdof[l], gdof[k], ke(l, k));
      }
    }
  }

  Eigen::SparseMatrix<double> k(red.n_dofs(), red.n_dofs());
  k.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("fe2_tangent: singular tangent system");
  const Eigen::MatrixXd x = ldlt.solve(h.transpose());  // n_red x 3
  return (c_avg - h * x) / vol;
}

SnapshotMatrix generate_snapshots(const RveMesh& mesh, const SampleSet& set,
                                  const MaterialParams& mat, double tol,
                                  int threads) {
  const int n = set.size();
  const int m2 = 2 * mesh.n_nodes();
  std::vector<Eigen::VectorXd> columns(static_cast<std::size_t>(n));
  std::vector<char> ok(static_cast<std::size_t>(n), 0);

  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      MicroSolveOptions opts;
      opts.tol = tol;
      const MicroSolution s = solve_micro(mesh, set.strain(i), mat, opts);
      if (s.converged) {
        columns[static_cast<std::size_t>(i)] = s.u;
        ok[static_cast<std::size_t>(i)] = 1;
      }
    }
  };

  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back(work, t * chunk, std::min(n, (t + 1) * chunk));
    for (auto& th : pool) th.join();
  }

  SnapshotMatrix snap;
  snap.L = mesh.domain.L;
  snap.magnitude = set.magnitude;
  snap.seed = set.seed;
  snap.mesh_hash = mesh.hash;
  int n_ok = 0;
  for (int i = 0; i < n; ++i) n_ok += ok[static_cast<std::size_t>(i)];
  snap.U.resize(m2, n_ok);
  snap.strains.resize(n_ok, 3);
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (ok[static_cast<std::size_t>(i)]) {
      snap.U.col(col) = columns[static_cast<std::size_t>(i)];
      snap.strains.row(col) = set.strain(i).voigt().transpose();
      ++col;
      snap.sample_indices.push_back(i);
    } else {
      snap.failed_indices.push_back(i);
    }
  }
  return snap;
}

}  // namespace hyperfe
