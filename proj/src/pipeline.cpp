#include "hyperfe/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <vector>

#include "hyperfe/evaluators.hpp"
#include "hyperfe/hash.hpp"
#include "hyperfe/io.hpp"
#include "hyperfe/macro.hpp"
#include "hyperfe/micro_solver.hpp"
#include "hyperfe/pod.hpp"
#include "hyperfe/surrogate.hpp"
#include "hyperfe/training.hpp"

namespace hyperfe {

namespace {

namespace fs = std::filesystem;

RveMesh build_mesh(const RunConfig& c) {
  return build_rve_mesh(c.rve.n_per_side, c.rve.fiber_fraction, c.rve.L);
}

void ensure_dir(const std::string& path) {
  fs::create_directories(fs::path(path).parent_path());
}

void ensure_results_dir(const RunConfig& c) {
  fs::create_directories(c.results_dir());
}

// Relative l2 error with the degenerate-reference fallback: when the
// reference norm vanishes the absolute error norm is reported instead.
double field_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double nb = b.norm();
  if (nb < 1e-14) return (a - b).norm();
  return (a - b).norm() / nb;
}

// Loads basis + checkpoint and verifies the provenance chain against the
// mesh rebuilt from the config.
SurrogateModel load_surrogate(const RunConfig& c, const RveMesh& mesh) {
  PodBasis basis = read_pod_basis(c.pod_path());
  const Checkpoint ckpt = read_checkpoint(c.checkpoint_path());
  if (basis.mesh_hash != mesh.hash)
    throw std::runtime_error(
        "stale artifacts: POD basis was built on a different RVE mesh");
  if (ckpt.pod_hash != basis.content_hash())
    throw std::runtime_error(
        "stale artifacts: checkpoint was trained on a different POD basis");
  return build_surrogate(mesh, std::move(basis), ckpt.net, c.materials);
}

MacroCase build_case(const RunConfig& c, const std::string& name) {
  int res = c.macro.resolution;
  if (res == 0) res = (name == "l_profile") ? 4 : 6;
  MacroCase problem = build_macro_case(name, res, c.macro.load);
  problem.load_steps = c.macro.steps;
  return problem;
}

MacroSolveOptions solve_options(const RunConfig& c) {
  MacroSolveOptions opts;
  opts.strain_range = c.sampling.magnitude;
  return opts;
}

// Element-averaged quadrature columns for VTK cell data.
Eigen::VectorXd cell_average(const Eigen::MatrixXd& per_gauss, int col) {
  const Eigen::Index ne = per_gauss.rows() / 4;
  Eigen::VectorXd out(ne);
  for (Eigen::Index e = 0; e < ne; ++e)
    out[e] = per_gauss.block(4 * e, col, 4, 1).mean();
  return out;
}

Eigen::MatrixX2d split_displacement(const Eigen::VectorXd& u) {
  const Eigen::Index n = u.size() / 2;
  Eigen::MatrixX2d out(n, 2);
  out.col(0) = u.head(n);
  out.col(1) = u.tail(n);
  return out;
}

void write_field_vtk(const std::string& path, const Eigen::MatrixX2d& nodes,
                     const Eigen::MatrixX4i& elements,
                     const Eigen::VectorXd& u, const Eigen::MatrixXd& eps_q,
                     const Eigen::MatrixXd& sig_q) {
  VtkFields fields;
  fields.point_vectors.emplace_back("displacement", split_displacement(u));
  const char* eps_names[3] = {"eps_xx", "eps_yy", "gamma_xy"};
  for (int j = 0; j < 3; ++j)
    fields.cell_scalars.emplace_back(eps_names[j], cell_average(eps_q, j));
  const char* sig_names[4] = {"sig_xx", "sig_yy", "tau_xy", "sig_zz"};
  for (int j = 0; j < 4; ++j)
    fields.cell_scalars.emplace_back(sig_names[j], cell_average(sig_q, j));
  write_vtk(path, nodes, elements, fields);
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

int cmd_generate(const RunConfig& config) {
  const RveMesh mesh = build_mesh(config);
  std::cout << "rve: " << mesh.n_per_side << "x" << mesh.n_per_side
            << " elements, realized fiber fraction "
            << fmt(mesh.realized_fiber_fraction) << ", mesh hash "
            << hash_to_hex(mesh.hash) << "\n";

  const SampleSet set = lhs_sample(config.sampling.n, config.sampling.magnitude,
                                   config.sampling.seed);
  const SnapshotMatrix snap = generate_snapshots(
      mesh, set, config.materials, 1e-8, config.sampling.threads);

  for (int idx : snap.failed_indices)
    std::cerr << "warning: sample " << idx
              << " did not converge and was excluded\n";
  if (snap.U.cols() == 0) {
    std::cerr << "error: no sample converged\n";
    return 1;
  }

  const std::string snap_path = config.snapshots_path();
  ensure_dir(snap_path);
  const std::string csv_path =
      (fs::path(snap_path).parent_path() / "samples.csv").string();
  write_samples_csv(csv_path, set);
  write_snapshots(snap_path, snap, config.content_hash());
  std::cout << "generated " << snap.U.cols() << "/" << config.sampling.n
            << " snapshots -> " << snap_path << "\n";
  std::cout << "samples -> " << csv_path << "\n";
  return 0;
}

int cmd_train(const RunConfig& config) {
  const RveMesh mesh = build_mesh(config);
  const SnapshotMatrix snap = read_snapshots(config.snapshots_path());
  if (snap.mesh_hash != mesh.hash) {
    std::cerr << "error: snapshots were generated on a different RVE mesh "
                 "(stale artifact)\n";
    return 2;
  }

  PodBasis basis = compute_pod(snap, config.pod.p);
  const std::uint64_t pod_hash = basis.content_hash();
  std::cout << "pod: " << basis.p() << " modes from " << snap.U.cols()
            << " snapshots, content hash " << hash_to_hex(pod_hash) << "\n";

  Eigen::MatrixXd targets(snap.U.cols(), basis.p());
  for (Eigen::Index j = 0; j < snap.U.cols(); ++j)
    targets.row(j) = project(basis, snap.U.col(j)).transpose();

  BranchNet net = BranchNet::create(basis.p(), 64, 4, config.training.seed);
  const Checkpoint ckpt =
      train(std::move(net), snap.strains, targets, config.training, pod_hash);

  const std::string pod_path = config.pod_path();
  const std::string ckpt_path = config.checkpoint_path();
  ensure_dir(pod_path);
  ensure_dir(ckpt_path);
  write_pod_basis(pod_path, basis, config.content_hash());
  write_checkpoint(ckpt_path, ckpt, config.content_hash());
  const std::string loss_path =
      (fs::path(ckpt_path).parent_path() / "loss_history.csv").string();
  write_loss_history_csv(loss_path, ckpt.history);

  std::cout << "train: final train mse " << fmt(ckpt.final_train_mse)
            << ", final validation mse " << fmt(ckpt.final_val_mse)
            << ", best validation mse " << fmt(ckpt.best_val_mse)
            << " at epoch " << ckpt.best_epoch << "\n";
  std::cout << "checkpoint -> " << ckpt_path << "\n";
  std::cout << "pod basis -> " << pod_path << "\n";
  std::cout << "loss history -> " << loss_path << "\n";
  return 0;
}

int cmd_eval_rve(const RunConfig& config, const Strain2D& eps_bar) {
  const RveMesh mesh = build_mesh(config);
  const SurrogateModel model = load_surrogate(config, mesh);

  const double box = config.sampling.magnitude;
  if (eps_bar.voigt().cwiseAbs().maxCoeff() > box)
    std::cerr << "warning: eps_bar lies outside the sampled strain box (|.| > "
              << fmt(box) << "); the surrogate extrapolates\n";

  const MicroSolution ref = solve_micro(mesh, eps_bar, config.materials);
  if (!ref.converged) {
    std::cerr << "error: reference cell solve did not converge: "
              << ref.diagnostics << "\n";
    return 1;
  }
  const MicroPrediction pred = surrogate_predict(model, eps_bar, false);

  struct Entry {
    const char* field;
    double err;
  };
  std::vector<Entry> table = {
      {"u_x", field_error(pred.u_nodes.head(mesh.n_nodes()),
                          ref.u.head(mesh.n_nodes()))},
      {"u_y", field_error(pred.u_nodes.tail(mesh.n_nodes()),
                          ref.u.tail(mesh.n_nodes()))},
      {"eps_xx", field_error(pred.eps_q.col(0), ref.eps_q.col(0))},
      {"eps_yy", field_error(pred.eps_q.col(1), ref.eps_q.col(1))},
      {"gamma_xy", field_error(pred.eps_q.col(2), ref.eps_q.col(2))},
      {"sig_xx", field_error(pred.sig_q.col(0), ref.sig_q.col(0))},
      {"sig_yy", field_error(pred.sig_q.col(1), ref.sig_q.col(1))},
      {"tau_xy", field_error(pred.sig_q.col(2), ref.sig_q.col(2))},
      {"sig_zz", field_error(pred.sig_q.col(3), ref.sig_q.col(3))},
  };

  ensure_results_dir(config);
  const std::string dir = config.results_dir();
  write_field_vtk(dir + "/rve_reference.vtk", mesh.nodes, mesh.elements, ref.u,
                  ref.eps_q, ref.sig_q);
  write_field_vtk(dir + "/rve_surrogate.vtk", mesh.nodes, mesh.elements,
                  pred.u_nodes, pred.eps_q, pred.sig_q);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"field", "relative_l2_error"});
  std::cout << "eps_bar = (" << fmt(eps_bar.eps_xx) << ", "
            << fmt(eps_bar.eps_yy) << ", " << fmt(eps_bar.gamma_xy) << ")\n";
  for (const Entry& e : table) {
    rows.push_back({e.field, fmt(e.err)});
    std::printf("  %-9s %.6e\n", e.field, e.err);
  }
  write_csv(dir + "/rve_errors.csv", rows);
  std::cout << "fields -> " << dir << "/rve_{reference,surrogate}.vtk\n";
  std::cout << "errors -> " << dir << "/rve_errors.csv\n";
  return 0;
}

int cmd_solve(const RunConfig& config, const std::string& evaluator) {
  if (config.macro.case_name == "both") {
    std::cerr << "error: solve needs a single macro.case "
                 "(cooks_membrane or l_profile)\n";
    return 2;
  }
  const RveMesh mesh = build_mesh(config);
  const MacroCase problem = build_case(config, config.macro.case_name);
  const MacroSolveOptions opts = solve_options(config);

  MacroSolution sol;
  if (evaluator == "fe2") {
    const Fe2Evaluator fe2(mesh, config.materials);
    sol = macro_newton_solve(problem, fe2, opts);
  } else if (evaluator == "hybrid") {
    const SurrogateModel model = load_surrogate(config, mesh);
    const SurrogateEvaluator hybrid(model);
    sol = macro_newton_solve(problem, hybrid, opts);
  } else {
    std::cerr << "error: unknown evaluator '" << evaluator
              << "' (use fe2 or hybrid)\n";
    return 2;
  }

  ensure_results_dir(config);
  const std::string base =
      config.results_dir() + "/solve_" + problem.name + "_" + evaluator;
  write_field_vtk(base + ".vtk", problem.nodes, problem.elements, sol.d,
                  sol.eps_q, sol.sig_q);

  std::vector<std::vector<std::string>> rows;
  rows.push_back({"node", "x", "y", "d_x", "d_y"});
  for (int i = 0; i < problem.n_nodes(); ++i)
    rows.push_back({std::to_string(i), fmt(problem.nodes(i, 0)),
                    fmt(problem.nodes(i, 1)), fmt(sol.d[i]),
                    fmt(sol.d[problem.n_nodes() + i])});
  write_csv(base + "_displacement.csv", rows);

  std::string timing = sol.log;
  timing += "micro evaluations: " + std::to_string(sol.micro_evals) + "\n";
  timing += "time micro:     " + fmt(sol.time_micro) + " s\n";
  timing += "time assembly:  " + fmt(sol.time_assembly) + " s\n";
  timing += "time solve:     " + fmt(sol.time_solve) + " s\n";
  timing += "time total:     " + fmt(sol.time_total) + " s\n";
  write_text(base + "_timing.txt", timing);

  std::cout << sol.log;
  std::cout << "solution (" << evaluator << ") -> " << base << ".vtk\n";
  if (!sol.converged) {
    std::cerr << "error: macro solve did not converge; partial results "
                 "written\n";
    return 1;
  }
  return 0;
}

int cmd_benchmark(const RunConfig& config) {
  const RveMesh mesh = build_mesh(config);
  const SurrogateModel model = load_surrogate(config, mesh);
  const Fe2Evaluator fe2(mesh, config.materials);
  const SurrogateEvaluator hybrid(model);

  int n_samples = 0;
  try {
    n_samples = static_cast<int>(read_snapshots(config.snapshots_path())
                                     .sample_indices.size());
  } catch (const std::exception&) {
    // Snapshot artifact can be absent when only the checkpoint was shipped.
  }

  std::vector<std::string> names;
  if (config.macro.case_name == "both")
    names = {"l_profile", "cooks_membrane"};
  else
    names = {config.macro.case_name};

  const MacroSolveOptions opts = solve_options(config);
  std::vector<BenchmarkRow> table;
  bool ok = true;
  for (const std::string& name : names) {
    const MacroCase problem = build_case(config, name);
    BenchmarkRow row = benchmark_case(problem, fe2, hybrid, opts);
    row.n_samples = n_samples;
    ok = ok && row.reference_converged && row.hybrid_converged;
    table.push_back(row);
  }

  ensure_results_dir(config);
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"case", "n_samples", "d_x", "d_y", "sigma_xx", "sigma_yy",
                  "tau_xy", "speedup"});
  std::string text =
      "case              n_samples   d_x        d_y        sigma_xx   "
      "sigma_yy   tau_xy     speedup\n";
  for (const BenchmarkRow& r : table) {
    rows.push_back({r.case_name, std::to_string(r.n_samples), fmt(r.err_dx),
                    fmt(r.err_dy), fmt(r.err_sxx), fmt(r.err_syy),
                    fmt(r.err_txy), fmt(r.speedup)});
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-17s %-11d %-10.4e %-10.4e %-10.4e %-10.4e %-10.4e %.1f\n",
                  r.case_name.c_str(), r.n_samples, r.err_dx, r.err_dy,
                  r.err_sxx, r.err_syy, r.err_txy, r.speedup);
    text += line;
    char timing[160];
    std::snprintf(timing, sizeof(timing),
                  "  reference %.2f s, hybrid %.2f s%s\n", r.time_reference,
                  r.time_hybrid,
                  (r.reference_converged && r.hybrid_converged)
                      ? ""
                      : "  [NOT CONVERGED]");
    text += timing;
  }
  write_csv(config.results_dir() + "/benchmark.csv", rows);
  write_text(config.results_dir() + "/benchmark.txt", text);
  std::cout << text;
  std::cout << "report -> " << config.results_dir()
            << "/benchmark.{csv,txt}\n";
  return ok ? 0 : 1;
}

}  // namespace hyperfe
