#include "hyperfe/evaluators.hpp"

#include <stdexcept>

namespace hyperfe {

LinearElasticEvaluator::LinearElasticEvaluator(double K, double G,
                                               double dev_factor) {
  params_.K_f = K;
  params_.G_f = G;
  params_.dev_factor = dev_factor;
  params_.validate();
  tangent_ = linear_tangent(K, G, dev_factor);
}

MicroEvaluator::Result LinearElasticEvaluator::evaluate(
    const Strain2D& eps_bar) const {
  return {fiber_stress(eps_bar, params_), tangent_};
}

Fe2Evaluator::Fe2Evaluator(const RveMesh& mesh, const MaterialParams& mat,
                           double tol, int max_iter)
    : mesh_(mesh), mat_(mat) {
  mat_.validate();
  opts_.tol = tol;
  opts_.max_iter = max_iter;
}

MicroEvaluator::Result Fe2Evaluator::evaluate(const Strain2D& eps_bar) const {
  GpState scratch;
  return evaluate(eps_bar, scratch);
}

MicroEvaluator::Result Fe2Evaluator::evaluate(const Strain2D& eps_bar,
                                              GpState& state) const {
  MicroSolveOptions opts = opts_;
  if (state.valid) opts.warm_start = &state.fluct;
  const MicroSolution sol = solve_micro(mesh_, eps_bar, mat_, opts);
  if (!sol.converged)
    throw std::runtime_error("cell problem did not converge: " +
                             sol.diagnostics);
  state.fluct = sol.fluct_reduced;
  state.valid = true;
  return {homogenize_stress(sol, mesh_), fe2_tangent(mesh_, sol, mat_)};
}

MicroEvaluator::Result SurrogateEvaluator::evaluate(
    const Strain2D& eps_bar) const {
  const MicroPrediction p = surrogate_predict(model_, eps_bar, true);
  return {p.sigma_bar, p.tangent};
}

}  // namespace hyperfe
