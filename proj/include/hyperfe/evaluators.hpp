#ifndef HYPERFE_EVALUATORS_HPP
#define HYPERFE_EVALUATORS_HPP

#include <string>

#include "hyperfe/macro.hpp"
#include "hyperfe/micro_solver.hpp"
#include "hyperfe/surrogate.hpp"

namespace hyperfe {

// Closed-form homogeneous isotropic material; oracle for the macro solver.
class LinearElasticEvaluator : public MicroEvaluator {
 public:
  LinearElasticEvaluator(double K, double G, double dev_factor = 1.0);

  Result evaluate(const Strain2D& eps_bar) const override;
  std::string name() const override { return "linear_elastic"; }

 private:
  MaterialParams params_;  // fiber slots reused for the homogeneous moduli
  Tangent3x3 tangent_;
};

// Reference evaluator: solves the periodic cell problem at every call.
// Warm-starts from the previous converged fluctuation when the caller
// provides a GpState.
class Fe2Evaluator : public MicroEvaluator {
 public:
  Fe2Evaluator(const RveMesh& mesh, const MaterialParams& mat,
               double tol = 1e-11, int max_iter = 25);

  Result evaluate(const Strain2D& eps_bar) const override;
  Result evaluate(const Strain2D& eps_bar, GpState& state) const override;
  std::string name() const override { return "fe2"; }

 private:
  const RveMesh& mesh_;
  MaterialParams mat_;
  MicroSolveOptions opts_;
};

// Hybrid evaluator backed by the trained model.
class SurrogateEvaluator : public MicroEvaluator {
 public:
  explicit SurrogateEvaluator(const SurrogateModel& model) : model_(model) {}

  Result evaluate(const Strain2D& eps_bar) const override;
  std::string name() const override { return "hybrid"; }

 private:
  const SurrogateModel& model_;
};

}  // namespace hyperfe

#endif
