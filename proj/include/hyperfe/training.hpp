#ifndef HYPERFE_TRAINING_HPP
#define HYPERFE_TRAINING_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/branch_net.hpp"

namespace hyperfe {

struct TrainConfig {
  double lr0 = 1e-3;
  double decay_step = 1000.0;  // optimizer steps per decay_rate factor
  double decay_rate = 0.2;
  int batches_per_epoch = 10;
  int epochs = 2000;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  // Adam moment constants (standard values).
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

// Continuous exponential schedule: lr0 * decay_rate^(t / decay_step), where
// the trainer measures t in optimizer steps (one step per mini-batch).
double lr_at(const TrainConfig& cfg, double t);

// Mean squared difference over all entries; lengths must match.
double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target);
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target);

struct TrainHistory {
  // One entry per epoch. Train/validation losses are in the normalized
  // coefficient space the optimizer sees; val_mse_raw is in physical
  // coefficient units.
  std::vector<double> train_mse;
  std::vector<double> val_mse;
  std::vector<double> val_mse_raw;
  std::vector<double> lr;
};

struct Checkpoint {
  int format_version = 1;
  BranchNet net;  // best-validation parameters
  TrainConfig config;
  TrainHistory history;
  int best_epoch = -1;
  double best_val_mse = 0.0;
  double final_train_mse = 0.0;
  double final_val_mse = 0.0;
  std::uint64_t pod_hash = 0;
};

// How the target coefficients are scaled for optimization. PerMode
// standardizes every coefficient to unit variance, which re-weights the
// small trailing modes upward by the variance ratio. Global uses one common
// scale for all coefficients, so for an orthonormal basis the optimized MSE
// is a fixed multiple of the reconstructed-field MSE.
enum class TargetScaling { PerMode, Global };

// Adam + scheduled exponential learning-rate decay on the normalized-space
// MSE. Rows of x are strain triples, rows of y the target POD coefficients.
// The train/validation split, the normalization constants (computed from
// the training split) and all shuffles derive from cfg.seed. Aborts with a
// diagnostic if the loss stops being finite.
Checkpoint train(BranchNet net, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& y, const TrainConfig& cfg,
                 std::uint64_t pod_hash = 0,
                 TargetScaling scaling = TargetScaling::PerMode);

}  // namespace hyperfe

#endif
