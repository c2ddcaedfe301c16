#include "hyperfe/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyperfe/rng.hpp"

namespace hyperfe {

void TrainConfig::validate() const {
  if (!(lr0 > 0.0)) throw std::invalid_argument("TrainConfig: lr0 must be > 0");
  if (!(decay_step > 0.0) || !(decay_rate > 0.0))
    throw std::invalid_argument("TrainConfig: invalid decay schedule");
  if (!(validation_fraction > 0.0) || !(validation_fraction < 1.0))
    throw std::invalid_argument(
        "TrainConfig: validation_fraction must lie in (0, 1)");
  if (batches_per_epoch < 1 || epochs < 1)
    throw std::invalid_argument("TrainConfig: batches/epochs must be >= 1");
}

double lr_at(const TrainConfig& cfg, double t) {
  return cfg.lr0 * std::pow(cfg.decay_rate, t / cfg.decay_step);
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("mse_loss: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty input");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

double mse_loss(const Eigen::VectorXd& pred, const Eigen::VectorXd& target) {
  if (pred.size() != target.size())
    throw std::invalid_argument("mse_loss: length mismatch");
  if (pred.size() == 0) throw std::invalid_argument("mse_loss: empty input");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

namespace {

struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const BranchNet& net) {
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
      mw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      vw.push_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
      mb.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
      vb.push_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
  }
};

// One forward/backward/update on a batch in normalized space. Returns the
// pre-update batch loss.
double adam_step(BranchNet& net, AdamState& adam, const TrainConfig& cfg,
                 const Eigen::MatrixXd& xb, const Eigen::MatrixXd& yb) {
  const int n_layers = net.n_layers();
  std::vector<Eigen::MatrixXd> acts(static_cast<std::size_t>(n_layers) + 1);
  std::vector<Eigen::MatrixXd> pre(static_cast<std::size_t>(n_layers));
  acts[0] = xb;
  for (int l = 0; l < n_layers; ++l) {
    pre[l] = (acts[l] * net.weights[static_cast<std::size_t>(l)].transpose())
                 .rowwise() +
             net.biases[static_cast<std::size_t>(l)].transpose();
    acts[l + 1] = (l + 1 < n_layers)
                      ? pre[l].unaryExpr([](double z) { return swish(z); })
                      : pre[l];
  }
  const double loss = mse_loss(acts[static_cast<std::size_t>(n_layers)], yb);

  Eigen::MatrixXd delta =
      (2.0 / static_cast<double>(yb.size())) *
      (acts[static_cast<std::size_t>(n_layers)] - yb);
  const double lr = lr_at(cfg, static_cast<double>(adam.step));
  adam.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));

  for (int l = n_layers - 1; l >= 0; --l) {
    const auto lu = static_cast<std::size_t>(l);
    if (l + 1 < n_layers)
      delta.array() *=
          pre[lu].unaryExpr([](double z) { return swish_derivative(z); }).array();
    const Eigen::MatrixXd gw = delta.transpose() * acts[lu];
    const Eigen::VectorXd gb = delta.colwise().sum().transpose();
    if (l > 0) delta = delta * net.weights[lu];  // propagate before update

    adam.mw[lu] = cfg.beta1 * adam.mw[lu] + (1.0 - cfg.beta1) * gw;
    adam.vw[lu] = cfg.beta2 * adam.vw[lu] + (1.0 - cfg.beta2) * gw.cwiseAbs2();
    adam.mb[lu] = cfg.beta1 * adam.mb[lu] + (1.0 - cfg.beta1) * gb;
    adam.vb[lu] = cfg.beta2 * adam.vb[lu] + (1.0 - cfg.beta2) * gb.cwiseAbs2();

    net.weights[lu].array() -=
        lr * (adam.mw[lu].array() / bc1) /
        ((adam.vw[lu].array() / bc2).sqrt() + cfg.adam_eps);
    net.biases[lu].array() -=
        lr * (adam.mb[lu].array() / bc1) /
        ((adam.vb[lu].array() / bc2).sqrt() + cfg.adam_eps);
  }
  return loss;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m,
                            const std::vector<int>& idx, int begin, int end) {
  Eigen::MatrixXd out(end - begin, m.cols());
  for (int i = begin; i < end; ++i)
    out.row(i - begin) = m.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace

Checkpoint train(BranchNet net, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& y, const TrainConfig& cfg,
                 std::uint64_t pod_hash, TargetScaling scaling) {
  cfg.validate();
  const int n = static_cast<int>(x.rows());
  if (n == 0 || y.rows() != n)
    throw std::invalid_argument("train: dataset empty or size mismatch");
  if (x.cols() != 3 || y.cols() != net.output_dim())
    throw std::invalid_argument("train: dataset/network width mismatch");

  // Split, then standardize from the training part only.
  Rng rng(splitmix64(cfg.seed));
  std::vector<int> perm = identity_permutation(n);
  fisher_yates(perm, rng);
  int n_val = static_cast<int>(std::lround(cfg.validation_fraction * n));
  n_val = std::min(std::max(n_val, 1), n - 1);
  if (n < 2) throw std::invalid_argument("train: need at least 2 samples");
  const int n_train = n - n_val;

  Eigen::MatrixXd x_train = gather_rows(x, perm, 0, n_train);
  Eigen::MatrixXd y_train = gather_rows(y, perm, 0, n_train);
  Eigen::MatrixXd x_val = gather_rows(x, perm, n_train, n);
  Eigen::MatrixXd y_val = gather_rows(y, perm, n_train, n);

  net.in_mean = x_train.colwise().mean().transpose();
  net.out_mean = y_train.colwise().mean().transpose();
  auto scale_of = [n_train](const Eigen::MatrixXd& m, const Eigen::VectorXd& mu) {
    const double denom = static_cast<double>(std::max(1, n_train - 1));
    Eigen::VectorXd s = ((m.rowwise() - mu.transpose()).colwise().squaredNorm() /
                         denom)
                            .cwiseSqrt()
                            .transpose();
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] < 1e-14) s[i] = 1.0;  // constant feature
    return s;
  };
  net.in_scale = scale_of(x_train, net.in_mean);
  net.out_scale = scale_of(y_train, net.out_mean);
  if (scaling == TargetScaling::Global) {
    // One shared scale: the RMS of the per-mode scales. The normalized MSE
    // then stays proportional to the field-space reconstruction error
    // instead of boosting the low-variance trailing coefficients.
    const double g = std::sqrt(net.out_scale.squaredNorm() /
                               static_cast<double>(net.out_scale.size()));
    net.out_scale.setConstant(g < 1e-14 ? 1.0 : g);
  }

  auto normalize_in = [&](Eigen::MatrixXd m) {
    m.rowwise() -= net.in_mean.transpose();
    m.array().rowwise() /= net.in_scale.transpose().array();
    return m;
  };
  auto normalize_out = [&](Eigen::MatrixXd m) {
    m.rowwise() -= net.out_mean.transpose();
    m.array().rowwise() /= net.out_scale.transpose().array();
    return m;
  };
  const Eigen::MatrixXd xn_train = normalize_in(x_train);
  const Eigen::MatrixXd yn_train = normalize_out(y_train);
  const Eigen::MatrixXd xn_val = normalize_in(x_val);
  const Eigen::MatrixXd yn_val = normalize_out(y_val);

  Checkpoint ckpt;
  ckpt.config = cfg;
  ckpt.pod_hash = pod_hash;

  AdamState adam(net);
  std::vector<int> order = identity_permutation(n_train);
  std::vector<Eigen::MatrixXd> best_w = net.weights;
  std::vector<Eigen::VectorXd> best_b = net.biases;
  double best_val = std::numeric_limits<double>::infinity();
  int best_epoch = -1;

  const int n_batches = std::min(cfg.batches_per_epoch, n_train);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    fisher_yates(order, rng);
    double loss_sum = 0.0;
    for (int bi = 0; bi < n_batches; ++bi) {
      const int lo = bi * n_train / n_batches;
      const int hi = (bi + 1) * n_train / n_batches;
      const double loss = adam_step(net, adam, cfg,
                                    gather_rows(xn_train, order, lo, hi),
                                    gather_rows(yn_train, order, lo, hi));
      if (!std::isfinite(loss))
        throw std::runtime_error("train: loss diverged (not finite) at epoch " +
                                 std::to_string(epoch) + ", batch " +
                                 std::to_string(bi));
      loss_sum += loss * (hi - lo);
    }
    const Eigen::MatrixXd pred_val = branch_forward_normalized(net, xn_val);
    const double val = mse_loss(pred_val, yn_val);
    const Eigen::MatrixXd diff_raw = ((pred_val - yn_val).array().rowwise() *
                                      net.out_scale.transpose().array())
                                         .matrix();
    const double val_raw =
        diff_raw.squaredNorm() / static_cast<double>(diff_raw.size());
    ckpt.history.train_mse.push_back(loss_sum / n_train);
    ckpt.history.val_mse.push_back(val);
    ckpt.history.val_mse_raw.push_back(val_raw);
    ckpt.history.lr.push_back(lr_at(cfg, static_cast<double>(adam.step)));
    if (val < best_val) {
      best_val = val;
      best_epoch = epoch;
      best_w = net.weights;
      best_b = net.biases;
    }
  }

  net.weights = std::move(best_w);
  net.biases = std::move(best_b);
  ckpt.net = std::move(net);
  ckpt.best_epoch = best_epoch;
  ckpt.best_val_mse = best_val;
  ckpt.final_train_mse = ckpt.history.train_mse.back();
  ckpt.final_val_mse = ckpt.history.val_mse.back();
  return ckpt;
}

}  // namespace hyperfe
