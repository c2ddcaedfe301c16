#include "hyperfe/branch_net.hpp"

#include <cmath>
#include <stdexcept>

#include "hyperfe/rng.hpp"

namespace hyperfe {

double swish(double x) { return x / (1.0 + std::exp(-x)); }

double swish_derivative(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  return s * (1.0 + x * (1.0 - s));
}

std::size_t BranchNet::n_parameters() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

std::vector<int> BranchNet::widths() const {
  std::vector<int> w{input_dim()};
  for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
  return w;
}

void BranchNet::validate() const {
  if (weights.empty() || weights.size() != biases.size())
    throw std::runtime_error("BranchNet: inconsistent layer count");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (biases[l].size() != weights[l].rows())
      throw std::runtime_error("BranchNet: bias/weight shape mismatch");
    if (l > 0 && weights[l].cols() != weights[l - 1].rows())
      throw std::runtime_error("BranchNet: layer width mismatch");
    if (!weights[l].allFinite() || !biases[l].allFinite())
      throw std::runtime_error("BranchNet: non-finite parameters");
  }
  if (out_mean.size() != output_dim() || out_scale.size() != output_dim())
    throw std::runtime_error("BranchNet: normalization size mismatch");
}

namespace {

Eigen::MatrixXd glorot_uniform(int rows, int cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd w(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) w(i, j) = uniform_range(rng, -bound, bound);
  return w;
}

std::vector<Eigen::MatrixXd> init_layers(const std::vector<int>& widths,
                                         std::vector<Eigen::VectorXd>& biases,
                                         std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Eigen::MatrixXd> weights;
  for (std::size_t l = 1; l < widths.size(); ++l) {
    weights.push_back(glorot_uniform(widths[l], widths[l - 1], rng));
    biases.emplace_back(Eigen::VectorXd::Zero(widths[l]));
  }
  return weights;
}

}  // namespace

BranchNet BranchNet::create(int p, int hidden, int depth, std::uint64_t seed) {
  if (p < 1 || hidden < 1 || depth < 0)
    throw std::invalid_argument("BranchNet::create: invalid architecture");
  std::vector<int> widths{3};
  for (int l = 0; l < depth; ++l) widths.push_back(hidden);
  widths.push_back(p);

  BranchNet net;
  net.weights = init_layers(widths, net.biases, seed);
  net.out_mean = Eigen::VectorXd::Zero(p);
  net.out_scale = Eigen::VectorXd::Ones(p);
  return net;
}

Eigen::MatrixXd branch_forward_normalized(const BranchNet& net,
                                          const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a = x;  // rows = samples
  const int n_layers = net.n_layers();
  for (int l = 0; l < n_layers; ++l) {
    a = (a * net.weights[static_cast<std::size_t>(l)].transpose()).rowwise() +
        net.biases[static_cast<std::size_t>(l)].transpose();
    if (l + 1 < n_layers) a = a.unaryExpr([](double z) { return swish(z); });
  }
  return a;
}

Eigen::VectorXd branch_forward(const BranchNet& net, const Strain2D& eps_bar) {
  const Eigen::Vector3d raw = eps_bar.voigt();
  if (!raw.allFinite())
    throw std::invalid_argument("branch_forward: non-finite input strain");
  const Eigen::RowVector3d xn =
      ((raw - net.in_mean).array() / net.in_scale.array()).transpose();
  const Eigen::VectorXd yn = branch_forward_normalized(net, xn).transpose();
  return net.out_mean + (net.out_scale.array() * yn.array()).matrix();
}

Eigen::MatrixXd branch_jacobian(const BranchNet& net, const Strain2D& eps_bar) {
  const Eigen::Vector3d raw = eps_bar.voigt();
  Eigen::Vector3d a = (raw - net.in_mean).array() / net.in_scale.array();
  // Forward-mode: carry d(activation)/d(normalized input) alongside.
  Eigen::MatrixXd jac =
      net.in_scale.cwiseInverse().asDiagonal() * Eigen::Matrix3d::Identity();
  Eigen::VectorXd act = a;
  const int n_layers = net.n_layers();
  for (int l = 0; l < n_layers; ++l) {
    const auto& w = net.weights[static_cast<std::size_t>(l)];
    const Eigen::VectorXd z = w * act + net.biases[static_cast<std::size_t>(l)];
    jac = (w * jac).eval();
    if (l + 1 < n_layers) {
      act = z.unaryExpr([](double v) { return swish(v); });
      jac = z.unaryExpr([](double v) { return swish_derivative(v); })
                .asDiagonal() *
            jac;
    } else {
      act = z;
    }
  }
  return net.out_scale.asDiagonal() * jac;
}

Eigen::MatrixXd TrunkNet::evaluate(const Eigen::Vector2d& x) const {
  Eigen::VectorXd a = x;
  const int n_layers = static_cast<int>(weights.size());
  for (int l = 0; l < n_layers; ++l) {
    a = weights[static_cast<std::size_t>(l)] * a +
        biases[static_cast<std::size_t>(l)];
    if (l + 1 < n_layers) a = a.unaryExpr([](double z) { return swish(z); });
  }
  // Rows alternate per mode: (t_k,x, t_k,y) stacked as 2p outputs.
  Eigen::MatrixXd t(2, p());
  for (int k = 0; k < p(); ++k) t.col(k) = a.segment<2>(2 * k);
  return t;
}

TrunkNet TrunkNet::create(int p, int hidden, int depth, std::uint64_t seed) {
  if (p < 1 || hidden < 1 || depth < 0)
    throw std::invalid_argument("TrunkNet::create: invalid architecture");
  std::vector<int> widths{2};
  for (int l = 0; l < depth; ++l) widths.push_back(hidden);
  widths.push_back(2 * p);

  TrunkNet net;
  net.weights = init_layers(widths, net.biases, seed);
  return net;
}

}  // namespace hyperfe
