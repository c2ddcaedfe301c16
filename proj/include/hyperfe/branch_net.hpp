#ifndef HYPERFE_BRANCH_NET_HPP
#define HYPERFE_BRANCH_NET_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hyperfe/mechanics.hpp"

namespace hyperfe {

// x * sigmoid(x)
double swish(double x);
double swish_derivative(double x);

// MLP mapping the macroscale strain triple to POD coefficients. Hidden
// layers use swish, the output layer is linear. Inputs are standardized and
// outputs de-standardized with constants frozen by training.
struct BranchNet {
  std::vector<Eigen::MatrixXd> weights;  // per layer, out x in
  std::vector<Eigen::VectorXd> biases;

  Eigen::Vector3d in_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d in_scale = Eigen::Vector3d::Ones();
  Eigen::VectorXd out_mean;   // p
  Eigen::VectorXd out_scale;  // p

  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  int n_layers() const { return static_cast<int>(weights.size()); }
  std::size_t n_parameters() const;
  std::vector<int> widths() const;

  void validate() const;  // finite parameters, consistent shapes

  // Glorot-style uniform initialization, seeded; widths
  // [3, hidden, ..., hidden, p] with `depth` hidden layers.
  static BranchNet create(int p, int hidden = 64, int depth = 4,
                          std::uint64_t seed = 0);
};

// Forward pass in normalized space (rows = samples), without input/output
// scaling. Used by the training loop.
Eigen::MatrixXd branch_forward_normalized(const BranchNet& net,
                                          const Eigen::MatrixXd& x);

Eigen::VectorXd branch_forward(const BranchNet& net, const Strain2D& eps_bar);

// Exact p x 3 derivative of branch_forward, including the normalization
// layers, by forward-mode accumulation.
Eigen::MatrixXd branch_jacobian(const BranchNet& net, const Strain2D& eps_bar);

// Optional vanilla-DeepONet trunk: MLP from x in R^2 to p 2-vector basis
// functions t_k(x) plus a 2-vector bias b0.
struct TrunkNet {
  std::vector<Eigen::MatrixXd> weights;  // final layer has 2p rows
  std::vector<Eigen::VectorXd> biases;
  Eigen::Vector2d b0 = Eigen::Vector2d::Zero();

  int p() const { return static_cast<int>(weights.back().rows()) / 2; }

  // t_k(x) as columns of a 2 x p matrix.
  Eigen::MatrixXd evaluate(const Eigen::Vector2d& x) const;

  static TrunkNet create(int p, int hidden = 64, int depth = 4,
                         std::uint64_t seed = 0);
};

// u(x) = sum_k b_k(eps_bar) t_k(x) + b0. Trunk is any callable returning the
// 2 x p basis matrix, so a tabulated POD basis can stand in for the MLP.
template <typename TrunkLike>
Eigen::Vector2d deeponet_forward(const BranchNet& branch,
                                 const TrunkLike& trunk,
                                 const Eigen::Vector2d& x,
                                 const Strain2D& eps_bar,
                                 const Eigen::Vector2d& b0) {
  const Eigen::VectorXd b = branch_forward(branch, eps_bar);
  const Eigen::MatrixXd t = trunk(x);
  if (t.cols() != b.size())
    throw std::invalid_argument("deeponet_forward: branch/trunk p mismatch");
  return t * b + b0;
}

inline Eigen::Vector2d deeponet_forward(const BranchNet& branch,
                                        const TrunkNet& trunk,
                                        const Eigen::Vector2d& x,
                                        const Strain2D& eps_bar) {
  return deeponet_forward(
      branch, [&trunk](const Eigen::Vector2d& q) { return trunk.evaluate(q); },
      x, eps_bar, trunk.b0);
}

}  // namespace hyperfe

#endif
