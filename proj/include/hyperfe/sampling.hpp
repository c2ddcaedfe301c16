#ifndef HYPERFE_SAMPLING_HPP
#define HYPERFE_SAMPLING_HPP

#include <cstdint>

#include <Eigen/Dense>

#include "hyperfe/mechanics.hpp"

namespace hyperfe {

// Macroscale strain samples drawn by Latin hypercube sampling over the cube
// [-magnitude, magnitude]^3 in (eps_xx, eps_yy, gamma_xy).
struct SampleSet {
  Eigen::MatrixX3d samples;  // n x 3
  double magnitude = 0.0;
  std::uint64_t seed = 0;

  int size() const { return static_cast<int>(samples.rows()); }
  Strain2D strain(int i) const {
    return {samples(i, 0), samples(i, 1), samples(i, 2)};
  }
};

// Each of the n equal-width strata per dimension receives exactly one
// sample; reproducible for a fixed seed.
SampleSet lhs_sample(int n, double magnitude, std::uint64_t seed);

}  // namespace hyperfe

#endif
