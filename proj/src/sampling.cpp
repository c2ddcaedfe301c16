#include "hyperfe/sampling.hpp"

#include <stdexcept>

#include "hyperfe/rng.hpp"

namespace hyperfe {

SampleSet lhs_sample(int n, double magnitude, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
  if (!(magnitude > 0.0))
    throw std::invalid_argument("lhs_sample: magnitude must be > 0");

  Rng rng(seed);
  SampleSet set;
  set.magnitude = magnitude;
  set.seed = seed;
  set.samples.resize(n, 3);

  const double width = 2.0 * magnitude / n;
  for (int d = 0; d < 3; ++d) {
    std::vector<int> strata = identity_permutation(n);
    fisher_yates(strata, rng);
    for (int i = 0; i < n; ++i) {
      const double jitter = uniform_unit(rng);
      set.samples(i, d) = -magnitude + (strata[static_cast<std::size_t>(i)] + jitter) * width;
    }
  }
  return set;
}

}  // namespace hyperfe
