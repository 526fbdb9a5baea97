#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "plab/neural.hpp"
#include "plab/rng.hpp"

namespace plab::testing {

// Largest relative error between the analytic gradient of the batch MSE and
// central differences with step h, over every coordinate.
inline double gradcheck(const nn::NetSpec& spec, const nn::SampleSet& data, std::uint64_t seed, double h = 1e-5) {
  const nn::Params params = nn::init(spec, seed);
  std::vector<std::size_t> batch(data.size());
  std::iota(batch.begin(), batch.end(), 0);
  std::vector<double> grad(params.size());
  nn::loss_and_gradient(spec, params, data, batch, grad);

  double worst = 0.0;
  nn::Params p = params;
  std::vector<double> scratch(params.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = params[i] + h;
    const double up = nn::loss_and_gradient(spec, p, data, batch, scratch);
    p[i] = params[i] - h;
    const double down = nn::loss_and_gradient(spec, p, data, batch, scratch);
    p[i] = params[i];
    const double fd = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-6});
    worst = std::max(worst, std::abs(grad[i] - fd) / denom);
  }
  return worst;
}

// n random samples of shape steps x features with targets in [-1, 1].
inline nn::SampleSet random_samples(std::size_t n, std::size_t steps, std::size_t features, std::uint64_t seed) {
  rng::Stream s(seed);
  nn::SampleSet set(steps, features);
  std::vector<double> in(steps * features);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : in) v = s.uniform(-1.0, 1.0);
    set.add(in, s.uniform(-1.0, 1.0));
  }
  return set;
}

}  // namespace plab::testing
