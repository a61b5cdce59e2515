// Tiny discrete particle model: the latent effect lives on a 3-point grid so
// the posterior and the expanded target are enumerable exactly.
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "ppmc/rng.hpp"

namespace toy {

struct GridToyModel {
  std::array<double, 3> values{-1.0, 0.2, 1.5};
  std::array<double, 3> prior{0.5, 0.3, 0.2};
  std::array<double, 3> lik{0.9, 0.4, 0.05};

  int index_of(double a) const {
    for (int j = 0; j < 3; ++j)
      if (values[j] == a) return j;
    throw std::logic_error("grid value not on the grid");
  }

  void propose_alpha(int /*i*/, ppmc::RngStream& rng, double& a1, double& a2) const {
    a1 = values[rng.categorical(prior.data(), 3)];
    a2 = 0.0;
  }

  double log_weight(int /*i*/, double a1, double /*a2*/) const {
    return std::log(lik[index_of(a1)]);
  }

  std::array<double, 3> posterior() const {
    std::array<double, 3> post{};
    double z = 0.0;
    for (int j = 0; j < 3; ++j) {
      post[j] = prior[j] * lik[j];
      z += post[j];
    }
    for (double& p : post) p /= z;
    return post;
  }
};

}  // namespace toy
