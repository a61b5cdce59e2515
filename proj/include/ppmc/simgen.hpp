#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "ppmc/data.hpp"

namespace ppmc {

/// Synthetic-data design: U(0,1) covariates behind an intercept, bivariate
/// normal or copula-with-normal-marginals disturbances, normal random effects.
struct SimDesign {
  int P = 1000;
  int T = 4;
  Family family = Family::BivProbit;
  Eigen::VectorXd beta1, beta2;
  double tau1_sq = 2.5, tau2_sq = 1.0, rho_alpha = 0.5, dep = 0.5;
  std::uint64_t seed = 1;
};

/// The bivariate probit simulation preset (10 U(0,1) covariates plus
/// intercept, tau1^2 = 2.5, tau2^2 = 1, rho_eps = rho_alpha = 0.5).
SimDesign preset_probit(int P, int T, std::uint64_t seed);

/// The mixed discrete-linear Gaussian preset (beta2 intercept -0.5,
/// tau1^2 = 1, tau2^2 = 2.5).
SimDesign preset_mixed(int P, int T, std::uint64_t seed);

SimDesign preset_by_name(const std::string& name, int P, int T, std::uint64_t seed);

struct SimOutput {
  PanelData data;
  Theta truth;
  RandomEffects alpha;
  Eigen::MatrixXd eps;  // (P*T) x 2 disturbances, returned so y is reconstructable
};

SimOutput generate(const SimDesign& design);

}  // namespace ppmc
