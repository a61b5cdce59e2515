#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ppmc/data.hpp"

namespace ppmc {

/// Post-burnin draws, one row per iterate, one column per parameter.
struct ChainOutput {
  Eigen::MatrixXd draws;
  std::vector<std::string> param_names;
  double wall_time = 0.0;
  std::map<std::string, double> accept_rates;
};

/// Column labels matching pack_theta's layout.
std::vector<std::string> param_names(const ModelSpec& model, const PanelData& data);

Eigen::VectorXd pack_theta(const ModelSpec& model, const Theta& theta);
Theta unpack_theta(const ModelSpec& model, const Eigen::VectorXd& row);

struct IactResult {
  double value = 1.0;
  bool degenerate = false;
};

/// Integrated autocorrelation time: 1 + 2 * sum of empirical autocorrelations
/// up to the first lag whose autocorrelation drops below 2/sqrt(M) in
/// magnitude. A constant series is flagged degenerate with value 1.
IactResult iact(const double* series, std::size_t n);
IactResult iact(const Eigen::VectorXd& series);

/// Time-normalised variance: mean IACT times computing time.
double tnv(double iact_mean, double wall_time_seconds);

struct PosteriorSummary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double iact = 1.0;
  bool significant = false;
  bool degenerate = false;
};

/// Mean, equal-tail 95% interval, IACT and the zero-exclusion flag for one
/// series; needs at least 100 draws.
PosteriorSummary summarize_series(const Eigen::VectorXd& series);

/// Per-parameter summaries for a whole chain.
std::vector<PosteriorSummary> summarize(const ChainOutput& chain);

/// Average partial effect of toggling a binary covariate. col1/col2 are the
/// column indices of the event within X1/X2 (-1 when the event does not enter
/// that equation). For the probit and Gaussian families the joint-outcome
/// probability is a bivariate normal orthant with covariance
/// Sigma_eps + Sigma_alpha; for the copula families it is estimated by Monte
/// Carlo with mc_draws draws of (alpha, eps) per retained theta.
struct ApeRequest {
  std::string name;
  int col1 = -1;
  int col2 = -1;
  int mc_draws = 10000;
  std::uint64_t seed = 12345;
};

struct ApeResult {
  PosteriorSummary summary;
  Eigen::VectorXd per_draw;
};

ApeResult ape(const ChainOutput& chain, const ModelSpec& model, const PanelData& data,
              const ApeRequest& request);

}  // namespace ppmc
