#pragma once

#include <Eigen/Dense>

#include "ppmc/rng.hpp"

namespace ppmc {

/// Draw from N(mu, sigma^2) truncated to the open interval (lower, upper).
/// Either bound may be infinite. Inverse-CDF for mild truncation, exponential
/// rejection when the region starts more than 4 sd into a tail.
double sample_truncated_normal(double mu, double sigma, double lower, double upper,
                               RngStream& rng);

/// Draw a 2x2 matrix from the Wishart distribution W(v, R), v >= 2, R positive
/// definite (Bartlett decomposition). The mean of the draws is v*R.
Eigen::Matrix2d sample_wishart(double v, const Eigen::Matrix2d& R, RngStream& rng);

}  // namespace ppmc
