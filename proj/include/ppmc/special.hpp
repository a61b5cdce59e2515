#pragma once

#include <cstddef>

namespace ppmc {

/// Standard normal density.
double std_normal_pdf(double x);

/// Log of the standard normal density.
double std_normal_logpdf(double x);

/// Standard normal CDF Phi(x). Saturates at 0/1 in the extreme tails.
double std_normal_cdf(double x);

/// Upper tail probability 1 - Phi(x), computed without cancellation.
double std_normal_cdf_c(double x);

/// Inverse standard normal CDF; p must lie in (0,1).
double std_normal_quantile(double p);

/// Bivariate standard normal CDF P(X <= h, Y <= k) with correlation rho,
/// |rho| < 1. Absolute accuracy better than 1e-10 over the full range.
double bvn_cdf(double h, double k, double rho);

/// log(sum(exp(x_i))) over n values, guarded against overflow.
/// Returns -inf for an all -inf input.
double logsumexp(const double* x, std::size_t n);

}  // namespace ppmc
