#pragma once

#include <utility>

#include "ppmc/data.hpp"
#include "ppmc/rng.hpp"

namespace ppmc {

enum class Copula { Gaussian, Clayton, Gumbel };

/// Copula underlying a model family (the probit/Gaussian families share the
/// Gaussian copula).
Copula copula_of(Family f);

/// Throws std::domain_error if theta lies outside the family's domain
/// (Gaussian |rho| < 1, Clayton theta > 0, Gumbel theta >= 1).
void copula_check_domain(Copula c, double theta);

/// C(u1, u2; theta) for u1, u2 in [0,1].
double copula_cdf(Copula c, double u1, double u2, double theta);

/// Conditional distribution C_{1|2}(u1 | u2; theta) = dC/du2.
/// Requires u1 in [0,1] and u2 strictly inside (0,1).
double copula_cond_cdf(Copula c, double u1, double u2, double theta);

/// C_{1|2} together with its partial derivatives in u1 and u2, for interior
/// arguments; used by the analytic likelihood gradients.
struct CondCdfDerivs {
  double value;
  double du1;
  double du2;
};
CondCdfDerivs copula_cond_cdf_derivs(Copula c, double u1, double u2, double theta);

/// Closed-form Kendall's tau.
double kendall_tau(Copula c, double param);

/// Closed-form (lambda_L, lambda_U) tail-dependence coefficients.
std::pair<double, double> tail_dependence(Copula c, double param);

/// Draw (u1, u2) from the copula by conditional inversion: u2 ~ U(0,1), then
/// solve C_{1|2}(u1|u2) = v by bisection to 1e-12.
void sample_copula(Copula c, double theta, RngStream& rng, double& u1, double& u2);

}  // namespace ppmc
