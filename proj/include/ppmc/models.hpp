#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ppmc/copulas.hpp"
#include "ppmc/data.hpp"

namespace ppmc {

/// log of p clamped to [1e-300, 1 - 1e-16]; clamp events are counted so a
/// chain that visits numerically saturated cells is visible in diagnostics.
double log_clamped(double p);
std::uint64_t clamp_count();
void reset_clamp_count();

/// Conditional log-likelihood of all observations given the random effects.
/// The probit family needs |rho_eps| < 1; the copula families need the
/// dependence parameter inside the copula domain.
double loglik_biv_probit(const Theta& theta, const RandomEffects& re, const PanelData& data);
double loglik_mixed_gaussian(const Theta& theta, const RandomEffects& re, const PanelData& data);
double loglik_mixed_copula(Copula cop, const Theta& theta, const RandomEffects& re,
                           const PanelData& data);

/// Dispatch on the model family.
double loglik_conditional(const ModelSpec& model, const Theta& theta, const RandomEffects& re,
                          const PanelData& data);

/// Contribution of individual i at the random effect (alpha1, alpha2);
/// the hot path for particle weighting.
double loglik_individual(const ModelSpec& model, const Theta& theta, double alpha1, double alpha2,
                         const PanelData& data, int i);

/// Analytic gradient of the conditional log-likelihood with respect to the
/// stacked coefficients (beta1, beta2).
Eigen::VectorXd grad_loglik_beta(const ModelSpec& model, const Theta& theta,
                                 const RandomEffects& re, const PanelData& data);

/// Fused evaluation used by the Hamiltonian proposal: returns the conditional
/// log-likelihood and writes its beta-gradient.
double loglik_and_grad_beta(const ModelSpec& model, const Theta& theta, const RandomEffects& re,
                            const PanelData& data, Eigen::VectorXd& grad);

/// Prior hyperparameters: Sigma_alpha^{-1} ~ Wishart(v0, r0_scale * I),
/// beta ~ N(0, beta_var * I), dependence parameter uniform over its domain
/// (truncated at dep_max for the unbounded copula parameters).
struct Priors {
  double v0 = 6.0;
  double r0_scale = 400.0;
  double beta_var = 100.0;
  double dep_max = 100.0;  // Clayton theta ~ U(0, dep_max); Gumbel theta-1 ~ U(0, dep_max)

  Eigen::Matrix2d R0() const { return r0_scale * Eigen::Matrix2d::Identity(); }
};

/// Log prior density of theta in constrained coordinates; -inf outside the
/// support. With unconstrained_coords the log-Jacobian of the working
/// transform (atanh/log dependence, log variances, atanh rho_alpha) is added.
double log_prior(const ModelSpec& model, const Theta& theta, const Priors& priors,
                 bool unconstrained_coords = false);

/// Log prior of the dependence parameter alone; -inf outside its domain.
double log_dep_prior(const ModelSpec& model, double dep, const Priors& priors);

/// log |d theta / d z| of the constrained<->unconstrained reparameterisation,
/// evaluated at the constrained value.
double log_jacobian_unconstrained(const ModelSpec& model, const Theta& theta);

}  // namespace ppmc
