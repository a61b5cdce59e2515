#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ppmc/data.hpp"
#include "ppmc/distributions.hpp"
#include "ppmc/hmc.hpp"
#include "ppmc/models.hpp"
#include "ppmc/particles.hpp"

namespace ppmc {

struct AcceptStats {
  long dep_accept = 0, dep_total = 0;
  double hmc_accept_sum = 0.0;
  long hmc_total = 0;
  long divergences = 0;
  long mh_accept = 0, mh_total = 0;  // pseudo-marginal / random-effect MH moves
  long aborted_steps = 0;

  std::map<std::string, double> rates() const;
};

/// Markov chain state shared by the samplers. alpha_ref holds the current
/// selected particles (PMwG/PMMH) or the current random effects (DA, MCMC-MH).
struct SamplerState {
  Theta theta;
  Eigen::MatrixXd alpha_ref;  // P x 2
  std::vector<int> k;
  long iter = 0;
  double rw_log_scale = 0.0;
  AcceptStats accept;
};

/// beta = 0, dependence parameter at independence, Sigma_alpha = I.
Theta initial_theta(const ModelSpec& model);

struct RwStepResult {
  double value;
  double log_density;
  bool accepted;
};

/// One Gaussian random-walk MH move on an unconstrained scalar with
/// Robbins-Monro scale adaptation toward a 0.3 acceptance rate.
/// log_density must include any Jacobian term. current_logdens may be NaN to
/// force evaluation.
RwStepResult adaptive_rw_step(double value, double current_logdens,
                              const std::function<double(double)>& log_density,
                              double& rw_log_scale, long iter, RngStream& rng);

/// Conjugate update of Sigma_alpha given the current random effects:
/// Sigma_alpha^{-1} ~ W(v0 + P, [R0^{-1} + sum_i alpha_i alpha_i']^{-1}).
Eigen::Matrix2d wishart_gibbs_update(const Eigen::MatrixXd& alpha, double v0,
                                     const Eigen::Matrix2d& R0, RngStream& rng);

/// Steps 4-5 of the particle Gibbs sweep: conditional refresh around the
/// reference particles followed by index selection. Usable with any model that
/// satisfies the particle-model interface.
template <class M>
void particle_gibbs_refresh(const M& m, int P, Eigen::MatrixXd& alpha_ref, std::vector<int>& k,
                            int N, RngPool& pool) {
  const ParticleCloud cloud = conditional_particles(m, P, alpha_ref, N, pool);
  k = sample_indices(cloud, pool.chain);
  for (int i = 0; i < P; ++i) {
    alpha_ref(i, 0) = cloud.alpha(i, k[i], 0);
    alpha_ref(i, 1) = cloud.alpha(i, k[i], 1);
  }
}

/// Independence-MH refresh of every individual's random effect with the prior
/// proposal, n_inner sweeps. Returns the number of accepted moves.
template <class M>
long mh_refresh(const M& m, int P, Eigen::MatrixXd& alpha, int n_inner, RngPool& pool) {
  if (n_inner < 1) throw std::invalid_argument("mh_refresh: n_inner must be >= 1");
  std::vector<long> accepted(P, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < P; ++i) {
    RngStream& rng = pool.individual[i];
    double cur_ll = m.log_weight(i, alpha(i, 0), alpha(i, 1));
    for (int s = 0; s < n_inner; ++s) {
      double a1, a2;
      m.propose_alpha(i, rng, a1, a2);
      const double prop_ll = m.log_weight(i, a1, a2);
      if (std::log(rng.uniform()) < prop_ll - cur_ll) {
        alpha(i, 0) = a1;
        alpha(i, 1) = a2;
        cur_ll = prop_ll;
        ++accepted[i];
      }
    }
  }
  long total = 0;
  for (int i = 0; i < P; ++i) total += accepted[i];
  return total;
}

/// Particle Metropolis-within-Gibbs (the paper sampler): Wishart update of
/// Sigma_alpha, adaptive-RW update of the dependence parameter, NUTS update of
/// the stacked betas, then the conditional particle refresh and reselection.
class PmwgSampler {
 public:
  PmwgSampler(const ModelSpec& model, const PanelData& data, const Priors& priors, int N,
              const HmcConfig& hmc, int warmup);

  SamplerState init(RngPool& pool);
  void step(SamplerState& state, RngPool& pool);

  const NutsSampler& nuts() const { return nuts_; }

 private:
  void step_impl(SamplerState& state, RngPool& pool);

  ModelSpec model_;
  const PanelData* data_;
  Priors priors_;
  int n_particles_;
  NutsSampler nuts_;
};

/// Pseudo-marginal MH on the full unconstrained parameter vector with an
/// adapted multivariate random-walk proposal; the incumbent's likelihood
/// estimate is stored and reused, never recomputed.
class PmmhSampler {
 public:
  PmmhSampler(const ModelSpec& model, const PanelData& data, const Priors& priors, int N,
              int warmup);

  SamplerState init(RngPool& pool);
  void step(SamplerState& state, RngPool& pool);

  double stored_log_phat() const { return log_phat_; }

 private:
  Eigen::VectorXd pack(const Theta& theta) const;
  Theta unpack(const Eigen::VectorXd& z) const;

  ModelSpec model_;
  const PanelData* data_;
  Priors priors_;
  int n_particles_;
  int warmup_;
  int dim_;
  double log_phat_ = 0.0;
  double log_post_ = 0.0;  // log prior in unconstrained coordinates, incumbent
  Eigen::VectorXd z_;
  double rw_log_scale_;
  // proposal-covariance adaptation (warmup only)
  Eigen::VectorXd running_mean_;
  Eigen::MatrixXd running_cov_;
  long n_adapt_ = 0;
  Eigen::MatrixXd prop_chol_;
};

/// Data-augmentation Gibbs for the bivariate probit family: latent-utility
/// truncated-normal updates, conjugate Gaussian updates of the random effects
/// and betas, Wishart update of Sigma_alpha and an MwG move on rho.
class DaGibbsSampler {
 public:
  DaGibbsSampler(const ModelSpec& model, const PanelData& data, const Priors& priors);

  SamplerState init(RngPool& pool);
  void step(SamplerState& state, RngPool& pool);

  // latent utilities, exposed for tests
  const std::vector<double>& ystar1() const { return ystar1_; }
  const std::vector<double>& ystar2() const { return ystar2_; }

  void update_latents(const SamplerState& state, RngPool& pool);
  void update_alpha(SamplerState& state, RngPool& pool);
  void update_beta(SamplerState& state, RngPool& pool);
  void update_rho(SamplerState& state, RngPool& pool);

  /// Mean and precision of the conjugate beta full conditional.
  std::pair<Eigen::VectorXd, Eigen::MatrixXd> beta_posterior_moments(
      const SamplerState& state) const;

 private:
  ModelSpec model_;
  const PanelData* data_;
  Priors priors_;
  std::vector<double> ystar1_, ystar2_;
  Eigen::MatrixXd g11_, g12_, g22_;  // design cross-products, fixed over the run
};

/// The MCMC-MH comparator: theta updates as in PMwG but conditioning on the
/// current random effects, then n_inner independence-MH refreshes per
/// individual.
class McmcMhSampler {
 public:
  McmcMhSampler(const ModelSpec& model, const PanelData& data, const Priors& priors, int n_inner,
                const HmcConfig& hmc, int warmup);

  SamplerState init(RngPool& pool);
  void step(SamplerState& state, RngPool& pool);

 private:
  ModelSpec model_;
  const PanelData* data_;
  Priors priors_;
  int n_inner_;
  NutsSampler nuts_;
};

/// Shared theta blocks (Wishart + dependence RW + NUTS betas) conditioning on
/// the given random effects; used by both PMwG and MCMC-MH.
void update_theta_blocks(const ModelSpec& model, const PanelData& data, const Priors& priors,
                         NutsSampler& nuts, SamplerState& state, RngPool& pool);

}  // namespace ppmc
