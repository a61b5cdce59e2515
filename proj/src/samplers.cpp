#include "ppmc/samplers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppmc/special.hpp"

namespace ppmc {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRwTargetRate = 0.3;
constexpr double kRwGain = 2.0;
}  // namespace

std::map<std::string, double> AcceptStats::rates() const {
  std::map<std::string, double> out;
  if (dep_total > 0) out["dep"] = static_cast<double>(dep_accept) / dep_total;
  if (hmc_total > 0) out["hmc"] = hmc_accept_sum / hmc_total;
  if (mh_total > 0) out["mh"] = static_cast<double>(mh_accept) / mh_total;
  if (divergences > 0) out["divergences"] = static_cast<double>(divergences);
  if (aborted_steps > 0) out["aborted_steps"] = static_cast<double>(aborted_steps);
  return out;
}

Theta initial_theta(const ModelSpec& model) {
  Theta theta;
  theta.beta1 = Eigen::VectorXd::Zero(model.k1());
  theta.beta2 = Eigen::VectorXd::Zero(model.k2());
  switch (model.family) {
    case Family::BivProbit:
    case Family::MixedGaussian: theta.dep = 0.0; break;
    case Family::MixedClayton: theta.dep = 0.1; break;
    case Family::MixedGumbel: theta.dep = 1.01; break;
  }
  theta.tau1_sq = 1.0;
  theta.tau2_sq = 1.0;
  theta.rho_alpha = 0.0;
  return theta;
}

RwStepResult adaptive_rw_step(double value, double current_logdens,
                              const std::function<double(double)>& log_density,
                              double& rw_log_scale, long iter, RngStream& rng) {
  if (std::isnan(current_logdens)) current_logdens = log_density(value);
  const double proposal = value + std::exp(rw_log_scale) * rng.normal();
  const double prop_logdens = log_density(proposal);
  const bool accepted = std::log(rng.uniform()) < prop_logdens - current_logdens;
  rw_log_scale += kRwGain * ((accepted ? 1.0 : 0.0) - kRwTargetRate) /
                  static_cast<double>(std::max<long>(iter, 1));
  if (accepted) return {proposal, prop_logdens, true};
  return {value, current_logdens, false};
}

Eigen::Matrix2d wishart_gibbs_update(const Eigen::MatrixXd& alpha, double v0,
                                     const Eigen::Matrix2d& R0, RngStream& rng) {
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  for (Eigen::Index i = 0; i < alpha.rows(); ++i) {
    const Eigen::Vector2d a(alpha(i, 0), alpha(i, 1));
    scatter += a * a.transpose();
  }
  const double v1 = v0 + static_cast<double>(alpha.rows());
  const Eigen::Matrix2d r1 = (R0.inverse() + scatter).inverse();
  const Eigen::Matrix2d precision = sample_wishart(v1, r1, rng);
  return precision.inverse();
}

// ---------------------------------------------------------------------------
// Shared theta blocks

void update_theta_blocks(const ModelSpec& model, const PanelData& data, const Priors& priors,
                         NutsSampler& nuts, SamplerState& state, RngPool& pool) {
  // (1) conjugate Sigma_alpha update given the conditioning random effects
  const Eigen::Matrix2d sigma =
      wishart_gibbs_update(state.alpha_ref, priors.v0, priors.R0(), pool.chain);
  state.theta.set_sigma_alpha(sigma);

  // (2) dependence parameter by adaptive RW on the unconstrained scale
  RandomEffects re{state.alpha_ref};
  auto dep_logdens = [&](double un) {
    const double dep = dep_from_unconstrained(model.family, un);
    if (!model.dep_in_domain(dep)) return kNegInf;
    Theta cand = state.theta;
    cand.dep = dep;
    const double lp = log_dep_prior(model, dep, priors);
    if (!std::isfinite(lp)) return kNegInf;
    return loglik_conditional(model, cand, re, data) + lp +
           std::log(dep_jacobian(model.family, dep));
  };
  const double un = dep_to_unconstrained(model.family, state.theta.dep);
  const RwStepResult rw = adaptive_rw_step(un, std::numeric_limits<double>::quiet_NaN(),
                                           dep_logdens, state.rw_log_scale, state.iter + 1,
                                           pool.chain);
  state.theta.dep = dep_from_unconstrained(model.family, rw.value);
  state.accept.dep_total++;
  if (rw.accepted) state.accept.dep_accept++;

  // (3) stacked betas with the Hamiltonian proposal
  const int k1 = model.k1();
  const int k2 = model.k2();
  auto beta_target = [&](const Eigen::VectorXd& beta, Eigen::VectorXd& grad) {
    Theta cand = state.theta;
    cand.beta1 = beta.head(k1);
    cand.beta2 = beta.tail(k2);
    double ll = loglik_and_grad_beta(model, cand, re, data, grad);
    ll += -0.5 * beta.squaredNorm() / priors.beta_var;
    grad -= beta / priors.beta_var;
    return ll;
  };
  Eigen::VectorXd beta(k1 + k2);
  beta << state.theta.beta1, state.theta.beta2;
  beta = nuts.step(beta, beta_target, pool.chain);
  state.theta.beta1 = beta.head(k1);
  state.theta.beta2 = beta.tail(k2);
  state.accept.hmc_accept_sum += nuts.last_accept_stat();
  state.accept.hmc_total++;
  state.accept.divergences = nuts.divergences();
}

// ---------------------------------------------------------------------------
// PMwG

PmwgSampler::PmwgSampler(const ModelSpec& model, const PanelData& data, const Priors& priors,
                         int N, const HmcConfig& hmc, int warmup)
    : model_(model),
      data_(&data),
      priors_(priors),
      n_particles_(N),
      nuts_(model.k1() + model.k2(), hmc.target_accept, hmc.max_leapfrog, warmup) {
  if (N < 2) throw std::invalid_argument("PMwG requires N >= 2 particles");
}

SamplerState PmwgSampler::init(RngPool& pool) {
  SamplerState state;
  state.theta = initial_theta(model_);
  const PanelParticleModel pm(model_, state.theta, *data_);
  const ParticleCloud cloud = propose_particles(pm, data_->P, n_particles_, pool);
  state.k = sample_indices(cloud, pool.chain);
  state.alpha_ref.resize(data_->P, 2);
  for (int i = 0; i < data_->P; ++i) {
    state.alpha_ref(i, 0) = cloud.alpha(i, state.k[i], 0);
    state.alpha_ref(i, 1) = cloud.alpha(i, state.k[i], 1);
  }
  return state;
}

void PmwgSampler::step(SamplerState& state, RngPool& pool) {
  const SamplerState backup = state;
  try {
    step_impl(state, pool);
  } catch (const std::exception&) {
    state = backup;
    state.accept.aborted_steps++;
  }
  state.iter++;
}

void PmwgSampler::step_impl(SamplerState& state, RngPool& pool) {
  // theta blocks condition on the selected particles only and must run before
  // the refresh of the unselected ones
  update_theta_blocks(model_, *data_, priors_, nuts_, state, pool);

  // (4)-(5) conditional refresh and index selection at the new theta
  const PanelParticleModel pm(model_, state.theta, *data_);
  particle_gibbs_refresh(pm, data_->P, state.alpha_ref, state.k, n_particles_, pool);
}

// ---------------------------------------------------------------------------
// PMMH

PmmhSampler::PmmhSampler(const ModelSpec& model, const PanelData& data, const Priors& priors,
                         int N, int warmup)
    : model_(model),
      data_(&data),
      priors_(priors),
      n_particles_(N),
      warmup_(warmup),
      dim_(model.k1() + model.k2() + 4) {
  if (N < 1) throw std::invalid_argument("PMMH requires N >= 1 particles");
  rw_log_scale_ = std::log(2.56 / std::sqrt(static_cast<double>(dim_)));
  running_mean_ = Eigen::VectorXd::Zero(dim_);
  running_cov_ = Eigen::MatrixXd::Zero(dim_, dim_);
  prop_chol_ = Eigen::MatrixXd::Identity(dim_, dim_);
}

Eigen::VectorXd PmmhSampler::pack(const Theta& theta) const {
  Eigen::VectorXd z(dim_);
  z << theta.beta1, theta.beta2, dep_to_unconstrained(model_.family, theta.dep),
      std::log(theta.tau1_sq), std::log(theta.tau2_sq), std::atanh(theta.rho_alpha);
  return z;
}

Theta PmmhSampler::unpack(const Eigen::VectorXd& z) const {
  Theta theta;
  const int k1 = model_.k1();
  const int k2 = model_.k2();
  theta.beta1 = z.head(k1);
  theta.beta2 = z.segment(k1, k2);
  theta.dep = dep_from_unconstrained(model_.family, z[k1 + k2]);
  theta.tau1_sq = std::exp(z[k1 + k2 + 1]);
  theta.tau2_sq = std::exp(z[k1 + k2 + 2]);
  theta.rho_alpha = std::tanh(z[k1 + k2 + 3]);
  return theta;
}

SamplerState PmmhSampler::init(RngPool& pool) {
  SamplerState state;
  state.theta = initial_theta(model_);
  z_ = pack(state.theta);
  const PanelParticleModel pm(model_, state.theta, *data_);
  const ParticleCloud cloud = propose_particles(pm, data_->P, n_particles_, pool);
  log_phat_ = estimate_loglik(cloud);
  log_post_ = log_prior(model_, state.theta, priors_, /*unconstrained_coords=*/true);
  state.k = sample_indices(cloud, pool.chain);
  state.alpha_ref.resize(data_->P, 2);
  for (int i = 0; i < data_->P; ++i) {
    state.alpha_ref(i, 0) = cloud.alpha(i, state.k[i], 0);
    state.alpha_ref(i, 1) = cloud.alpha(i, state.k[i], 1);
  }
  return state;
}

void PmmhSampler::step(SamplerState& state, RngPool& pool) {
  Eigen::VectorXd noise(dim_);
  for (int j = 0; j < dim_; ++j) noise[j] = pool.chain.normal();
  const Eigen::VectorXd z_prop = z_ + std::exp(rw_log_scale_) * (prop_chol_ * noise);
  const Theta theta_prop = unpack(z_prop);

  bool accepted = false;
  const double log_prior_prop = log_prior(model_, theta_prop, priors_, true);
  if (std::isfinite(log_prior_prop) && theta_prop.sigma_alpha_valid()) {
    const PanelParticleModel pm(model_, theta_prop, *data_);
    const ParticleCloud cloud = propose_particles(pm, data_->P, n_particles_, pool);
    const double log_phat_prop = estimate_loglik(cloud);
    const double log_ratio = (log_phat_prop + log_prior_prop) - (log_phat_ + log_post_);
    if (std::log(pool.chain.uniform()) < log_ratio) {
      accepted = true;
      z_ = z_prop;
      state.theta = theta_prop;
      log_phat_ = log_phat_prop;  // stored; the incumbent is never re-estimated
      log_post_ = log_prior_prop;
      state.k = sample_indices(cloud, pool.chain);
      for (int i = 0; i < data_->P; ++i) {
        state.alpha_ref(i, 0) = cloud.alpha(i, state.k[i], 0);
        state.alpha_ref(i, 1) = cloud.alpha(i, state.k[i], 1);
      }
    }
  }
  state.accept.mh_total++;
  if (accepted) state.accept.mh_accept++;

  if (state.iter < warmup_) {
    // scalar scale toward 0.234 and covariance shape from the history
    rw_log_scale_ += kRwGain * ((accepted ? 1.0 : 0.0) - 0.234) /
                     static_cast<double>(std::max<long>(state.iter + 1, 1));
    ++n_adapt_;
    const Eigen::VectorXd delta = z_ - running_mean_;
    running_mean_ += delta / static_cast<double>(n_adapt_);
    running_cov_ += delta * (z_ - running_mean_).transpose();
    if (n_adapt_ >= 2 * dim_ && n_adapt_ % 100 == 0) {
      Eigen::MatrixXd cov = running_cov_ / static_cast<double>(n_adapt_ - 1);
      cov += 1e-8 * Eigen::MatrixXd::Identity(dim_, dim_);
      const Eigen::LLT<Eigen::MatrixXd> llt(cov);
      if (llt.info() == Eigen::Success) prop_chol_ = llt.matrixL();
    }
  }
  state.iter++;
}

// ---------------------------------------------------------------------------
// Data augmentation (bivariate probit)

DaGibbsSampler::DaGibbsSampler(const ModelSpec& model, const PanelData& data,
                               const Priors& priors)
    : model_(model), data_(&data), priors_(priors) {
  if (model.family != Family::BivProbit)
    throw std::invalid_argument("da-gibbs applies to the bivariate probit family only");
  const int k1 = model.k1();
  const int k2 = model.k2();
  g11_ = Eigen::MatrixXd::Zero(k1, k1);
  g12_ = Eigen::MatrixXd::Zero(k1, k2);
  g22_ = Eigen::MatrixXd::Zero(k2, k2);
  for (Eigen::Index r = 0; r < data.W1.rows(); ++r) {
    g11_ += data.W1.row(r).transpose() * data.W1.row(r);
    g12_ += data.W1.row(r).transpose() * data.W2.row(r);
    g22_ += data.W2.row(r).transpose() * data.W2.row(r);
  }
}

SamplerState DaGibbsSampler::init(RngPool& pool) {
  SamplerState state;
  state.theta = initial_theta(model_);
  state.alpha_ref = Eigen::MatrixXd::Zero(data_->P, 2);
  const std::size_t n = static_cast<std::size_t>(data_->P) * data_->T;
  ystar1_.assign(n, 0.0);
  ystar2_.assign(n, 0.0);
  // start the latents at +-1 on the side their outcome requires
  for (std::size_t r = 0; r < n; ++r) {
    ystar1_[r] = data_->y1[r] > 0.5 ? 1.0 : -1.0;
    ystar2_[r] = data_->y2[r] > 0.5 ? 1.0 : -1.0;
  }
  (void)pool;
  return state;
}

void DaGibbsSampler::update_latents(const SamplerState& state, RngPool& pool) {
  const double rho = state.theta.dep;
  const double s = std::sqrt(1.0 - rho * rho);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < data_->P; ++i) {
    RngStream& rng = pool.individual[i];
    for (int t = 0; t < data_->T; ++t) {
      const auto r = data_->cell(i, t);
      const double eta1 = data_->W1.row(r).dot(state.theta.beta1) + state.alpha_ref(i, 0);
      const double eta2 = data_->W2.row(r).dot(state.theta.beta2) + state.alpha_ref(i, 1);
      const double mu12 = eta1 + rho * (ystar2_[r] - eta2);
      ystar1_[r] = (data_->y1[r] > 0.5)
                       ? sample_truncated_normal(mu12, s, 0.0,
                                                 std::numeric_limits<double>::infinity(), rng)
                       : sample_truncated_normal(mu12, s,
                                                 -std::numeric_limits<double>::infinity(), 0.0,
                                                 rng);
      const double mu21 = eta2 + rho * (ystar1_[r] - eta1);
      ystar2_[r] = (data_->y2[r] > 0.5)
                       ? sample_truncated_normal(mu21, s, 0.0,
                                                 std::numeric_limits<double>::infinity(), rng)
                       : sample_truncated_normal(mu21, s,
                                                 -std::numeric_limits<double>::infinity(), 0.0,
                                                 rng);
    }
  }
}

void DaGibbsSampler::update_alpha(SamplerState& state, RngPool& pool) {
  const double rho = state.theta.dep;
  Eigen::Matrix2d sigma_eps;
  sigma_eps << 1.0, rho, rho, 1.0;
  const Eigen::Matrix2d sigma_eps_inv = sigma_eps.inverse();
  const Eigen::Matrix2d sigma_alpha_inv = state.theta.sigma_alpha().inverse();
  const Eigen::Matrix2d d_alpha =
      (data_->T * sigma_eps_inv + sigma_alpha_inv).inverse();
  const Eigen::Matrix2d chol = Eigen::LLT<Eigen::Matrix2d>(d_alpha).matrixL();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < data_->P; ++i) {
    RngStream& rng = pool.individual[i];
    Eigen::Vector2d resid_sum = Eigen::Vector2d::Zero();
    for (int t = 0; t < data_->T; ++t) {
      const auto r = data_->cell(i, t);
      resid_sum[0] += ystar1_[r] - data_->W1.row(r).dot(state.theta.beta1);
      resid_sum[1] += ystar2_[r] - data_->W2.row(r).dot(state.theta.beta2);
    }
    const Eigen::Vector2d mean = d_alpha * (sigma_eps_inv * resid_sum);
    const Eigen::Vector2d z(rng.normal(), rng.normal());
    const Eigen::Vector2d draw = mean + chol * z;
    state.alpha_ref(i, 0) = draw[0];
    state.alpha_ref(i, 1) = draw[1];
  }
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> DaGibbsSampler::beta_posterior_moments(
    const SamplerState& state) const {
  const int k1 = model_.k1();
  const int k2 = model_.k2();
  const double rho = state.theta.dep;
  Eigen::Matrix2d sigma_eps;
  sigma_eps << 1.0, rho, rho, 1.0;
  const Eigen::Matrix2d si = sigma_eps.inverse();

  Eigen::MatrixXd precision(k1 + k2, k1 + k2);
  precision.topLeftCorner(k1, k1) = si(0, 0) * g11_;
  precision.topRightCorner(k1, k2) = si(0, 1) * g12_;
  precision.bottomLeftCorner(k2, k1) = si(1, 0) * g12_.transpose();
  precision.bottomRightCorner(k2, k2) = si(1, 1) * g22_;
  precision += Eigen::MatrixXd::Identity(k1 + k2, k1 + k2) / priors_.beta_var;

  Eigen::VectorXd d_beta = Eigen::VectorXd::Zero(k1 + k2);
  for (int i = 0; i < data_->P; ++i) {
    for (int t = 0; t < data_->T; ++t) {
      const auto r = data_->cell(i, t);
      const double e1 = ystar1_[r] - state.alpha_ref(i, 0);
      const double e2 = ystar2_[r] - state.alpha_ref(i, 1);
      d_beta.head(k1) += (si(0, 0) * e1 + si(0, 1) * e2) * data_->W1.row(r).transpose();
      d_beta.tail(k2) += (si(1, 0) * e1 + si(1, 1) * e2) * data_->W2.row(r).transpose();
    }
  }
  const Eigen::VectorXd mean = precision.llt().solve(d_beta);
  return {mean, precision};
}

void DaGibbsSampler::update_beta(SamplerState& state, RngPool& pool) {
  const int k1 = model_.k1();
  const int k2 = model_.k2();
  const auto [mean, precision] = beta_posterior_moments(state);
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw std::runtime_error("beta update: singular precision");
  Eigen::VectorXd z(k1 + k2);
  for (int j = 0; j < k1 + k2; ++j) z[j] = pool.chain.normal();
  // draw = mean + L^{-T} z for precision = L L'
  const Eigen::VectorXd draw = mean + llt.matrixU().solve(z);
  state.theta.beta1 = draw.head(k1);
  state.theta.beta2 = draw.tail(k2);
}

void DaGibbsSampler::update_rho(SamplerState& state, RngPool& pool) {
  double s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (int i = 0; i < data_->P; ++i) {
    for (int t = 0; t < data_->T; ++t) {
      const auto r = data_->cell(i, t);
      const double e1 = ystar1_[r] - data_->W1.row(r).dot(state.theta.beta1) -
                        state.alpha_ref(i, 0);
      const double e2 = ystar2_[r] - data_->W2.row(r).dot(state.theta.beta2) -
                        state.alpha_ref(i, 1);
      s11 += e1 * e1;
      s22 += e2 * e2;
      s12 += e1 * e2;
    }
  }
  const double n_cells = static_cast<double>(data_->P) * data_->T;
  auto rho_logdens = [&](double un) {
    const double rho = std::tanh(un);
    if (!(std::fabs(rho) < 1.0)) return kNegInf;
    const double om = 1.0 - rho * rho;
    const double ll =
        -0.5 * n_cells * std::log(om) - 0.5 * (s11 - 2.0 * rho * s12 + s22) / om;
    return ll + std::log(om);  // flat prior on (-1,1) plus the atanh Jacobian
  };
  const RwStepResult rw =
      adaptive_rw_step(std::atanh(state.theta.dep), std::numeric_limits<double>::quiet_NaN(),
                       rho_logdens, state.rw_log_scale, state.iter + 1, pool.chain);
  state.theta.dep = std::tanh(rw.value);
  state.accept.dep_total++;
  if (rw.accepted) state.accept.dep_accept++;
}

void DaGibbsSampler::step(SamplerState& state, RngPool& pool) {
  update_latents(state, pool);
  update_alpha(state, pool);
  update_beta(state, pool);
  state.theta.set_sigma_alpha(
      wishart_gibbs_update(state.alpha_ref, priors_.v0, priors_.R0(), pool.chain));
  update_rho(state, pool);
  state.iter++;
}

// ---------------------------------------------------------------------------
// MCMC-MH comparator

McmcMhSampler::McmcMhSampler(const ModelSpec& model, const PanelData& data, const Priors& priors,
                             int n_inner, const HmcConfig& hmc, int warmup)
    : model_(model),
      data_(&data),
      priors_(priors),
      n_inner_(n_inner),
      nuts_(model.k1() + model.k2(), hmc.target_accept, hmc.max_leapfrog, warmup) {
  if (n_inner < 1) throw std::invalid_argument("mcmc-mh: n_inner must be >= 1");
}

SamplerState McmcMhSampler::init(RngPool& pool) {
  SamplerState state;
  state.theta = initial_theta(model_);
  // start the random effects at a prior draw
  state.alpha_ref.resize(data_->P, 2);
  const PanelParticleModel pm(model_, state.theta, *data_);
  for (int i = 0; i < data_->P; ++i) {
    double a1, a2;
    pm.propose_alpha(i, pool.individual[i], a1, a2);
    state.alpha_ref(i, 0) = a1;
    state.alpha_ref(i, 1) = a2;
  }
  return state;
}

void McmcMhSampler::step(SamplerState& state, RngPool& pool) {
  update_theta_blocks(model_, *data_, priors_, nuts_, state, pool);
  const PanelParticleModel pm(model_, state.theta, *data_);
  const long acc = mh_refresh(pm, data_->P, state.alpha_ref, n_inner_, pool);
  state.accept.mh_accept += acc;
  state.accept.mh_total += static_cast<long>(data_->P) * n_inner_;
  state.iter++;
}

}  // namespace ppmc
