#include "ppmc/hmc.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmc {

namespace {
constexpr double kDivergenceThreshold = 1000.0;
}

MassOps::MassOps(int dim) : dim_(dim), identity_(true) {}

MassOps::MassOps(const Eigen::MatrixXd& mass) : dim_(static_cast<int>(mass.rows())) {
  if (mass.size() == 0) {
    identity_ = true;
    return;
  }
  identity_ = false;
  Eigen::LLT<Eigen::MatrixXd> llt(mass);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("HMC mass matrix is not positive definite");
  chol_l_ = llt.matrixL();
}

MassOps MassOps::from_diag_variance(const Eigen::VectorXd& var) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(var.size(), var.size());
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    if (!(var[i] > 0.0)) throw std::domain_error("mass matrix: nonpositive variance estimate");
    m(i, i) = 1.0 / var[i];
  }
  return MassOps(m);
}

Eigen::VectorXd MassOps::sample_momentum(RngStream& rng) const {
  Eigen::VectorXd z(dim_);
  for (int i = 0; i < dim_; ++i) z[i] = rng.normal();
  if (identity_) return z;
  return chol_l_ * z;
}

Eigen::VectorXd MassOps::velocity(const Eigen::VectorXd& r) const {
  if (identity_) return r;
  // M^{-1} r via the Cholesky factor of M
  Eigen::VectorXd y = chol_l_.triangularView<Eigen::Lower>().solve(r);
  return chol_l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

double MassOps::kinetic(const Eigen::VectorXd& r) const {
  if (identity_) return 0.5 * r.squaredNorm();
  return 0.5 * r.dot(velocity(r));
}

Eigen::MatrixXd MassOps::matrix() const {
  if (identity_) return Eigen::MatrixXd::Identity(dim_, dim_);
  return chol_l_ * chol_l_.transpose();
}

void leapfrog(Eigen::VectorXd& beta, Eigen::VectorXd& r, double eps,
              const LogDensityAndGrad& target, const MassOps& mass) {
  Eigen::VectorXd grad(beta.size());
  target(beta, grad);
  if (!grad.allFinite()) throw std::runtime_error("leapfrog: non-finite gradient");
  r += 0.5 * eps * grad;
  beta += eps * mass.velocity(r);
  target(beta, grad);
  if (!grad.allFinite()) throw std::runtime_error("leapfrog: non-finite gradient");
  r += 0.5 * eps * grad;
}

HmcResult hmc_propose(const Eigen::VectorXd& beta0, const LogDensityAndGrad& target,
                      const HmcConfig& config, RngStream& rng) {
  const MassOps mass = config.mass.size() > 0 ? MassOps(config.mass)
                                              : MassOps(static_cast<int>(beta0.size()));
  Eigen::VectorXd grad(beta0.size());
  const double logp0 = target(beta0, grad);
  Eigen::VectorXd r = mass.sample_momentum(rng);
  const double h0 = -logp0 + mass.kinetic(r);

  Eigen::VectorXd beta = beta0;
  // chained leapfrog: one gradient per step plus the two half-kicks
  r += 0.5 * config.step_size * grad;
  for (int l = 0; l < config.max_leapfrog; ++l) {
    beta += config.step_size * mass.velocity(r);
    const double kick = (l + 1 == config.max_leapfrog) ? 0.5 : 1.0;
    target(beta, grad);
    if (!grad.allFinite()) throw std::runtime_error("hmc_propose: non-finite gradient");
    r += kick * config.step_size * grad;
  }
  Eigen::VectorXd g_unused(beta.size());
  const double logp1 = target(beta, g_unused);
  const double h1 = -logp1 + mass.kinetic(r);

  HmcResult res;
  res.delta_h = h1 - h0;
  if (!std::isfinite(res.delta_h) || std::fabs(res.delta_h) > kDivergenceThreshold) {
    res.beta = beta0;
    res.divergent = true;
    return res;
  }
  res.accept_prob = std::min(1.0, std::exp(-res.delta_h));
  if (std::log(rng.uniform()) < -res.delta_h) {
    res.beta = beta;
    res.accepted = true;
  } else {
    res.beta = beta0;
  }
  return res;
}

namespace {

struct TreeNode {
  Eigen::VectorXd beta, r, grad;
  double logp;
};

struct TreeState {
  TreeNode minus, plus;
  Eigen::VectorXd proposal;
  double n_valid = 0.0;
  double sum_accept = 0.0;
  double n_leaves = 0.0;
  bool ok = true;  // no U-turn, no divergence
  bool divergent = false;
};

// One leapfrog move of a single edge node, reusing its cached gradient.
TreeNode leapfrog_node(const TreeNode& node, double eps, const LogDensityAndGrad& target,
                       const MassOps& mass) {
  TreeNode out;
  out.r = node.r + 0.5 * eps * node.grad;
  out.beta = node.beta + eps * mass.velocity(out.r);
  out.grad.resize(out.beta.size());
  out.logp = target(out.beta, out.grad);
  out.r += 0.5 * eps * out.grad;
  return out;
}

bool no_u_turn(const TreeNode& minus, const TreeNode& plus, const MassOps& mass) {
  const Eigen::VectorXd span = plus.beta - minus.beta;
  return span.dot(mass.velocity(minus.r)) >= 0.0 && span.dot(mass.velocity(plus.r)) >= 0.0;
}

void build_tree(const TreeNode& from, double log_u, int dir, int depth, double eps, double h0,
                const LogDensityAndGrad& target, const MassOps& mass, RngStream& rng,
                TreeState& out) {
  if (depth == 0) {
    TreeNode node = leapfrog_node(from, dir * eps, target, mass);
    const double h = -node.logp + mass.kinetic(node.r);
    const double log_weight = -h;  // slice check against log_u
    out.minus = node;
    out.plus = node;
    out.proposal = node.beta;
    out.n_valid = (log_u <= log_weight) ? 1.0 : 0.0;
    out.divergent = !std::isfinite(h) || (log_u - kDivergenceThreshold > log_weight);
    out.ok = !out.divergent;
    out.sum_accept = std::isfinite(h) ? std::min(1.0, std::exp(h0 - h)) : 0.0;
    out.n_leaves = 1.0;
    return;
  }
  TreeState first;
  build_tree(from, log_u, dir, depth - 1, eps, h0, target, mass, rng, first);
  out = first;
  if (!first.ok) return;
  TreeState second;
  const TreeNode& edge = (dir == 1) ? first.plus : first.minus;
  build_tree(edge, log_u, dir, depth - 1, eps, h0, target, mass, rng, second);
  if (dir == 1)
    out.plus = second.plus;
  else
    out.minus = second.minus;
  const double total = first.n_valid + second.n_valid;
  if (second.n_valid > 0.0 && rng.uniform() * total < second.n_valid)
    out.proposal = second.proposal;
  out.n_valid = total;
  out.sum_accept = first.sum_accept + second.sum_accept;
  out.n_leaves = first.n_leaves + second.n_leaves;
  out.divergent = second.divergent;
  out.ok = second.ok && !second.divergent && no_u_turn(out.minus, out.plus, mass);
}

}  // namespace

NutsResult nuts_step(const Eigen::VectorXd& beta, const LogDensityAndGrad& target, double eps,
                     const MassOps& mass, int max_depth, RngStream& rng) {
  TreeNode root;
  root.beta = beta;
  root.grad.resize(beta.size());
  root.logp = target(beta, root.grad);
  root.r = mass.sample_momentum(rng);
  const double h0 = -root.logp + mass.kinetic(root.r);
  const double log_u = -h0 + std::log(rng.uniform());

  NutsResult res;
  res.beta = beta;
  TreeState state;
  state.minus = root;
  state.plus = root;
  state.proposal = beta;
  state.n_valid = 1.0;

  double sum_accept = 0.0, n_leaves = 0.0;
  for (int depth = 0; depth < max_depth; ++depth) {
    const int dir = rng.uniform() < 0.5 ? -1 : 1;
    TreeState sub;
    const TreeNode& edge = (dir == 1) ? state.plus : state.minus;
    build_tree(edge, log_u, dir, depth, eps, h0, target, mass, rng, sub);
    if (dir == 1)
      state.plus = sub.plus;
    else
      state.minus = sub.minus;
    sum_accept += sub.sum_accept;
    n_leaves += sub.n_leaves;
    if (sub.divergent) res.divergent = true;
    if (!sub.ok) break;
    if (sub.n_valid > 0.0 && rng.uniform() * state.n_valid < sub.n_valid)
      res.beta = sub.proposal;
    state.n_valid += sub.n_valid;
    res.depth = depth + 1;
    if (!no_u_turn(state.minus, state.plus, mass)) break;
  }
  res.accept_stat = n_leaves > 0.0 ? sum_accept / n_leaves : 0.0;
  return res;
}

DualAveraging::DualAveraging(double eps0, double target_accept)
    : mu_(std::log(10.0 * eps0)),
      log_eps_(std::log(eps0)),
      log_eps_bar_(0.0),
      h_bar_(0.0),
      target_(target_accept),
      iter_(0) {}

void DualAveraging::update(double accept_stat) {
  static constexpr double kGamma = 0.05, kT0 = 10.0, kKappa = 0.75;
  ++iter_;
  const double frac = 1.0 / (iter_ + kT0);
  h_bar_ = (1.0 - frac) * h_bar_ + frac * (target_ - accept_stat);
  log_eps_ = mu_ - std::sqrt(static_cast<double>(iter_)) / kGamma * h_bar_;
  const double w = std::pow(static_cast<double>(iter_), -kKappa);
  log_eps_bar_ = w * log_eps_ + (1.0 - w) * log_eps_bar_;
  if (!std::isfinite(log_eps_) || log_eps_ < std::log(1e-12))
    throw std::runtime_error("dual averaging diverged: step size collapsed toward zero");
}

double DualAveraging::eps() const { return std::exp(log_eps_); }
double DualAveraging::eps_frozen() const { return std::exp(log_eps_bar_); }
void DualAveraging::reset(double eps0) {
  mu_ = std::log(10.0 * eps0);
  log_eps_ = std::log(eps0);
  log_eps_bar_ = 0.0;
  h_bar_ = 0.0;
  iter_ = 0;
}

double find_reasonable_epsilon(const Eigen::VectorXd& beta, const LogDensityAndGrad& target,
                               const MassOps& mass, RngStream& rng) {
  double eps = 1.0;
  Eigen::VectorXd grad(beta.size());
  const double logp0 = target(beta, grad);
  Eigen::VectorXd r0 = mass.sample_momentum(rng);
  const double h0 = -logp0 + mass.kinetic(r0);

  auto dh_for = [&](double e) {
    Eigen::VectorXd b = beta, r = r0;
    try {
      leapfrog(b, r, e, target, mass);
    } catch (const std::runtime_error&) {
      return 2.0 * kDivergenceThreshold;
    }
    Eigen::VectorXd g(b.size());
    const double h1 = -target(b, g) + mass.kinetic(r);
    return h1 - h0;
  };

  double dh = dh_for(eps);
  const double dir = (dh < std::log(2.0)) ? 1.0 : -1.0;  // accept prob vs 1/2
  for (int it = 0; it < 60; ++it) {
    eps = (dir > 0) ? eps * 2.0 : eps * 0.5;
    dh = dh_for(eps);
    const bool still = (dir > 0) ? (dh < std::log(2.0)) : (dh > std::log(2.0));
    if (!still) break;
  }
  return std::max(eps, 1e-10);
}

NutsSampler::NutsSampler(int dim, double target_accept, int max_depth, int warmup_iters)
    : dim_(dim),
      max_depth_(max_depth),
      warmup_(warmup_iters),
      target_(target_accept),
      mass_(dim),
      da_(0.1, target_accept) {
  const int pilot = warmup_ / 2;
  pilot_draws_.resize(std::max(pilot, 1), dim);
}

double NutsSampler::current_eps() const { return warming_up() ? da_.eps() : frozen_eps_; }

Eigen::VectorXd NutsSampler::step(const Eigen::VectorXd& beta, const LogDensityAndGrad& target,
                                  RngStream& rng) {
  if (!initialized_) {
    da_.reset(find_reasonable_epsilon(beta, target, mass_, rng));
    initialized_ = true;
  }
  const double eps = current_eps();
  NutsResult res = nuts_step(beta, target, eps, mass_, max_depth_, rng);
  last_accept_ = res.accept_stat;
  if (res.divergent) ++divergences_;

  if (warming_up()) {
    da_.update(res.accept_stat);
    const int pilot = warmup_ / 2;
    if (iter_ < pilot) {
      pilot_draws_.row(pilot_count_++) = res.beta;
      if (iter_ + 1 == pilot && pilot_count_ > 10) {
        // estimate the posterior scale from the pilot draws, then retune eps
        const Eigen::MatrixXd draws = pilot_draws_.topRows(pilot_count_);
        const Eigen::RowVectorXd mean = draws.colwise().mean();
        const Eigen::MatrixXd centered = draws.rowwise() - mean;
        if (full_cov_) {
          Eigen::MatrixXd cov =
              centered.transpose() * centered / static_cast<double>(pilot_count_ - 1);
          cov += 1e-8 * Eigen::MatrixXd::Identity(dim_, dim_);
          mass_ = MassOps(cov.inverse());
        } else {
          Eigen::VectorXd var =
              centered.array().square().colwise().sum() / static_cast<double>(pilot_count_ - 1);
          var = var.cwiseMax(1e-10);
          mass_ = MassOps::from_diag_variance(var);
        }
        da_.reset(find_reasonable_epsilon(res.beta, target, mass_, rng));
      }
    }
    ++iter_;
    if (!warming_up()) frozen_eps_ = da_.eps_frozen();
  } else {
    ++iter_;
  }
  return res.beta;
}

HmcConfig NutsSampler::config() const {
  HmcConfig c;
  c.step_size = warming_up() ? da_.eps_frozen() : frozen_eps_;
  c.mass = mass_.matrix();
  c.max_leapfrog = max_depth_;
  c.target_accept = target_;
  c.adapt_iters = warmup_;
  return c;
}

HmcConfig nuts_adapt(const Eigen::VectorXd& beta0, const LogDensityAndGrad& target,
                     double target_accept, int adapt_iters, RngStream& rng,
                     Eigen::VectorXd* final_beta) {
  if (adapt_iters < 100) throw std::invalid_argument("nuts_adapt: need at least 100 iterations");
  NutsSampler sampler(static_cast<int>(beta0.size()), target_accept, 10, adapt_iters);
  Eigen::VectorXd beta = beta0;
  for (int it = 0; it < adapt_iters; ++it) beta = sampler.step(beta, target, rng);
  if (final_beta) *final_beta = beta;
  return sampler.config();
}

}  // namespace ppmc
