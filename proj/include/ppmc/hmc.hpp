#pragma once

#include <Eigen/Dense>
#include <functional>

#include "ppmc/rng.hpp"

namespace ppmc {

/// Log target density with gradient: returns log p(beta) up to a constant and
/// fills grad with its gradient.
using LogDensityAndGrad = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Tuning state for the Hamiltonian proposal. mass is the momentum covariance
/// M; an empty matrix means the identity. max_leapfrog is the trajectory
/// length for plain HMC and the maximum tree depth for NUTS.
struct HmcConfig {
  double step_size = 0.1;
  Eigen::MatrixXd mass;
  int max_leapfrog = 10;
  double target_accept = 0.8;
  int adapt_iters = 1000;
};

/// Momentum-covariance operations shared by the integrators.
class MassOps {
 public:
  explicit MassOps(int dim);                          // identity
  explicit MassOps(const Eigen::MatrixXd& mass);      // full matrix
  static MassOps from_diag_variance(const Eigen::VectorXd& var);  // M = diag(1/var)

  int dim() const { return dim_; }
  Eigen::VectorXd sample_momentum(RngStream& rng) const;
  Eigen::VectorXd velocity(const Eigen::VectorXd& r) const;  // M^{-1} r
  double kinetic(const Eigen::VectorXd& r) const;            // 0.5 r' M^{-1} r
  Eigen::MatrixXd matrix() const;

 private:
  int dim_;
  bool identity_;
  Eigen::MatrixXd chol_l_;  // lower Cholesky factor of M
};

/// One leapfrog update: half momentum kick, full position drift with M^{-1} r,
/// half momentum kick. Throws on a non-finite gradient.
void leapfrog(Eigen::VectorXd& beta, Eigen::VectorXd& r, double eps,
              const LogDensityAndGrad& target, const MassOps& mass);

struct HmcResult {
  Eigen::VectorXd beta;
  bool accepted = false;
  bool divergent = false;
  double accept_prob = 0.0;  // min(1, exp(-dH))
  double delta_h = 0.0;
};

/// Plain HMC with a fixed number of leapfrog steps (config.max_leapfrog).
HmcResult hmc_propose(const Eigen::VectorXd& beta, const LogDensityAndGrad& target,
                      const HmcConfig& config, RngStream& rng);

struct NutsResult {
  Eigen::VectorXd beta;
  double accept_stat = 0.0;  // mean leaf acceptance, drives dual averaging
  int depth = 0;
  bool divergent = false;
};

/// One No-U-Turn transition with a doubling trajectory tree.
NutsResult nuts_step(const Eigen::VectorXd& beta, const LogDensityAndGrad& target, double eps,
                     const MassOps& mass, int max_depth, RngStream& rng);

/// Nesterov dual averaging of log(step size) toward a target acceptance.
class DualAveraging {
 public:
  DualAveraging(double eps0, double target_accept);
  void update(double accept_stat);
  double eps() const;         // current (adapting) step size
  double eps_frozen() const;  // averaged step size to freeze at
  void reset(double eps0);

 private:
  double mu_, log_eps_, log_eps_bar_, h_bar_, target_;
  int iter_;
};

/// Crude but robust initial step size: double/halve until one leapfrog step
/// has acceptance probability on the far side of 1/2.
double find_reasonable_epsilon(const Eigen::VectorXd& beta, const LogDensityAndGrad& target,
                               const MassOps& mass, RngStream& rng);

/// NUTS driver owning the warmup schedule: dual averaging throughout warmup,
/// mass matrix re-estimated from pilot draws halfway through, both frozen
/// afterwards.
class NutsSampler {
 public:
  NutsSampler(int dim, double target_accept, int max_depth, int warmup_iters);

  Eigen::VectorXd step(const Eigen::VectorXd& beta, const LogDensityAndGrad& target,
                       RngStream& rng);

  bool warming_up() const { return iter_ < warmup_; }
  double current_eps() const;
  const MassOps& mass() const { return mass_; }
  double last_accept_stat() const { return last_accept_; }
  long divergences() const { return divergences_; }
  HmcConfig config() const;
  void use_full_covariance(bool on) { full_cov_ = on; }

 private:
  int dim_, max_depth_, warmup_, iter_ = 0;
  double target_;
  bool full_cov_ = false;
  bool initialized_ = false;
  MassOps mass_;
  DualAveraging da_;
  double frozen_eps_ = 0.1;
  double last_accept_ = 0.0;
  long divergences_ = 0;
  Eigen::MatrixXd pilot_draws_;  // rows collected during the pilot phase
  int pilot_count_ = 0;
};

/// Warmup on a fixed target; returns the frozen configuration.
/// adapt_iters must be at least 100.
HmcConfig nuts_adapt(const Eigen::VectorXd& beta0, const LogDensityAndGrad& target,
                     double target_accept, int adapt_iters, RngStream& rng,
                     Eigen::VectorXd* final_beta = nullptr);

}  // namespace ppmc
