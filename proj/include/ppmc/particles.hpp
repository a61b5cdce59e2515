#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ppmc/data.hpp"
#include "ppmc/models.hpp"
#include "ppmc/rng.hpp"
#include "ppmc/special.hpp"

namespace ppmc {

/// One stream per individual plus a chain-level stream, all derived from
/// (seed, chain index) so any thread layout reproduces the same draws.
struct RngPool {
  RngStream chain;
  std::vector<RngStream> individual;

  RngPool(std::uint64_t seed, std::uint64_t chain_index, int P)
      : chain(seed, chain_index << 32) {
    individual.reserve(P);
    for (int i = 0; i < P; ++i)
      individual.emplace_back(seed, (chain_index << 32) + 1 + static_cast<std::uint64_t>(i));
  }
};

/// N particles per individual with raw log-weights, normalised weights and the
/// selected index per individual.
struct ParticleCloud {
  int P = 0, N = 0;
  std::vector<double> alphas;  // (i*N + j)*2
  std::vector<double> log_w;   // i*N + j
  std::vector<double> wbar;    // i*N + j
  std::vector<int> k;          // per individual, 0-based

  double alpha(int i, int j, int c) const { return alphas[(static_cast<std::size_t>(i) * N + j) * 2 + c]; }
  double& alpha(int i, int j, int c) { return alphas[(static_cast<std::size_t>(i) * N + j) * 2 + c]; }
  Eigen::MatrixXd selected() const {
    Eigen::MatrixXd out(P, 2);
    for (int i = 0; i < P; ++i) {
      out(i, 0) = alpha(i, k[i], 0);
      out(i, 1) = alpha(i, k[i], 1);
    }
    return out;
  }
};

/// Normalise each individual's weights in log space. A row whose weights are
/// all -inf gets uniform wbar (the estimator still reports -inf for it).
inline void normalize_weights(ParticleCloud& cloud) {
  for (int i = 0; i < cloud.P; ++i) {
    const double* lw = &cloud.log_w[static_cast<std::size_t>(i) * cloud.N];
    double* wb = &cloud.wbar[static_cast<std::size_t>(i) * cloud.N];
    const double lse = logsumexp(lw, cloud.N);
    if (!std::isfinite(lse)) {
      for (int j = 0; j < cloud.N; ++j) wb[j] = 1.0 / cloud.N;
    } else {
      for (int j = 0; j < cloud.N; ++j) wb[j] = std::exp(lw[j] - lse);
    }
  }
}

/// Fresh importance cloud: alpha_i^j ~ m_i (the prior), raw log-weight equals
/// the individual's conditional log-likelihood (prior terms cancel against the
/// proposal). M must provide propose_alpha(i, rng, a1, a2) and
/// log_weight(i, a1, a2).
template <class M>
ParticleCloud propose_particles(const M& m, int P, int N, RngPool& pool) {
  if (N < 1) throw std::invalid_argument("propose_particles: N must be >= 1");
  ParticleCloud cloud;
  cloud.P = P;
  cloud.N = N;
  cloud.alphas.resize(static_cast<std::size_t>(P) * N * 2);
  cloud.log_w.resize(static_cast<std::size_t>(P) * N);
  cloud.wbar.resize(static_cast<std::size_t>(P) * N);
  cloud.k.assign(P, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < P; ++i) {
    RngStream& rng = pool.individual[i];
    for (int j = 0; j < N; ++j) {
      double a1, a2;
      m.propose_alpha(i, rng, a1, a2);
      cloud.alpha(i, j, 0) = a1;
      cloud.alpha(i, j, 1) = a2;
      cloud.log_w[static_cast<std::size_t>(i) * N + j] = m.log_weight(i, a1, a2);
    }
  }
  normalize_weights(cloud);
  return cloud;
}

/// Conditional refresh: slot 0 carries the reference particle untouched,
/// slots 1..N-1 are fresh proposals; all N are reweighted. Needs N >= 2.
template <class M>
ParticleCloud conditional_particles(const M& m, int P, const Eigen::MatrixXd& reference, int N,
                                    RngPool& pool) {
  if (N < 2) throw std::invalid_argument("conditional_particles: N must be >= 2");
  if (reference.rows() != P || reference.cols() != 2)
    throw std::invalid_argument("conditional_particles: reference must be P x 2");
  ParticleCloud cloud;
  cloud.P = P;
  cloud.N = N;
  cloud.alphas.resize(static_cast<std::size_t>(P) * N * 2);
  cloud.log_w.resize(static_cast<std::size_t>(P) * N);
  cloud.wbar.resize(static_cast<std::size_t>(P) * N);
  cloud.k.assign(P, 0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < P; ++i) {
    RngStream& rng = pool.individual[i];
    cloud.alpha(i, 0, 0) = reference(i, 0);
    cloud.alpha(i, 0, 1) = reference(i, 1);
    cloud.log_w[static_cast<std::size_t>(i) * N] = m.log_weight(i, reference(i, 0), reference(i, 1));
    for (int j = 1; j < N; ++j) {
      double a1, a2;
      m.propose_alpha(i, rng, a1, a2);
      cloud.alpha(i, j, 0) = a1;
      cloud.alpha(i, j, 1) = a2;
      cloud.log_w[static_cast<std::size_t>(i) * N + j] = m.log_weight(i, a1, a2);
    }
  }
  normalize_weights(cloud);
  return cloud;
}

/// Unbiased log-likelihood estimate: sum_i [logsumexp_j log w_i^j - log N].
inline double estimate_loglik(const ParticleCloud& cloud) {
  double total = 0.0;
  const double log_n = std::log(static_cast<double>(cloud.N));
  for (int i = 0; i < cloud.P; ++i) {
    total += logsumexp(&cloud.log_w[static_cast<std::size_t>(i) * cloud.N], cloud.N) - log_n;
  }
  return total;
}

/// Draw the selection index for every individual, categorical on wbar.
/// Single-threaded over a fixed individual order.
inline std::vector<int> sample_indices(const ParticleCloud& cloud, RngStream& rng) {
  std::vector<int> k(cloud.P);
  for (int i = 0; i < cloud.P; ++i)
    k[i] = rng.categorical(&cloud.wbar[static_cast<std::size_t>(i) * cloud.N], cloud.N);
  return k;
}

/// Panel-model adapter: prior proposal N(0, Sigma_alpha), weight equal to the
/// individual's conditional likelihood.
class PanelParticleModel {
 public:
  PanelParticleModel(const ModelSpec& model, const Theta& theta, const PanelData& data)
      : model_(&model), theta_(&theta), data_(&data) {
    Eigen::LLT<Eigen::Matrix2d> llt(theta.sigma_alpha());
    if (llt.info() != Eigen::Success)
      throw std::domain_error("particle proposal: Sigma_alpha is not positive definite");
    chol_ = llt.matrixL();
  }

  void propose_alpha(int /*i*/, RngStream& rng, double& a1, double& a2) const {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    a1 = chol_(0, 0) * z1;
    a2 = chol_(1, 0) * z1 + chol_(1, 1) * z2;
  }

  double log_weight(int i, double a1, double a2) const {
    return loglik_individual(*model_, *theta_, a1, a2, *data_, i);
  }

 private:
  const ModelSpec* model_;
  const Theta* theta_;
  const PanelData* data_;
  Eigen::Matrix2d chol_;
};

}  // namespace ppmc
