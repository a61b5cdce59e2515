#include "ppmc/models.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppmc/special.hpp"

namespace ppmc {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

constexpr double kPLo = 1e-300;
constexpr double kPHi = 1.0 - 1e-16;

double clamp_unit(double p) {
  if (p < kPLo) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return kPLo;
  }
  if (p > kPHi) {
    g_clamp_count.fetch_add(1, std::memory_order_relaxed);
    return kPHi;
  }
  return p;
}

void require_dep(const ModelSpec& model, double dep) {
  if (!model.dep_in_domain(dep))
    throw std::domain_error("dependence parameter outside the family domain");
}

}  // namespace

double log_clamped(double p) { return std::log(clamp_unit(p)); }
std::uint64_t clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }
void reset_clamp_count() { g_clamp_count.store(0, std::memory_order_relaxed); }

namespace {

// Per-cell pieces shared by the likelihoods and their beta-gradients.

double probit_cell_loglik(double eta1, double eta2, double y1, double y2, double rho) {
  const double q1 = 2.0 * y1 - 1.0;
  const double q2 = 2.0 * y2 - 1.0;
  return log_clamped(bvn_cdf(q1 * eta1, q2 * eta2, q1 * q2 * rho));
}

double mixed_gauss_cell_loglik(double eta1, double eta2, double y1, double y2, double rho) {
  const double zeta = y2 - eta2;
  const double c = (eta1 + rho * zeta) / std::sqrt(1.0 - rho * rho);
  const double p = (y1 > 0.5) ? std_normal_cdf(c) : std_normal_cdf_c(c);
  return log_clamped(p) + std_normal_logpdf(zeta);
}

double copula_cell_loglik(Copula cop, double eta1, double eta2, double y1, double y2,
                          double theta) {
  const double zeta = y2 - eta2;
  const double u1 = clamp_unit(std_normal_cdf(-eta1));
  const double u2 = clamp_unit(std_normal_cdf(zeta));
  const double c12 = copula_cond_cdf(cop, u1, u2, theta);
  const double p = (y1 > 0.5) ? 1.0 - c12 : c12;
  return log_clamped(p) + std_normal_logpdf(zeta);
}

double cell_loglik(const ModelSpec& model, double eta1, double eta2, double y1, double y2,
                   double dep) {
  switch (model.family) {
    case Family::BivProbit: return probit_cell_loglik(eta1, eta2, y1, y2, dep);
    case Family::MixedGaussian: return mixed_gauss_cell_loglik(eta1, eta2, y1, y2, dep);
    case Family::MixedClayton: return copula_cell_loglik(Copula::Clayton, eta1, eta2, y1, y2, dep);
    case Family::MixedGumbel: return copula_cell_loglik(Copula::Gumbel, eta1, eta2, y1, y2, dep);
  }
  return 0.0;
}

template <class CellFn>
double sum_over_panel(const PanelData& data, const Theta& theta, const RandomEffects& re,
                      CellFn cell_fn) {
  std::vector<double> partial(data.P, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < data.P; ++i) {
    double s = 0.0;
    for (int t = 0; t < data.T; ++t) {
      const auto r = data.cell(i, t);
      const double eta1 = data.W1.row(r).dot(theta.beta1) + re.alpha(i, 0);
      const double eta2 = data.W2.row(r).dot(theta.beta2) + re.alpha(i, 1);
      if (!std::isfinite(eta1) || !std::isfinite(eta2))
        throw std::runtime_error("non-finite linear predictor");
      s += cell_fn(eta1, eta2, data.y1[r], data.y2[r]);
    }
    partial[i] = s;
  }
  double total = 0.0;  // serial reduction keeps the sum order fixed
  for (int i = 0; i < data.P; ++i) total += partial[i];
  return total;
}

}  // namespace

double loglik_biv_probit(const Theta& theta, const RandomEffects& re, const PanelData& data) {
  if (!(std::fabs(theta.dep) < 1.0)) throw std::domain_error("loglik_biv_probit: |rho| >= 1");
  return sum_over_panel(data, theta, re, [&](double e1, double e2, double y1, double y2) {
    return probit_cell_loglik(e1, e2, y1, y2, theta.dep);
  });
}

double loglik_mixed_gaussian(const Theta& theta, const RandomEffects& re, const PanelData& data) {
  if (!(std::fabs(theta.dep) < 1.0)) throw std::domain_error("loglik_mixed_gaussian: |rho| >= 1");
  return sum_over_panel(data, theta, re, [&](double e1, double e2, double y1, double y2) {
    return mixed_gauss_cell_loglik(e1, e2, y1, y2, theta.dep);
  });
}

double loglik_mixed_copula(Copula cop, const Theta& theta, const RandomEffects& re,
                           const PanelData& data) {
  copula_check_domain(cop, theta.dep);
  return sum_over_panel(data, theta, re, [&](double e1, double e2, double y1, double y2) {
    return copula_cell_loglik(cop, e1, e2, y1, y2, theta.dep);
  });
}

double loglik_conditional(const ModelSpec& model, const Theta& theta, const RandomEffects& re,
                          const PanelData& data) {
  require_dep(model, theta.dep);
  switch (model.family) {
    case Family::BivProbit: return loglik_biv_probit(theta, re, data);
    case Family::MixedGaussian: return loglik_mixed_gaussian(theta, re, data);
    case Family::MixedClayton: return loglik_mixed_copula(Copula::Clayton, theta, re, data);
    case Family::MixedGumbel: return loglik_mixed_copula(Copula::Gumbel, theta, re, data);
  }
  return 0.0;
}

double loglik_individual(const ModelSpec& model, const Theta& theta, double alpha1, double alpha2,
                         const PanelData& data, int i) {
  double s = 0.0;
  for (int t = 0; t < data.T; ++t) {
    const auto r = data.cell(i, t);
    const double eta1 = data.W1.row(r).dot(theta.beta1) + alpha1;
    const double eta2 = data.W2.row(r).dot(theta.beta2) + alpha2;
    s += cell_loglik(model, eta1, eta2, data.y1[r], data.y2[r], theta.dep);
  }
  return s;
}

namespace {

// Per-cell log-likelihood and the scalar gradient coefficients such that
// d(cell)/d(beta1) = coef1 * w1_row and d(cell)/d(beta2) = coef2 * w2_row.
double cell_loglik_coefs(const ModelSpec& model, double eta1, double eta2, double y1, double y2,
                         double dep, double& coef1, double& coef2) {
  switch (model.family) {
    case Family::BivProbit: {
      const double q1 = 2.0 * y1 - 1.0;
      const double q2 = 2.0 * y2 - 1.0;
      const double w1 = q1 * eta1;
      const double w2 = q2 * eta2;
      const double r = q1 * q2 * dep;
      const double p2 = clamp_unit(bvn_cdf(w1, w2, r));
      const double s = std::sqrt(1.0 - r * r);
      const double g1 = std_normal_pdf(w1) * std_normal_cdf((w2 - r * w1) / s);
      const double g2 = std_normal_pdf(w2) * std_normal_cdf((w1 - r * w2) / s);
      coef1 = q1 * g1 / p2;
      coef2 = q2 * g2 / p2;
      return std::log(p2);
    }
    case Family::MixedGaussian: {
      const double zeta = y2 - eta2;
      const double s = std::sqrt(1.0 - dep * dep);
      const double c = (eta1 + dep * zeta) / s;
      const double pdfc = std_normal_pdf(c);
      double ll;
      double dldc;  // d(cell)/dc
      if (y1 > 0.5) {
        const double p = clamp_unit(std_normal_cdf(c));
        ll = std::log(p);
        dldc = pdfc / p;
      } else {
        const double p = clamp_unit(std_normal_cdf_c(c));
        ll = std::log(p);
        dldc = -pdfc / p;
      }
      coef1 = dldc / s;
      coef2 = dldc * (-dep / s) + zeta;
      return ll + std_normal_logpdf(zeta);
    }
    case Family::MixedClayton:
    case Family::MixedGumbel: {
      const Copula cop =
          model.family == Family::MixedClayton ? Copula::Clayton : Copula::Gumbel;
      const double zeta = y2 - eta2;
      const double u1 = clamp_unit(std_normal_cdf(-eta1));
      const double u2 = clamp_unit(std_normal_cdf(zeta));
      const CondCdfDerivs d = copula_cond_cdf_derivs(cop, u1, u2, dep);
      const double sgn = (y1 > 0.5) ? -1.0 : 1.0;
      const double p = clamp_unit((y1 > 0.5) ? 1.0 - d.value : d.value);
      coef1 = sgn * d.du1 / p * (-std_normal_pdf(eta1));
      coef2 = sgn * d.du2 / p * (-std_normal_pdf(zeta)) + zeta;
      return std::log(p) + std_normal_logpdf(zeta);
    }
  }
  coef1 = coef2 = 0.0;
  return 0.0;
}

}  // namespace

double loglik_and_grad_beta(const ModelSpec& model, const Theta& theta, const RandomEffects& re,
                            const PanelData& data, Eigen::VectorXd& grad) {
  require_dep(model, theta.dep);
  const int k1 = model.k1();
  const int k2 = model.k2();
  Eigen::MatrixXd partial_g = Eigen::MatrixXd::Zero(k1 + k2, data.P);
  std::vector<double> partial_ll(data.P, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < data.P; ++i) {
    double ll = 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(k1 + k2);
    for (int t = 0; t < data.T; ++t) {
      const auto r = data.cell(i, t);
      const double eta1 = data.W1.row(r).dot(theta.beta1) + re.alpha(i, 0);
      const double eta2 = data.W2.row(r).dot(theta.beta2) + re.alpha(i, 1);
      double c1, c2;
      const double cll =
          cell_loglik_coefs(model, eta1, eta2, data.y1[r], data.y2[r], theta.dep, c1, c2);
      if (!std::isfinite(cll) || !std::isfinite(c1) || !std::isfinite(c2))
        throw std::runtime_error("non-finite likelihood/gradient at individual " +
                                 std::to_string(i) + ", period " + std::to_string(t));
      ll += cll;
      g.head(k1) += c1 * data.W1.row(r).transpose();
      g.tail(k2) += c2 * data.W2.row(r).transpose();
    }
    partial_ll[i] = ll;
    partial_g.col(i) = g;
  }
  grad = Eigen::VectorXd::Zero(k1 + k2);
  double total = 0.0;
  for (int i = 0; i < data.P; ++i) {  // fixed-order reduction
    total += partial_ll[i];
    grad += partial_g.col(i);
  }
  return total;
}

Eigen::VectorXd grad_loglik_beta(const ModelSpec& model, const Theta& theta,
                                 const RandomEffects& re, const PanelData& data) {
  Eigen::VectorXd g;
  loglik_and_grad_beta(model, theta, re, data, g);
  return g;
}

namespace {

// log density of Wishart(v, R) at S, dimension 2.
double log_wishart_density(const Eigen::Matrix2d& S, double v, const Eigen::Matrix2d& R) {
  const double log_det_s = std::log(S.determinant());
  const double log_det_r = std::log(R.determinant());
  const double tr = (R.inverse() * S).trace();
  const double log_gamma2 = 0.5 * std::log(M_PI) + std::lgamma(0.5 * v) +
                            std::lgamma(0.5 * (v - 1.0));
  return 0.5 * (v - 3.0) * log_det_s - 0.5 * tr - v * std::log(2.0) - 0.5 * v * log_det_r -
         log_gamma2;
}

}  // namespace

double log_dep_prior(const ModelSpec& model, double dep, const Priors& priors) {
  switch (model.family) {
    case Family::BivProbit:
    case Family::MixedGaussian:
      return std::fabs(dep) < 1.0 ? std::log(0.5) : -std::numeric_limits<double>::infinity();
    case Family::MixedClayton:
      return (dep > 0.0 && dep < priors.dep_max) ? -std::log(priors.dep_max)
                                                 : -std::numeric_limits<double>::infinity();
    case Family::MixedGumbel:
      return (dep >= 1.0 && dep < 1.0 + priors.dep_max)
                 ? -std::log(priors.dep_max)
                 : -std::numeric_limits<double>::infinity();
  }
  return -std::numeric_limits<double>::infinity();
}

double log_jacobian_unconstrained(const ModelSpec& model, const Theta& theta) {
  return std::log(dep_jacobian(model.family, theta.dep)) + std::log(theta.tau1_sq) +
         std::log(theta.tau2_sq) + std::log(1.0 - theta.rho_alpha * theta.rho_alpha);
}

double log_prior(const ModelSpec& model, const Theta& theta, const Priors& priors,
                 bool unconstrained_coords) {
  if (!theta.sigma_alpha_valid() || !model.dep_in_domain(theta.dep))
    return -std::numeric_limits<double>::infinity();
  double lp = log_dep_prior(model, theta.dep, priors);
  if (!std::isfinite(lp)) return lp;

  // beta ~ N(0, beta_var I)
  const double v = priors.beta_var;
  const double c = -0.5 * std::log(2.0 * M_PI * v);
  lp += theta.beta1.size() * c - 0.5 * theta.beta1.squaredNorm() / v;
  lp += theta.beta2.size() * c - 0.5 * theta.beta2.squaredNorm() / v;

  // Sigma_alpha^{-1} ~ Wishart(v0, R0), expressed in (tau1^2, tau2^2, rho_alpha):
  // transform through Sigma -> Sigma^{-1} (|Sigma|^{-3}) and the entry map
  // (Jacobian tau1*tau2).
  const Eigen::Matrix2d sigma = theta.sigma_alpha();
  lp += log_wishart_density(sigma.inverse(), priors.v0, priors.R0());
  lp += -3.0 * std::log(sigma.determinant());
  lp += 0.5 * (std::log(theta.tau1_sq) + std::log(theta.tau2_sq));

  if (unconstrained_coords) lp += log_jacobian_unconstrained(model, theta);
  return lp;
}

}  // namespace ppmc
