#include "ppmc/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppmc/special.hpp"

namespace ppmc {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_unit(double u, const char* name) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error(std::string(name) + " must be in [0,1]");
}

// log(u1^-t + u2^-t - 1) evaluated without overflow; a = -t*log(u1), b = -t*log(u2).
double clayton_log_a(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

// log(S) with S = (-log u1)^t + (-log u2)^t, via logs of the summands.
double gumbel_log_s(double lt1, double lt2, double theta) {
  const double a = theta * lt1, b = theta * lt2;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

Copula copula_of(Family f) {
  switch (f) {
    case Family::BivProbit:
    case Family::MixedGaussian: return Copula::Gaussian;
    case Family::MixedClayton: return Copula::Clayton;
    case Family::MixedGumbel: return Copula::Gumbel;
  }
  return Copula::Gaussian;
}

void copula_check_domain(Copula c, double theta) {
  switch (c) {
    case Copula::Gaussian:
      if (!(std::fabs(theta) < 1.0)) throw std::domain_error("Gaussian copula: |rho| must be < 1");
      return;
    case Copula::Clayton:
      if (!(theta > 0.0)) throw std::domain_error("Clayton copula: theta must be > 0");
      return;
    case Copula::Gumbel:
      if (!(theta >= 1.0)) throw std::domain_error("Gumbel copula: theta must be >= 1");
      return;
  }
}

double copula_cdf(Copula c, double u1, double u2, double theta) {
  copula_check_domain(c, theta);
  check_unit(u1, "u1");
  check_unit(u2, "u2");
  if (u1 == 0.0 || u2 == 0.0) return 0.0;
  if (u1 == 1.0) return u2;
  if (u2 == 1.0) return u1;
  switch (c) {
    case Copula::Gaussian:
      if (theta == 0.0) return u1 * u2;
      return bvn_cdf(std_normal_quantile(u1), std_normal_quantile(u2), theta);
    case Copula::Clayton: {
      const double la = clayton_log_a(-theta * std::log(u1), -theta * std::log(u2));
      return std::exp(-la / theta);
    }
    case Copula::Gumbel: {
      const double ls = gumbel_log_s(std::log(-std::log(u1)), std::log(-std::log(u2)), theta);
      return std::exp(-std::exp(ls / theta));
    }
  }
  return 0.0;
}

double copula_cond_cdf(Copula c, double u1, double u2, double theta) {
  copula_check_domain(c, theta);
  check_unit(u1, "u1");
  if (!(u2 > 0.0 && u2 < 1.0)) throw std::domain_error("copula_cond_cdf: u2 must be in (0,1)");
  if (u1 == 0.0) return 0.0;
  if (u1 == 1.0) return 1.0;
  switch (c) {
    case Copula::Gaussian: {
      if (theta == 0.0) return u1;
      const double z1 = std_normal_quantile(u1);
      const double z2 = std_normal_quantile(u2);
      return std_normal_cdf((z1 - theta * z2) / std::sqrt(1.0 - theta * theta));
    }
    case Copula::Clayton: {
      const double b = -theta * std::log(u2);
      const double la = clayton_log_a(-theta * std::log(u1), b);
      return std::exp((1.0 + 1.0 / theta) * (b - la));
    }
    case Copula::Gumbel: {
      if (theta == 1.0) return u1;
      const double t2 = -std::log(u2);
      const double ls = gumbel_log_s(std::log(-std::log(u1)), std::log(t2), theta);
      const double log_c12 = -std::exp(ls / theta) + t2 + (theta - 1.0) * std::log(t2) +
                             (1.0 / theta - 1.0) * ls;
      return std::min(1.0, std::exp(log_c12));
    }
  }
  return 0.0;
}

CondCdfDerivs copula_cond_cdf_derivs(Copula c, double u1, double u2, double theta) {
  copula_check_domain(c, theta);
  if (!(u1 > 0.0 && u1 < 1.0) || !(u2 > 0.0 && u2 < 1.0))
    throw std::domain_error("copula_cond_cdf_derivs: arguments must be interior");
  CondCdfDerivs out{};
  switch (c) {
    case Copula::Gaussian: {
      if (theta == 0.0) return {u1, 1.0, 0.0};
      const double z1 = std_normal_quantile(u1);
      const double z2 = std_normal_quantile(u2);
      const double s = std::sqrt(1.0 - theta * theta);
      const double g = (z1 - theta * z2) / s;
      out.value = std_normal_cdf(g);
      const double pg = std_normal_pdf(g);
      out.du1 = pg / (s * std_normal_pdf(z1));
      out.du2 = -pg * theta / (s * std_normal_pdf(z2));
      return out;
    }
    case Copula::Clayton: {
      const double a = -theta * std::log(u1);
      const double b = -theta * std::log(u2);
      const double la = clayton_log_a(a, b);
      out.value = std::exp((1.0 + 1.0 / theta) * (b - la));
      // (theta+1) u1^{-t-1} u2^{-t-1} A^{-2-1/t}
      out.du1 = (theta + 1.0) *
                std::exp(((theta + 1.0) / theta) * (a + b) - (2.0 + 1.0 / theta) * la);
      // (theta+1) [u2^{-2t-2} A^{-2-1/t} - u2^{-t-2} A^{-1-1/t}]
      const double t1 = std::exp(((2.0 * theta + 2.0) / theta) * b - (2.0 + 1.0 / theta) * la);
      const double t2 = std::exp(((theta + 2.0) / theta) * b - (1.0 + 1.0 / theta) * la);
      out.du2 = (theta + 1.0) * (t1 - t2);
      return out;
    }
    case Copula::Gumbel: {
      if (theta == 1.0) return {u1, 1.0, 0.0};
      const double t1 = -std::log(u1);
      const double t2 = -std::log(u2);
      const double lt1 = std::log(t1), lt2 = std::log(t2);
      const double ls = gumbel_log_s(lt1, lt2, theta);
      const double s_pow = std::exp(ls / theta);  // S^{1/theta}
      const double log_c = -s_pow;                // log C(u1,u2)
      const double log_c12 = log_c + t2 + (theta - 1.0) * lt2 + (1.0 / theta - 1.0) * ls;
      out.value = std::min(1.0, std::exp(log_c12));
      // d c12 / du1 = c12 * (t1^{t-1}/u1) * [ S^{1/t-1} + (t-1) S^{-1} ]
      const double su1 = std::exp((theta - 1.0) * lt1 + t1);  // t1^{t-1}/u1
      out.du1 = std::exp(log_c12) * su1 *
                (std::exp((1.0 / theta - 1.0) * ls) + (theta - 1.0) * std::exp(-ls));
      // d c12 / du2 via the product rule on C * (1/u2) * t2^{t-1} * S^{1/t-1}
      const double su2 = std::exp((theta - 1.0) * lt2 + t2);  // t2^{t-1}/u2
      const double d_logc = su2 * std::exp((1.0 / theta - 1.0) * ls);     // dlogC/du2
      const double d_log_inv = std::exp(t2);                              // -d log(1/u2)/du2 ... 1/u2
      const double d_log_t2 = (theta - 1.0) / t2 * (-std::exp(t2));       // d[(t-1)log t2]/du2
      const double d_log_s = (1.0 / theta - 1.0) * theta * std::exp((theta - 1.0) * lt2 - ls) *
                             (-std::exp(t2));  // d[(1/t-1) log S]/du2
      out.du2 = std::exp(log_c12) * (d_logc - d_log_inv + d_log_t2 + d_log_s);
      return out;
    }
  }
  return out;
}

double kendall_tau(Copula c, double param) {
  copula_check_domain(c, param);
  switch (c) {
    case Copula::Gaussian: return 2.0 / kPi * std::asin(param);
    case Copula::Clayton: return param / (param + 2.0);
    case Copula::Gumbel: return 1.0 - 1.0 / param;
  }
  return 0.0;
}

std::pair<double, double> tail_dependence(Copula c, double param) {
  copula_check_domain(c, param);
  switch (c) {
    case Copula::Gaussian: return {0.0, 0.0};
    case Copula::Clayton: return {std::pow(2.0, -1.0 / param), 0.0};
    case Copula::Gumbel: return {0.0, 2.0 - std::pow(2.0, 1.0 / param)};
  }
  return {0.0, 0.0};
}

void sample_copula(Copula c, double theta, RngStream& rng, double& u1, double& u2) {
  copula_check_domain(c, theta);
  u2 = rng.uniform();
  const double v = rng.uniform();
  double lo = 0.0, hi = 1.0;
  // C_{1|2} is a CDF in u1, so bisection on C_{1|2}(u1|u2) = v converges
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (copula_cond_cdf(c, mid, u2, theta) < v)
      lo = mid;
    else
      hi = mid;
  }
  u1 = 0.5 * (lo + hi);
}

}  // namespace ppmc
