#include "ppmc/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppmc/special.hpp"

namespace ppmc {

namespace {

// One-sided rejection sampler for a standard normal conditioned on (a, b),
// a >= 0 and possibly b = inf. Exponential proposal tilted at the optimal
// rate (Robert 1995); never degrades in the far tail.
double tail_truncated_std_normal(double a, double b, RngStream& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a - std::log1p(-rng.uniform()) / lambda;
    if (x >= b) continue;
    const double d = x - lambda;
    if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
  }
}

}  // namespace

double sample_truncated_normal(double mu, double sigma, double lower, double upper,
                               RngStream& rng) {
  if (!(sigma > 0.0)) throw std::domain_error("sample_truncated_normal: sigma must be > 0");
  if (!(lower < upper)) throw std::domain_error("sample_truncated_normal: lower >= upper");
  const double a = (lower - mu) / sigma;
  const double b = (upper - mu) / sigma;
  double z;
  if (a >= 4.0) {
    z = tail_truncated_std_normal(a, b, rng);
  } else if (b <= -4.0) {
    z = -tail_truncated_std_normal(-b, -a, rng);
  } else {
    const double pa = std::isinf(a) ? 0.0 : std_normal_cdf(a);
    const double pb = std::isinf(b) ? 1.0 : std_normal_cdf(b);
    const double u = pa + rng.uniform() * (pb - pa);
    z = std_normal_quantile(u);
    // rounding in the CDF difference can land on a bound; nudge back inside
    if (z <= a) z = std::nextafter(a, b);
    if (z >= b) z = std::nextafter(b, a);
  }
  double x = mu + sigma * z;
  if (x <= lower) x = std::nextafter(lower, upper);
  if (x >= upper) x = std::nextafter(upper, lower);
  return x;
}

Eigen::Matrix2d sample_wishart(double v, const Eigen::Matrix2d& R, RngStream& rng) {
  if (!(v >= 2.0)) throw std::domain_error("sample_wishart: need v >= dimension (2)");
  Eigen::LLT<Eigen::Matrix2d> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("sample_wishart: R is not positive definite");
  const Eigen::Matrix2d L = llt.matrixL();
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  A(0, 0) = std::sqrt(rng.chisq(v));
  A(1, 0) = rng.normal();
  A(1, 1) = std::sqrt(rng.chisq(v - 1.0));
  const Eigen::Matrix2d LA = L * A;
  return LA * LA.transpose();
}

}  // namespace ppmc
