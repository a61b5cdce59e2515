// Independent reference computations used as test oracles. These deliberately
// avoid the library's own evaluation paths.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// ---------------------------------------------------------------------------
// Normal CDF from the Maclaurin series of erf in extended precision.
inline long double erf_series(long double z) {
  long double term = z, sum = z;
  for (int n = 1; n < 300; ++n) {
    term *= -z * z / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs((double)add) < 1e-24L * std::fabs((double)sum)) break;
  }
  return sum * 2.0L / std::sqrt(3.14159265358979323846264338328L);
}

inline double norm_cdf_series(double x) {
  return (double)(0.5L + 0.5L * erf_series((long double)x / std::sqrt(2.0L)));
}

// ---------------------------------------------------------------------------
// Adaptive Simpson in 1-D and nested 2-D quadrature of the bivariate normal
// density over (-inf, h] x (-inf, k].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 40);
}

inline double bvn_density(double x, double y, double rho) {
  const double om = 1.0 - rho * rho;
  return std::exp(-0.5 * (x * x - 2.0 * rho * x * y + y * y) / om) /
         (2.0 * 3.14159265358979323846 * std::sqrt(om));
}

inline double bvn_cdf_quadrature(double h, double k, double rho, double tol = 1e-12) {
  const double lo = -9.5;
  const double hh = std::min(h, 9.5), kk = std::min(k, 9.5);
  if (hh <= lo || kk <= lo) return 0.0;
  auto inner = [&](double x) {
    return integrate([&](double y) { return bvn_density(x, y, rho); }, lo, kk, tol);
  };
  return integrate(inner, lo, hh, tol);
}

// Bivariate normal CDF through the 1-D conditional reduction with erfc-based
// marginals; higher precision than the 2-D rule, still independent of the
// production evaluation path.
inline double norm_cdf_erfc(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

inline double bvn_cdf_1d(double h, double k, double rho, double tol = 1e-14) {
  if (k <= -9.5 || h <= -9.5) return 0.0;
  const double s = std::sqrt(1.0 - rho * rho);
  auto f = [&](double y) {
    return std::exp(-0.5 * y * y) / std::sqrt(2.0 * 3.14159265358979323846) *
           norm_cdf_erfc((h - rho * y) / s);
  };
  return integrate(f, -9.5, std::min(k, 9.5), tol);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite nodes/weights (physicists' convention, integral of
// exp(-x^2) f(x)) by the Golub-Welsch eigen decomposition.
inline void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(0.5 * i);
    j(i, i - 1) = b;
    j(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  x.resize(n);
  w.resize(n);
  const double sqrt_pi = std::sqrt(3.14159265358979323846);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()[i];
    const double v0 = es.eigenvectors()(0, i);
    w[i] = sqrt_pi * v0 * v0;
  }
}

// ---------------------------------------------------------------------------
// Central finite differences of a scalar function of a vector.
inline Eigen::VectorXd finite_diff_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                            const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    xp[i] = x0 + h;
    const double fp = f(xp);
    xp[i] = x0 - h;
    const double fm = f(xp);
    xp[i] = x0;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Critical values. Chi-squared via Wilson-Hilferty; KS asymptotic.
inline double chi2_crit_1pct(int df) {
  const double z = 2.3263478740408408;  // 99th percentile of N(0,1)
  const double a = 2.0 / (9.0 * df);
  const double c = 1.0 - a + z * std::sqrt(a);
  return df * c * c * c;
}

inline double ks_crit_1pct(std::size_t n) { return 1.62762 / std::sqrt((double)n); }

// One-sample KS statistic against a supplied CDF.
inline double ks_statistic(std::vector<double> draws, const std::function<double(double)>& cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = (double)draws.size();
  double d = 0.0;
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::fabs(f - (i + 1) / n));
    d = std::max(d, std::fabs(f - i / n));
  }
  return d;
}

// ---------------------------------------------------------------------------
// Empirical Kendall tau by inversion counting (no ties assumed).
namespace detail {
inline long long merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo,
                             std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long inv = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j])
      buf[k++] = v[i++];
    else {
      inv += (long long)(mid - i);
      buf[k++] = v[j++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + lo, buf.begin() + hi, v.begin() + lo);
  return inv;
}
}  // namespace detail

inline double kendall_tau_empirical(const std::vector<double>& u, const std::vector<double>& v) {
  const std::size_t n = u.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
  std::vector<double> w(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = v[order[i]];
  const long long inv = detail::merge_count(w, buf, 0, n);
  const double pairs = 0.5 * (double)n * ((double)n - 1.0);
  return 1.0 - 2.0 * (double)inv / pairs;
}

}  // namespace oracles
