#include "ppmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppmc/copulas.hpp"
#include "ppmc/particles.hpp"
#include "ppmc/special.hpp"

namespace ppmc {

std::vector<std::string> param_names(const ModelSpec& model, const PanelData& data) {
  std::vector<std::string> names;
  auto push_block = [&](const char* prefix, const std::vector<std::string>& cov,
                        const std::vector<std::string>& mund, int d, int m) {
    for (int j = 0; j < d; ++j) {
      const std::string base = (j < static_cast<int>(cov.size())) ? cov[j] : "x" + std::to_string(j);
      names.push_back(std::string(prefix) + "_" + base);
    }
    for (int j = 0; j < m; ++j) {
      const std::string base =
          (j < static_cast<int>(mund.size())) ? mund[j] : "m" + std::to_string(j);
      names.push_back(std::string(prefix) + "_bar_" + base);
    }
  };
  push_block("b1", data.x1_names, data.xb_names, model.d1, model.m1);
  push_block("b2", data.x2_names, data.xb_names, model.d2, model.m2);
  names.push_back("dep");
  names.push_back("tau1_sq");
  names.push_back("tau2_sq");
  names.push_back("rho_alpha");
  return names;
}

Eigen::VectorXd pack_theta(const ModelSpec& model, const Theta& theta) {
  Eigen::VectorXd row(model.n_params());
  row << theta.beta1, theta.beta2, theta.dep, theta.tau1_sq, theta.tau2_sq, theta.rho_alpha;
  return row;
}

Theta unpack_theta(const ModelSpec& model, const Eigen::VectorXd& row) {
  Theta theta;
  const int k1 = model.k1();
  const int k2 = model.k2();
  theta.beta1 = row.head(k1);
  theta.beta2 = row.segment(k1, k2);
  theta.dep = row[k1 + k2];
  theta.tau1_sq = row[k1 + k2 + 1];
  theta.tau2_sq = row[k1 + k2 + 2];
  theta.rho_alpha = row[k1 + k2 + 3];
  return theta;
}

IactResult iact(const double* x, std::size_t n) {
  if (n < 10) throw std::invalid_argument("iact: need at least 10 draws");
  const double nn = static_cast<double>(n);
  double mean = 0.0;
  for (std::size_t s = 0; s < n; ++s) mean += x[s];
  mean /= nn;
  double c0 = 0.0;
  for (std::size_t s = 0; s < n; ++s) c0 += (x[s] - mean) * (x[s] - mean);
  c0 /= nn;
  if (c0 <= 0.0) return {1.0, true};

  const double cutoff = 2.0 / std::sqrt(nn);
  double total = 1.0;
  for (std::size_t t = 1; t < n; ++t) {
    double ct = 0.0;
    for (std::size_t s = 0; s + t < n; ++s) ct += (x[s] - mean) * (x[s + t] - mean);
    ct /= nn;
    const double rho_t = ct / c0;
    total += 2.0 * rho_t;
    if (std::fabs(rho_t) < cutoff) break;  // L is the first insignificant lag, included
  }
  return {total, false};
}

IactResult iact(const Eigen::VectorXd& series) {
  return iact(series.data(), static_cast<std::size_t>(series.size()));
}

double tnv(double iact_mean, double wall_time_seconds) { return iact_mean * wall_time_seconds; }

namespace {

double empirical_quantile(std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  const double h = (static_cast<double>(n) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, n - 1);
  const double w = h - static_cast<double>(lo);
  return (1.0 - w) * sorted[lo] + w * sorted[hi];
}

}  // namespace

PosteriorSummary summarize_series(const Eigen::VectorXd& series) {
  if (series.size() < 100) throw std::invalid_argument("summarize: need at least 100 draws");
  PosteriorSummary s;
  s.mean = series.mean();
  std::vector<double> sorted(series.data(), series.data() + series.size());
  std::sort(sorted.begin(), sorted.end());
  s.ci_low = empirical_quantile(sorted, 0.025);
  s.ci_high = empirical_quantile(sorted, 0.975);
  const IactResult r = iact(series);
  s.iact = r.value;
  s.degenerate = r.degenerate;
  s.significant = !(s.ci_low <= 0.0 && 0.0 <= s.ci_high);
  return s;
}

std::vector<PosteriorSummary> summarize(const ChainOutput& chain) {
  std::vector<PosteriorSummary> out;
  out.reserve(chain.draws.cols());
  for (Eigen::Index j = 0; j < chain.draws.cols(); ++j)
    out.push_back(summarize_series(chain.draws.col(j)));
  return out;
}

namespace {

void check_binary_column(const Eigen::MatrixXd& X, int col) {
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const double v = X(r, col);
    if (v != 0.0 && v != 1.0)
      throw std::invalid_argument("ape: life-event covariate is not binary");
  }
}

// Joint exceedance probability P(Z1 > -z1, Z2 > -z2) for N(zeta, cov):
// Phi2(zeta1/s1, zeta2/s2; corr).
double orthant_prob(double zeta1, double zeta2, const Eigen::Matrix2d& cov) {
  const double s1 = std::sqrt(cov(0, 0));
  const double s2 = std::sqrt(cov(1, 1));
  const double corr = cov(0, 1) / (s1 * s2);
  return bvn_cdf(zeta1 / s1, zeta2 / s2, corr);
}

}  // namespace

ApeResult ape(const ChainOutput& chain, const ModelSpec& model, const PanelData& data,
              const ApeRequest& request) {
  if (request.col1 < 0 && request.col2 < 0)
    throw std::invalid_argument("ape: event column missing from both equations");
  if (request.col1 >= 0) check_binary_column(data.X1, request.col1);
  if (request.col2 >= 0) check_binary_column(data.X2, request.col2);

  const Eigen::Index m_draws = chain.draws.rows();
  const std::size_t n_cells = static_cast<std::size_t>(data.P) * data.T;
  const bool gaussian_family =
      model.family == Family::BivProbit || model.family == Family::MixedGaussian;
  const Copula cop = copula_of(model.family);

  Eigen::VectorXd per_draw(m_draws);
#pragma omp parallel for schedule(static)
  for (Eigen::Index m = 0; m < m_draws; ++m) {
    const Theta theta = unpack_theta(model, chain.draws.row(m));
    double acc = 0.0;
    if (gaussian_family) {
      Eigen::Matrix2d cov = theta.sigma_alpha();
      cov(0, 0) += 1.0;
      cov(1, 1) += 1.0;
      cov(0, 1) += theta.dep;
      cov(1, 0) += theta.dep;
      for (int i = 0; i < data.P; ++i) {
        for (int t = 0; t < data.T; ++t) {
          const auto r = data.cell(i, t);
          Eigen::RowVectorXd w1 = data.W1.row(r);
          Eigen::RowVectorXd w2 = data.W2.row(r);
          if (request.col1 >= 0) w1[request.col1] = 1.0;
          if (request.col2 >= 0) w2[request.col2] = 1.0;
          const double on = orthant_prob(w1.dot(theta.beta1), w2.dot(theta.beta2), cov);
          if (request.col1 >= 0) w1[request.col1] = 0.0;
          if (request.col2 >= 0) w2[request.col2] = 0.0;
          const double off = orthant_prob(w1.dot(theta.beta1), w2.dot(theta.beta2), cov);
          acc += on - off;
        }
      }
    } else {
      // simulation-based estimate with common random numbers across the
      // toggled and untoggled designs
      RngStream rng(request.seed, static_cast<std::uint64_t>(m));
      Eigen::LLT<Eigen::Matrix2d> llt(theta.sigma_alpha());
      if (llt.info() != Eigen::Success) throw std::runtime_error("ape: Sigma_alpha not PD");
      const Eigen::Matrix2d chol = llt.matrixL();
      long diff_sum = 0;
      for (int d = 0; d < request.mc_draws; ++d) {
        const double z1 = rng.normal(), z2 = rng.normal();
        const double a1 = chol(0, 0) * z1;
        const double a2 = chol(1, 0) * z1 + chol(1, 1) * z2;
        double u1, u2;
        sample_copula(cop, theta.dep, rng, u1, u2);
        const double e1 = std_normal_quantile(u1) + a1;
        const double e2 = std_normal_quantile(u2) + a2;
        for (int i = 0; i < data.P; ++i) {
          for (int t = 0; t < data.T; ++t) {
            const auto r = data.cell(i, t);
            double eta1_on = data.W1.row(r).dot(theta.beta1);
            double eta2_on = data.W2.row(r).dot(theta.beta2);
            double eta1_off = eta1_on, eta2_off = eta2_on;
            if (request.col1 >= 0) {
              const double b = theta.beta1[request.col1];
              eta1_on += (1.0 - data.X1(r, request.col1)) * b;
              eta1_off -= data.X1(r, request.col1) * b;
            }
            if (request.col2 >= 0) {
              const double b = theta.beta2[request.col2];
              eta2_on += (1.0 - data.X2(r, request.col2)) * b;
              eta2_off -= data.X2(r, request.col2) * b;
            }
            const int on = (eta1_on + e1 > 0.0 && eta2_on + e2 > 0.0) ? 1 : 0;
            const int off = (eta1_off + e1 > 0.0 && eta2_off + e2 > 0.0) ? 1 : 0;
            diff_sum += on - off;
          }
        }
      }
      acc = static_cast<double>(diff_sum) / request.mc_draws;
    }
    per_draw[m] = acc / static_cast<double>(n_cells);
  }

  ApeResult out;
  out.per_draw = per_draw;
  out.summary = summarize_series(per_draw);
  return out;
}

}  // namespace ppmc
