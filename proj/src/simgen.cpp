#include "ppmc/simgen.hpp"

#include <cmath>
#include <stdexcept>

#include "ppmc/copulas.hpp"
#include "ppmc/particles.hpp"
#include "ppmc/special.hpp"

namespace ppmc {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

SimDesign preset_probit(int P, int T, std::uint64_t seed) {
  SimDesign d;
  d.P = P;
  d.T = T;
  d.family = Family::BivProbit;
  d.beta1 = vec({-1.5, 0.1, -0.2, 0.2, -0.2, 0.1, -0.2, 0.1, -0.1, -0.2, 0.2});
  d.beta2 = vec({-2.5, 0.1, 0.2, -0.2, 0.2, 0.12, 0.2, -0.2, 0.12, -0.12, 0.12});
  d.tau1_sq = 2.5;
  d.tau2_sq = 1.0;
  d.rho_alpha = 0.5;
  d.dep = 0.5;
  d.seed = seed;
  return d;
}

SimDesign preset_mixed(int P, int T, std::uint64_t seed) {
  SimDesign d = preset_probit(P, T, seed);
  d.family = Family::MixedGaussian;
  d.beta2 = vec({-0.5, 0.1, 0.2, -0.2, 0.2, 0.12, 0.2, -0.2, 0.12, -0.12, 0.12});
  d.tau1_sq = 1.0;
  d.tau2_sq = 2.5;
  return d;
}

SimDesign preset_by_name(const std::string& name, int P, int T, std::uint64_t seed) {
  if (name == "probit-sec3.6" || name == "probit") return preset_probit(P, T, seed);
  if (name == "mixed-S3" || name == "mixed") return preset_mixed(P, T, seed);
  throw std::invalid_argument("unknown simulation preset: " + name);
}

SimOutput generate(const SimDesign& design) {
  const int P = design.P, T = design.T;
  const int d1 = static_cast<int>(design.beta1.size());
  const int d2 = static_cast<int>(design.beta2.size());
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("simgen: empty coefficient vector");

  Theta truth;
  truth.beta1 = design.beta1;
  truth.beta2 = design.beta2;
  truth.dep = design.dep;
  truth.tau1_sq = design.tau1_sq;
  truth.tau2_sq = design.tau2_sq;
  truth.rho_alpha = design.rho_alpha;
  if (!truth.sigma_alpha_valid()) throw std::invalid_argument("simgen: invalid Sigma_alpha");
  const ModelSpec model{design.family, d1, d2, 0, 0};
  if (!model.dep_in_domain(design.dep))
    throw std::invalid_argument("simgen: dependence parameter outside the family domain");

  const Eigen::Matrix2d chol =
      Eigen::LLT<Eigen::Matrix2d>(truth.sigma_alpha()).matrixL();
  const int n_cov = std::max(d1, d2) - 1;  // shared U(0,1) covariates behind the intercept

  SimOutput out;
  out.data.P = P;
  out.data.T = T;
  const std::size_t n = static_cast<std::size_t>(P) * T;
  out.data.y1.assign(n, 0.0);
  out.data.y2.assign(n, 0.0);
  Eigen::MatrixXd x(n, n_cov + 1);
  out.alpha.alpha.resize(P, 2);
  out.eps.resize(n, 2);

  const Copula cop = copula_of(design.family);
  const bool copula_eps =
      design.family == Family::MixedClayton || design.family == Family::MixedGumbel;

#pragma omp parallel for schedule(static)
  for (int i = 0; i < P; ++i) {
    RngStream rng(design.seed, static_cast<std::uint64_t>(i) + 1);
    const double z1 = rng.normal(), z2 = rng.normal();
    out.alpha.alpha(i, 0) = chol(0, 0) * z1;
    out.alpha.alpha(i, 1) = chol(1, 0) * z1 + chol(1, 1) * z2;
    for (int t = 0; t < T; ++t) {
      const auto r = out.data.cell(i, t);
      x(r, 0) = 1.0;
      for (int c = 0; c < n_cov; ++c) x(r, 1 + c) = rng.uniform();
      double e1, e2;
      if (copula_eps) {
        double u1, u2;
        sample_copula(cop, design.dep, rng, u1, u2);
        e1 = std_normal_quantile(u1);
        e2 = std_normal_quantile(u2);
      } else {
        const double w1 = rng.normal(), w2 = rng.normal();
        e1 = w1;
        e2 = design.dep * w1 + std::sqrt(1.0 - design.dep * design.dep) * w2;
      }
      out.eps(r, 0) = e1;
      out.eps(r, 1) = e2;
    }
  }

  out.data.X1 = x.leftCols(d1);
  out.data.X2 = x.leftCols(d2);
  out.data.x1_names.push_back("const");
  out.data.x2_names.push_back("const");
  for (int c = 1; c < d1; ++c) out.data.x1_names.push_back("x" + std::to_string(c));
  for (int c = 1; c < d2; ++c) out.data.x2_names.push_back("x" + std::to_string(c));
  out.data.finalize();

  for (int i = 0; i < P; ++i) {
    for (int t = 0; t < T; ++t) {
      const auto r = out.data.cell(i, t);
      const double lat1 =
          out.data.X1.row(r).dot(design.beta1) + out.alpha.alpha(i, 0) + out.eps(r, 0);
      const double lat2 =
          out.data.X2.row(r).dot(design.beta2) + out.alpha.alpha(i, 1) + out.eps(r, 1);
      out.data.y1[r] = lat1 > 0.0 ? 1.0 : 0.0;
      out.data.y2[r] = (design.family == Family::BivProbit) ? (lat2 > 0.0 ? 1.0 : 0.0) : lat2;
    }
  }
  return out;
}

}  // namespace ppmc
