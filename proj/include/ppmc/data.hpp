#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace ppmc {

enum class Family { BivProbit, MixedGaussian, MixedClayton, MixedGumbel };

std::string family_name(Family f);
Family family_from_name(const std::string& s);

/// Which likelihood family is active plus the covariate dimensions
/// (d = per-period covariates, m = Mundlak averages) of each equation.
struct ModelSpec {
  Family family = Family::BivProbit;
  int d1 = 0, d2 = 0, m1 = 0, m2 = 0;

  int k1() const { return d1 + m1; }
  int k2() const { return d2 + m2; }
  int n_params() const { return k1() + k2() + 4; }  // betas, dep, tau1^2, tau2^2, rho_alpha
  bool dep_in_domain(double dep) const;
};

/// Balanced panel: P individuals over T periods. Cells are indexed i*T + t.
/// W1/W2 are the stacked designs [x_it | xbar_i] used by the likelihoods;
/// finalize() builds them from the raw blocks.
struct PanelData {
  int P = 0, T = 0;
  std::vector<double> y1;  // binary outcomes, stored 0.0/1.0
  std::vector<double> y2;  // binary (probit) or continuous (mixed families)
  Eigen::MatrixXd X1, X2;        // (P*T) x d1, (P*T) x d2
  Eigen::MatrixXd xbar1, xbar2;  // P x m1, P x m2
  std::vector<std::string> x1_names, x2_names, xb_names;

  Eigen::MatrixXd W1, W2;  // stacked designs, (P*T) x (d1+m1), (P*T) x (d2+m2)

  std::size_t cell(int i, int t) const { return static_cast<std::size_t>(i) * T + t; }
  int d1() const { return static_cast<int>(X1.cols()); }
  int d2() const { return static_cast<int>(X2.cols()); }
  int m1() const { return static_cast<int>(xbar1.cols()); }
  int m2() const { return static_cast<int>(xbar2.cols()); }

  void finalize();
  ModelSpec spec(Family f) const { return ModelSpec{f, d1(), d2(), m1(), m2()}; }
};

/// Full parameter vector. dep is rho_eps for the probit/Gaussian families and
/// the copula parameter for Clayton/Gumbel.
struct Theta {
  Eigen::VectorXd beta1, beta2;
  double dep = 0.0;
  double tau1_sq = 1.0, tau2_sq = 1.0, rho_alpha = 0.0;

  Eigen::Matrix2d sigma_alpha() const;
  void set_sigma_alpha(const Eigen::Matrix2d& s);
  bool sigma_alpha_valid() const;
};

/// Per-individual random effects (P x 2).
struct RandomEffects {
  Eigen::MatrixXd alpha;
};

/// Time-averages of the covariate columns listed in subset: result(i, j) is
/// the mean over t of X(i*T + t, subset[j]). Empty subset gives a P x 0 matrix.
Eigen::MatrixXd mundlak_averages(const Eigen::MatrixXd& X, int P, int T,
                                 const std::vector<int>& subset);

/// Map between the constrained dependence parameter and its unconstrained
/// working coordinate: atanh(rho) for correlation families, log(theta) for
/// Clayton, log(theta - 1) for Gumbel.
double dep_to_unconstrained(Family f, double dep);
double dep_from_unconstrained(Family f, double u);
/// d(dep)/d(unconstrained), evaluated at the constrained value.
double dep_jacobian(Family f, double dep);

}  // namespace ppmc
