#include "ppmc/data.hpp"

#include <cmath>
#include <stdexcept>

namespace ppmc {

std::string family_name(Family f) {
  switch (f) {
    case Family::BivProbit: return "biv_probit";
    case Family::MixedGaussian: return "mixed_gaussian";
    case Family::MixedClayton: return "mixed_clayton";
    case Family::MixedGumbel: return "mixed_gumbel";
  }
  return "unknown";
}

Family family_from_name(const std::string& s) {
  if (s == "biv_probit" || s == "probit") return Family::BivProbit;
  if (s == "mixed_gaussian" || s == "gaussian") return Family::MixedGaussian;
  if (s == "mixed_clayton" || s == "clayton") return Family::MixedClayton;
  if (s == "mixed_gumbel" || s == "gumbel") return Family::MixedGumbel;
  throw std::invalid_argument("unknown model family: " + s);
}

bool ModelSpec::dep_in_domain(double dep) const {
  switch (family) {
    case Family::BivProbit:
    case Family::MixedGaussian: return std::fabs(dep) < 1.0;
    case Family::MixedClayton: return dep > 0.0;
    case Family::MixedGumbel: return dep >= 1.0;
  }
  return false;
}

void PanelData::finalize() {
  const std::size_t n = static_cast<std::size_t>(P) * T;
  if (y1.size() != n || y2.size() != n)
    throw std::invalid_argument("PanelData: outcome length does not match P*T");
  if (X1.rows() != static_cast<Eigen::Index>(n) || X2.rows() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("PanelData: covariate rows do not match P*T");
  if (xbar1.size() > 0 && xbar1.rows() != P)
    throw std::invalid_argument("PanelData: xbar1 rows do not match P");
  if (xbar2.size() > 0 && xbar2.rows() != P)
    throw std::invalid_argument("PanelData: xbar2 rows do not match P");
  if (xbar1.size() == 0) xbar1.resize(P, 0);
  if (xbar2.size() == 0) xbar2.resize(P, 0);

  W1.resize(n, X1.cols() + xbar1.cols());
  W2.resize(n, X2.cols() + xbar2.cols());
  for (int i = 0; i < P; ++i) {
    for (int t = 0; t < T; ++t) {
      const auto r = cell(i, t);
      W1.row(r) << X1.row(r), xbar1.row(i);
      W2.row(r) << X2.row(r), xbar2.row(i);
    }
  }
}

Eigen::Matrix2d Theta::sigma_alpha() const {
  Eigen::Matrix2d s;
  const double c = rho_alpha * std::sqrt(tau1_sq * tau2_sq);
  s << tau1_sq, c, c, tau2_sq;
  return s;
}

void Theta::set_sigma_alpha(const Eigen::Matrix2d& s) {
  tau1_sq = s(0, 0);
  tau2_sq = s(1, 1);
  rho_alpha = s(0, 1) / std::sqrt(s(0, 0) * s(1, 1));
}

bool Theta::sigma_alpha_valid() const {
  return tau1_sq > 0.0 && tau2_sq > 0.0 && std::fabs(rho_alpha) < 1.0;
}

Eigen::MatrixXd mundlak_averages(const Eigen::MatrixXd& X, int P, int T,
                                 const std::vector<int>& subset) {
  if (X.rows() != static_cast<Eigen::Index>(P) * T)
    throw std::invalid_argument("mundlak_averages: X rows must equal P*T");
  for (int c : subset)
    if (c < 0 || c >= X.cols()) throw std::invalid_argument("mundlak_averages: bad column index");
  Eigen::MatrixXd out(P, static_cast<Eigen::Index>(subset.size()));
  for (int i = 0; i < P; ++i) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      double s = 0.0;
      for (int t = 0; t < T; ++t) s += X(static_cast<Eigen::Index>(i) * T + t, subset[j]);
      out(i, static_cast<Eigen::Index>(j)) = s / T;
    }
  }
  return out;
}

double dep_to_unconstrained(Family f, double dep) {
  switch (f) {
    case Family::BivProbit:
    case Family::MixedGaussian: return std::atanh(dep);
    case Family::MixedClayton: return std::log(dep);
    case Family::MixedGumbel: return std::log(dep - 1.0);
  }
  return 0.0;
}

double dep_from_unconstrained(Family f, double u) {
  switch (f) {
    case Family::BivProbit:
    case Family::MixedGaussian: return std::tanh(u);
    case Family::MixedClayton: return std::exp(u);
    case Family::MixedGumbel: return 1.0 + std::exp(u);
  }
  return 0.0;
}

double dep_jacobian(Family f, double dep) {
  switch (f) {
    case Family::BivProbit:
    case Family::MixedGaussian: return 1.0 - dep * dep;
    case Family::MixedClayton: return dep;
    case Family::MixedGumbel: return dep - 1.0;
  }
  return 1.0;
}

}  // namespace ppmc
