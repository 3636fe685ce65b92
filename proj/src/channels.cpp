#include "stokesim/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace stokesim {

Eigen::VectorXd thinning_pmf(int k, double eta) {
  if (k < 0) throw std::invalid_argument("thinning_pmf: negative count");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("thinning_pmf: efficiency outside [0, 1]");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(k + 1);
  if (eta == 1.0) {
    p[k] = 1.0;
    return p;
  }
  if (eta == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double log_eta = std::log(eta);
  const double log_bar = std::log1p(-eta);
  double log_choose = 0.0;  // log C(k, kappa), updated multiplicatively
  for (int kappa = 0; kappa <= k; ++kappa) {
    p[kappa] = std::exp(log_choose + kappa * log_eta + (k - kappa) * log_bar);
    if (kappa < k)
      log_choose += std::log(static_cast<double>(k - kappa)) -
                    std::log(static_cast<double>(kappa) + 1.0);
  }
  p /= p.sum();
  return p;
}

LossyValueTable::LossyValueTable(ObservableKind kind, double eta, int n_max)
    : kind_(kind), eta_(eta), n_max_(n_max) {
  if (n_max < 0) throw std::invalid_argument("LossyValueTable: negative n_max");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::invalid_argument("LossyValueTable: efficiency outside [0, 1]");

  Eigen::MatrixXd g(n_max + 1, n_max + 1);
  for (int j = 0; j <= n_max; ++j)
    for (int k = 0; k <= n_max; ++k) g(j, k) = outcome_value(kind, {j, k});

  if (eta == 1.0) {
    // Exact copy keeps the eta = 1 path bit-identical to the lossless one.
    f_ = std::move(g);
    return;
  }
  Eigen::MatrixXd thin = Eigen::MatrixXd::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) thin.row(k).head(k + 1) = thinning_pmf(k, eta).transpose();
  f_ = thin * g * thin.transpose();
}

Eigen::VectorXd LossyValueTable::split_values(int total) const {
  if (total < 0 || total > n_max_)
    throw std::invalid_argument("LossyValueTable::split_values: total out of range");
  Eigen::VectorXd v(total + 1);
  for (int j = 0; j <= total; ++j) v[j] = f_(j, total - j);
  return v;
}

Eigen::VectorXd LossyValueTable::split_values_swapped(int total) const {
  if (total < 0 || total > n_max_)
    throw std::invalid_argument("LossyValueTable::split_values_swapped: total out of range");
  Eigen::VectorXd v(total + 1);
  for (int j = 0; j <= total; ++j) v[j] = f_(total - j, j);
  return v;
}

double noise_mixture_lhs(double lhs_signal, double lhs_noise, double q) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::invalid_argument("noise_mixture_lhs: q outside [0, 1]");
  return q * lhs_signal + (1.0 - q) * lhs_noise;
}

}  // namespace stokesim
