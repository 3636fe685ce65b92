#pragma once

#include <Eigen/Dense>

#include "stokesim/observables.hpp"

namespace stokesim {

/// Binomial thinning law of an inefficient detector: probability of
/// registering kappa = 0..k counts out of k arriving photons at efficiency
/// eta. Sums to 1 to machine precision.
Eigen::VectorXd thinning_pmf(int k, double eta);

/// Expected observable value after independent binomial thinning of both
/// detectors of an analyzer: f(j, k) = sum_{a<=j, b<=k} p(a|j) p(b|k) g(a, b).
/// Because every observable here is photon-number diagonal, detector loss
/// acts classically on the outcome statistics and folds into this table once;
/// lossy correlation evaluation then costs the same as the lossless one.
class LossyValueTable {
 public:
  LossyValueTable(ObservableKind kind, double eta, int n_max);

  ObservableKind kind() const { return kind_; }
  double eta() const { return eta_; }
  int n_max() const { return n_max_; }

  double value(int j, int k) const { return f_(j, k); }
  const Eigen::MatrixXd& table() const { return f_; }

  /// v[j] = f(j, total-j): the value vector over splits of a fixed total.
  Eigen::VectorXd split_values(int total) const;
  /// v[j] = f(total-j, j): the same with the analyzer's two outputs swapped.
  Eigen::VectorXd split_values_swapped(int total) const;

 private:
  ObservableKind kind_;
  double eta_;
  int n_max_;
  Eigen::MatrixXd f_;
};

/// Convex white-noise mixture of inequality left-hand sides:
/// q * lhs_signal + (1-q) * lhs_noise.
double noise_mixture_lhs(double lhs_signal, double lhs_noise, double q);

}  // namespace stokesim
