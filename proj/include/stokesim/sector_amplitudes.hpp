#pragma once

#include <vector>

#include <Eigen/Dense>

#include "stokesim/fock_core.hpp"

namespace stokesim {

/// Complex amplitude tensor over per-beam photon splits at fixed per-beam
/// totals (n_1, ..., n_B), B = 1..3. Index j_b counts photons in the current
/// reference mode of beam b; the orthogonal mode holds n_b - j_b. Storage is
/// row major (last beam fastest). Immutable in spirit: all state arithmetic
/// returns new tensors.
class SectorAmplitudes {
 public:
  explicit SectorAmplitudes(std::vector<int> totals);

  int beam_count() const { return static_cast<int>(totals_.size()); }
  const std::vector<int>& totals() const { return totals_; }
  int total(int beam) const { return totals_[beam]; }
  int dim(int beam) const { return totals_[beam] + 1; }

  Eigen::Index size() const { return flat_.size(); }
  const Eigen::VectorXcd& flat() const { return flat_; }
  Eigen::VectorXcd& flat() { return flat_; }

  Complex& amp(int j1);
  Complex& amp(int j1, int j2);
  Complex& amp(int j1, int j2, int j3);
  Complex amp(int j1) const;
  Complex amp(int j1, int j2) const;
  Complex amp(int j1, int j2, int j3) const;

  double squared_norm() const { return flat_.squaredNorm(); }
  void normalize();

  /// Overlap <this|other>; totals must match.
  Complex overlap(const SectorAmplitudes& other) const;

  /// Re-express one beam in the given measurement basis.
  SectorAmplitudes transformed(int beam, const TransformMatrix& m) const;
  SectorAmplitudes transformed(int beam, const PolarizationSetting& s) const;

  /// Active SO(2) rotation of one beam's polarization plane by `angle`.
  SectorAmplitudes rotated(int beam, double angle) const;

  /// Per-split probabilities of the whole tensor.
  Eigen::VectorXd probabilities() const { return flat_.cwiseAbs2(); }

 private:
  std::vector<int> totals_;
  Eigen::VectorXcd flat_;
};

/// Photon-number-diagonal state: weighted sectors with pairwise distinct
/// totals plus the truncated tail mass.
struct WeightedSector {
  double weight = 0.0;
  SectorAmplitudes sector;
};

struct SectorEnsemble {
  std::vector<WeightedSector> entries;
  double tail_mass = 0.0;
  int cutoff = 0;
};

}  // namespace stokesim
