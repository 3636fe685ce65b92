#include "stokesim/observables.hpp"

#include <cmath>
#include <stdexcept>

namespace stokesim {

const char* to_string(ObservableKind k) {
  switch (k) {
    case ObservableKind::Standard: return "standard";
    case ObservableKind::Normalized: return "normalized";
    case ObservableKind::NormalizedMinus: return "normalized-";
    case ObservableKind::Sign: return "sign";
    case ObservableKind::SignMinus: return "sign-";
    case ObservableKind::Rate: return "rate";
    case ObservableKind::Projector: return "projector";
  }
  return "?";
}

ObservableKind vacuum_subtracted(ObservableKind k) {
  if (k == ObservableKind::Sign) return ObservableKind::SignMinus;
  if (k == ObservableKind::Normalized) return ObservableKind::NormalizedMinus;
  return k;
}

double outcome_value(ObservableKind kind, ModeSplit split) {
  const int j = split.j, k = split.k;
  const int total = j + k;
  switch (kind) {
    case ObservableKind::Standard:
      return static_cast<double>(j - k);
    case ObservableKind::Normalized:
      return total > 0 ? static_cast<double>(j - k) / total : 0.0;
    case ObservableKind::NormalizedMinus:
      return total > 0 ? static_cast<double>(j - k) / total : -1.0;
    case ObservableKind::Sign:
      return j > k ? 1.0 : (j < k ? -1.0 : 0.0);
    case ObservableKind::SignMinus:
      if (total == 0) return -1.0;
      return j > k ? 1.0 : (j < k ? -1.0 : 0.0);
    case ObservableKind::Rate:
      return total > 0 ? static_cast<double>(j) / total : 0.0;
    case ObservableKind::Projector:
      return j > k ? 1.0 : 0.0;
  }
  return 0.0;
}

Eigen::VectorXd split_values(ObservableKind kind, int total) {
  Eigen::VectorXd v(total + 1);
  for (int j = 0; j <= total; ++j) v[j] = outcome_value(kind, {j, total - j});
  return v;
}

double expectation(const SectorAmplitudes& sector, int beam, const PolarizationSetting& s,
                   ObservableKind kind) {
  if (beam < 0 || beam >= sector.beam_count())
    throw std::invalid_argument("expectation: bad beam index");
  const SectorAmplitudes rotated = sector.transformed(beam, s);
  const Eigen::VectorXd values = split_values(kind, sector.total(beam));

  // Marginalize the other beams: accumulate |amp|^2 per split of `beam`.
  const Eigen::VectorXd probs = rotated.probabilities();
  double acc = 0.0;
  Eigen::Index stride = 1;
  for (int b = beam + 1; b < sector.beam_count(); ++b) stride *= sector.dim(b);
  const Eigen::Index dim_b = sector.dim(beam);
  const Eigen::Index block = stride * dim_b;
  for (Eigen::Index idx = 0; idx < probs.size(); ++idx) {
    const Eigen::Index j = (idx % block) / stride;
    acc += probs[idx] * values[j];
  }
  return acc;
}

Eigen::Vector3d stokes_vector(const SectorAmplitudes& sector, ObservableKind kind) {
  if (sector.beam_count() != 1)
    throw std::invalid_argument("stokes_vector: single-beam sector required");
  return {expectation(sector, 0, diagonal_basis(), kind),
          expectation(sector, 0, circular_basis(), kind),
          expectation(sector, 0, rectilinear_basis(), kind)};
}

double stokes_vector_norm(const SectorAmplitudes& sector, ObservableKind kind) {
  return stokes_vector(sector, kind).norm();
}

}  // namespace stokesim
