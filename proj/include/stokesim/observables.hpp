#pragma once

#include <Eigen/Dense>

#include "stokesim/sector_amplitudes.hpp"

namespace stokesim {

/// Per-outcome value maps for the Stokes-like observables. All of them are
/// diagonal in the photon-number basis of the analyzed polarization pair, so
/// an observable is fully described by its value on a split (j, k).
///
/// The *Minus variants reassign the vacuum outcome (0, 0) to -1; they are the
/// vacuum-subtracted operators used inside the CHSH and Mermin evaluations.
enum class ObservableKind {
  Standard,         // j - k
  Normalized,       // (j-k)/(j+k), 0 on vacuum
  NormalizedMinus,  // as Normalized but -1 on vacuum
  Sign,             // sign(j-k) in {-1, 0, +1}
  SignMinus,        // as Sign but -1 on vacuum
  Rate,             // j/(j+k), 0 on vacuum
  Projector,        // 1 if j > k else 0
};

const char* to_string(ObservableKind k);

/// Vacuum-subtracted counterpart (Sign -> SignMinus, Normalized ->
/// NormalizedMinus); other kinds are returned unchanged.
ObservableKind vacuum_subtracted(ObservableKind k);

struct ModeSplit {
  int j = 0;  // photons in mode i
  int k = 0;  // photons in mode i_perp
};

double outcome_value(ObservableKind kind, ModeSplit split);

/// Values over all splits of a fixed total: v[j] = outcome(kind, (j, total-j)).
Eigen::VectorXd split_values(ObservableKind kind, int total);

/// Expectation of a single-beam observable on one beam of a sector, measured
/// in basis `s`; the remaining beams are traced out.
double expectation(const SectorAmplitudes& sector, int beam, const PolarizationSetting& s,
                   ObservableKind kind);

/// Triad of expectations in the three canonical bases ({D,A}, {R,L}, {H,V})
/// for a single-beam sector, and its Euclidean norm.
Eigen::Vector3d stokes_vector(const SectorAmplitudes& sector, ObservableKind kind);
double stokes_vector_norm(const SectorAmplitudes& sector, ObservableKind kind);

}  // namespace stokesim
