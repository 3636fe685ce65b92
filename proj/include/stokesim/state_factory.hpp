#pragma once

#include <vector>

#include "stokesim/sector_amplitudes.hpp"

namespace stokesim {

/// The four squeezed-vacuum Bell-family states, defined through the four
/// pair-creation generators; PsiMinus is the polarization-singlet family.
enum class BellFamily { PsiMinus, PsiPlus, PhiMinus, PhiPlus };

const char* to_string(BellFamily f);

/// n-pair singlet-like sector of the 2x2-mode squeezed vacuum: amplitudes
/// (-1)^m / sqrt(n+1) on the anti-diagonal splits |n-m, m; m, n-m>, with the
/// H-mode as the reference mode of each beam.
SectorAmplitudes bsv_sector(int n);

/// Same-total sector of any Bell-family state. PsiMinus equals bsv_sector.
SectorAmplitudes bell_family_sector(BellFamily family, int n);

struct BsvWeights {
  std::vector<double> w;  // w[n] = (n+1) tanh^{2n}(gamma) / cosh^4(gamma)
  double tail_mass = 0.0; // 1 - sum(w)
};

BsvWeights bsv_weights(double gamma, int cutoff);

/// Full truncated ensemble of a Bell-family squeezed state at gain `gamma`.
SectorEnsemble bsv_ensemble(double gamma, int cutoff, BellFamily family = BellFamily::PsiMinus);

/// Triple-photon squeezed amplitudes c_Q in the normalized triple-Fock basis,
/// integrated from c = (1, 0, ...) along the tridiagonal generator
/// dc_Q/dGamma = Q^{3/2} c_{Q-1} - (Q+1)^{3/2} c_{Q+1}.
struct BghzCoefficients {
  double gamma = 0.0;
  std::vector<double> c;   // Q = 0..cutoff
  double leakage = 0.0;    // 1 - sum c_Q^2 lost to truncation
};

/// Throws std::runtime_error when the truncation leakage exceeds
/// `leakage_limit` (the integration left the retained subspace; raise the
/// cutoff or lower gamma).
BghzCoefficients bghz_coefficients(double gamma, int cutoff, double leakage_limit = 1e-8);

/// Three-beam sector with totals (k,k,k): support on the diagonal splits
/// j_1 = j_2 = j_3 = k - m with amplitude c_{k-m} c_m, returned unit-norm.
/// The squared norm of the unnormalized sector is returned in `weight_out`.
SectorAmplitudes bghz_sector(int k, const BghzCoefficients& coeffs, double* weight_out = nullptr);

SectorEnsemble bghz_ensemble(const BghzCoefficients& coeffs);

/// Single-beam product Fock state |j_H, k_V>.
SectorAmplitudes fock_product_state(int j, int k);

}  // namespace stokesim
