#include "stokesim/state_factory.hpp"

#include <algorithm>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace stokesim {

const char* to_string(BellFamily f) {
  switch (f) {
    case BellFamily::PsiMinus: return "psi-";
    case BellFamily::PsiPlus: return "psi+";
    case BellFamily::PhiMinus: return "phi-";
    case BellFamily::PhiPlus: return "phi+";
  }
  return "?";
}

SectorAmplitudes bsv_sector(int n) { return bell_family_sector(BellFamily::PsiMinus, n); }

SectorAmplitudes bell_family_sector(BellFamily family, int n) {
  if (n < 0) throw std::invalid_argument("bell_family_sector: negative total");
  SectorAmplitudes sec({n, n});
  const double scale = 1.0 / std::sqrt(static_cast<double>(n) + 1.0);
  const bool minus = family == BellFamily::PsiMinus || family == BellFamily::PhiMinus;
  const double step = minus ? -1.0 : 1.0;
  double coeff = scale;
  for (int m = 0; m <= n; ++m) {
    if (family == BellFamily::PsiMinus || family == BellFamily::PsiPlus) {
      // |n-m>_H1 |m>_V1 |m>_H2 |n-m>_V2 : beam-1 H-count n-m, beam-2 H-count m
      sec.amp(n - m, m) = coeff;
    } else {
      // |n-m>_H1 |m>_V1 |n-m>_H2 |m>_V2 : equal H-counts on both beams
      sec.amp(n - m, n - m) = coeff;
    }
    coeff *= step;
  }
  return sec;
}

BsvWeights bsv_weights(double gamma, int cutoff) {
  if (gamma < 0.0 || !std::isfinite(gamma))
    throw std::invalid_argument("bsv_weights: gain must be finite and non-negative");
  if (cutoff < 0) throw std::invalid_argument("bsv_weights: negative cutoff");
  BsvWeights out;
  out.w.resize(cutoff + 1);
  const double t2 = std::tanh(gamma) * std::tanh(gamma);
  const double sech2 = 1.0 / (std::cosh(gamma) * std::cosh(gamma));
  const double norm = sech2 * sech2;  // 1 / cosh^4
  double pow_t2 = 1.0;                // t2^n, with 0^0 = 1 at gamma = 0
  double sum = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    out.w[n] = (n + 1.0) * pow_t2 * norm;
    sum += out.w[n];
    pow_t2 *= t2;
  }
  out.tail_mass = std::max(0.0, 1.0 - sum);
  return out;
}

SectorEnsemble bsv_ensemble(double gamma, int cutoff, BellFamily family) {
  BsvWeights weights = bsv_weights(gamma, cutoff);
  SectorEnsemble ens;
  ens.cutoff = cutoff;
  ens.tail_mass = weights.tail_mass;
  ens.entries.reserve(cutoff + 1);
  for (int n = 0; n <= cutoff; ++n)
    ens.entries.push_back({weights.w[n], bell_family_sector(family, n)});
  return ens;
}

namespace {

// c(G) = exp(G A) e0 for the tridiagonal antisymmetric generator
// A(q, q-1) = q^{3/2}, evaluated exactly through the eigendecomposition of
// the similar real symmetric tridiagonal matrix (D A D^-1 = -iT with
// D = diag(i^q)), so there is no step error and the flow is unitary to
// machine precision at any dimension.
Eigen::VectorXd triple_flow_coefficients(double gamma, int dim) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd sub(dim - 1);
  for (int q = 1; q < dim; ++q) sub[q - 1] = std::pow(static_cast<double>(q), 1.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  const Eigen::MatrixXd& v = solver.eigenvectors();
  const Eigen::VectorXd& lam = solver.eigenvalues();

  Eigen::VectorXcd weighted(dim);
  for (int m = 0; m < dim; ++m) weighted[m] = v(0, m) * std::polar(1.0, gamma * lam[m]);
  const Eigen::VectorXcd raw = v.cast<Complex>() * weighted;

  // c_q = Re(i^{-q} raw_q); the generator's antisymmetry keeps c real.
  Eigen::VectorXd c(dim);
  for (int q = 0; q < dim; ++q) {
    switch (q % 4) {
      case 0: c[q] = raw[q].real(); break;
      case 1: c[q] = raw[q].imag(); break;
      case 2: c[q] = -raw[q].real(); break;
      default: c[q] = -raw[q].imag(); break;
    }
  }
  return c;
}

}  // namespace

BghzCoefficients bghz_coefficients(double gamma, int cutoff, double leakage_limit) {
  if (gamma < 0.0 || !std::isfinite(gamma))
    throw std::invalid_argument("bghz_coefficients: gain must be finite and non-negative");
  if (cutoff < 0) throw std::invalid_argument("bghz_coefficients: negative cutoff");

  BghzCoefficients out;
  out.gamma = gamma;
  if (gamma == 0.0) {
    out.c.assign(cutoff + 1, 0.0);
    out.c[0] = 1.0;
    out.leakage = 0.0;
    return out;
  }

  // The flow is evaluated in an enlarged space so the reported leakage is the
  // true tail mass beyond the requested cutoff, not an artifact of the
  // truncated (still antisymmetric, hence norm-preserving) generator. The
  // margin grows until the boundary amplitudes certify that nothing escaped
  // the enlarged space itself.
  constexpr int kMaxDim = 640;
  int margin = std::max(16, (cutoff + 1) / 2);
  for (;;) {
    const int dim = std::min(kMaxDim, cutoff + 1 + margin);
    const Eigen::VectorXd full = triple_flow_coefficients(gamma, dim);
    if (std::abs(full.squaredNorm() - 1.0) > 1e-9)
      throw std::runtime_error("bghz_coefficients: flow lost norm");
    const double boundary = full.tail(std::min(3, dim)).squaredNorm();
    if (boundary < 1e-16) {
      const double kept = full.head(cutoff + 1).squaredNorm();
      out.c.assign(full.data(), full.data() + cutoff + 1);
      out.leakage = std::max(0.0, 1.0 - kept);
      if (out.leakage > leakage_limit)
        throw std::runtime_error(
            "bghz_coefficients: truncation leakage " + std::to_string(out.leakage) +
            " exceeds the limit; increase the cutoff or reduce the gain");
      return out;
    }
    if (dim >= kMaxDim)
      throw std::runtime_error(
          "bghz_coefficients: amplitude flow escapes every tractable cutoff at this gain; "
          "reduce the gain");
    margin *= 2;
  }
}

SectorAmplitudes bghz_sector(int k, const BghzCoefficients& coeffs, double* weight_out) {
  const int cutoff = static_cast<int>(coeffs.c.size()) - 1;
  if (k < 0 || k > cutoff) throw std::invalid_argument("bghz_sector: total out of range");
  SectorAmplitudes sec({k, k, k});
  double weight = 0.0;
  for (int m = 0; m <= k; ++m) {
    const int j = k - m;  // photons in the a (H-like) mode of every beam
    const double amp = coeffs.c[j] * coeffs.c[m];
    sec.amp(j, j, j) += amp;
  }
  weight = sec.squared_norm();
  if (weight > 0.0) sec.normalize();
  if (weight_out) *weight_out = weight;
  return sec;
}

SectorEnsemble bghz_ensemble(const BghzCoefficients& coeffs) {
  const int cutoff = static_cast<int>(coeffs.c.size()) - 1;
  SectorEnsemble ens;
  ens.cutoff = cutoff;
  ens.entries.reserve(cutoff + 1);
  double total = 0.0;
  for (int k = 0; k <= cutoff; ++k) {
    double w = 0.0;
    SectorAmplitudes sec = bghz_sector(k, coeffs, &w);
    total += w;
    ens.entries.push_back({w, std::move(sec)});
  }
  ens.tail_mass = std::max(0.0, 1.0 - total);
  return ens;
}

SectorAmplitudes fock_product_state(int j, int k) {
  if (j < 0 || k < 0) throw std::invalid_argument("fock_product_state: negative count");
  SectorAmplitudes sec({j + k});
  sec.amp(j) = 1.0;
  return sec;
}

}  // namespace stokesim
