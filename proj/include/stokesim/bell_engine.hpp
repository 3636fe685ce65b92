#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stokesim/channels.hpp"
#include "stokesim/state_factory.hpp"

namespace stokesim {

enum class Inequality { Chsh, Ch, Mermin };

const char* to_string(Inequality ineq);

/// Analyzer rotation angles used in the CHSH/CH expressions; beam 1 measures
/// at theta or theta_prime, beam 2 at phi or phi_prime. Defaults are the
/// settings optimal for the squeezed-vacuum singlet.
struct SettingsQuad {
  PolarizationSetting theta;
  PolarizationSetting theta_prime;
  PolarizationSetting phi;
  PolarizationSetting phi_prime;

  static SettingsQuad defaults();
};

struct SectorContribution {
  int n = 0;             // per-beam total of the sector
  double weight = 0.0;
  double sector_value = 0.0;   // inequality combination on this sector alone
  double contribution = 0.0;   // weight * sector_value
};

struct InequalityReport {
  double lhs = 0.0;          // |signed_sum| for CHSH/Mermin, signed_sum for CH
  double signed_sum = 0.0;
  double vacuum_term = 0.0;  // contribution of the all-vacuum sector
  double tail_mass = 0.0;
  std::vector<SectorContribution> per_sector;
  int cutoff = 0;
  double eta = 1.0;
  double q = 1.0;
  double gamma = 0.0;
  ObservableKind kind = ObservableKind::Sign;
};

/// Correlation <A(sA) B(sB)> of one observable kind on a two-beam sector.
/// Both beams are read in the plain orientation (value of the split as
/// given); on the singlet sector this yields -cos 2(theta_A - theta_B).
double pair_correlation(const SectorAmplitudes& sector, const PolarizationSetting& sa,
                        const PolarizationSetting& sb, ObservableKind kind, double eta = 1.0);

// --------------------------------------------------------------------------
// The CHSH / CH engines read beam 2 with its analyzer outputs swapped (the
// outcome of beam 2 refers to its V-paired mode). The squeezed-vacuum
// sectors pair the H mode of beam 1 with the V mode of beam 2, so this
// orientation is the one in which the singlet contributes +2*sqrt(2) at the
// default settings and adds constructively to the +2 vacuum term; with both
// beams read plainly the two parts cancel and no violation survives the
// weight average.
// --------------------------------------------------------------------------

/// Rotated-basis joint outcome probabilities of one two-beam sector at the
/// quad's four setting pairs, in the order (t,p), (t,p'), (t',p), (t',p').
/// These depend only on the state and the settings, so one cache serves every
/// observable kind, efficiency and gain.
struct SectorPairProbs {
  int total = 0;
  std::array<Eigen::MatrixXd, 4> p;
};

SectorPairProbs make_pair_probs(const SectorAmplitudes& sector, const SettingsQuad& quad);

/// CHSH combination E(t,p) + E(t,p') + E(t',p) - E(t',p') on one sector,
/// with the kind's vacuum-subtracted value tables.
double chsh_sector_value(const SectorPairProbs& probs, const LossyValueTable& table);

/// CH combination J(t,p) + J(t,p') + J(t',p) - J(t',p') - m1(t) - m2(p).
double ch_sector_value(const SectorPairProbs& probs, const LossyValueTable& table);

/// Per-sector inequality values for a whole Bell-family ladder n = 0..cutoff.
/// Probabilities are computed once; evaluating further kinds or efficiencies
/// through the returned cache costs only the value-table contraction.
class QuadProbCache {
 public:
  QuadProbCache(BellFamily family, const SettingsQuad& quad, int cutoff, int jobs = 1);

  int cutoff() const { return static_cast<int>(probs_.size()) - 1; }
  const SectorPairProbs& sector(int n) const { return probs_[n]; }

  /// combos[n] = CHSH combination on sector n (vacuum-subtracted kind).
  std::vector<double> chsh_combos(ObservableKind kind, double eta) const;
  /// values[n] = CH combination on sector n (kind used as-is).
  std::vector<double> ch_values(ObservableKind kind, double eta) const;

 private:
  std::vector<SectorPairProbs> probs_;
};

InequalityReport assemble_report(const std::vector<double>& sector_values,
                                 const BsvWeights& weights, bool absolute_value);

// Inequality evaluators ------------------------------------------------------

InequalityReport chsh_lhs(const SectorEnsemble& ensemble, const SettingsQuad& quad,
                          ObservableKind kind, double eta = 1.0);

/// Vacuum contribution to the CHSH left-hand side: 2 / cosh^4(gamma).
double vacuum_term_chsh(double gamma);

/// CHSH combination on the n-pair singlet sector alone (eta = 1).
double per_sector_chsh(int n, const SettingsQuad& quad, ObservableKind kind);

/// Weight-averaged CHSH combination over the N-th period of eight sector
/// totals, n = 1+8(N-1) .. 8N; gamma may be +infinity (weights ~ n+1).
double block_average(int N, double gamma, const SettingsQuad& quad,
                     ObservableKind kind = ObservableKind::Sign);
/// Same, reusing precomputed sector combos (index = n).
double block_average_from_combos(int N, double gamma, const std::vector<double>& combos);

/// Lower bound on the non-vacuum CHSH term: 2(tanh^2 G + sech^2 G tanh^2 G).
/// Adding vacuum_term_chsh(gamma) gives exactly 2.
double asymptotic_bound(double gamma);

InequalityReport ch_lhs(const SectorEnsemble& ensemble, const SettingsQuad& quad,
                        ObservableKind kind, double eta = 1.0);

double per_sector_ch(int n, const SettingsQuad& quad, ObservableKind kind);

/// Mermin-like combination for the three-beam state, measured in the fixed
/// canonical bases 1 = {D,A} and 2 = {R,L}:
/// |<G1 G1 G1> - <G1 G2 G2> - <G2 G1 G2> - <G2 G2 G1>|, classical bound 2.
InequalityReport mermin_lhs(const BghzCoefficients& coeffs, ObservableKind kind,
                            double eta = 1.0);

/// Per-sector Mermin machinery analogous to QuadProbCache; probabilities are
/// gain-specific because the sector amplitudes depend on gamma.
class MerminProbCache {
 public:
  explicit MerminProbCache(const BghzCoefficients& coeffs, int jobs = 1);

  const std::vector<double>& sector_weights() const { return weights_; }
  double leakage() const { return leakage_; }
  double gamma() const { return gamma_; }
  int cutoff() const { return static_cast<int>(weights_.size()) - 1; }

  /// combos[k] = signed Mermin combination on sector k.
  std::vector<double> combos(ObservableKind kind, double eta) const;
  InequalityReport lhs(ObservableKind kind, double eta) const;

 private:
  double gamma_ = 0.0;
  double leakage_ = 0.0;
  std::vector<double> weights_;
  // per sector, per correlator term (111, 122, 212, 221): flattened |amp|^2
  std::vector<std::array<Eigen::VectorXd, 4>> probs_;
};

struct RootFindOptions {
  double tol = 1e-4;
  double scan_step = 0.05;
};

/// Largest efficiency below which the violation disappears, by bisection on
/// eta in [0, 1]. Empty when the inequality is not violated at eta = 1.
std::optional<double> critical_efficiency(double gamma, Inequality ineq, ObservableKind kind,
                                          int cutoff, const SettingsQuad& quad = SettingsQuad::defaults(),
                                          const RootFindOptions& opt = {}, int jobs = 1);

/// Cache-level variants for sweeps that reuse one probability cache across
/// many gains or kinds.
std::optional<double> critical_efficiency_chsh(const QuadProbCache& cache,
                                               const BsvWeights& weights, ObservableKind kind,
                                               const RootFindOptions& opt = {});
std::optional<double> critical_efficiency_mermin(const MerminProbCache& cache,
                                                 ObservableKind kind,
                                                 const RootFindOptions& opt = {});

/// Critical signal fraction q_c = (2 - N)/(S - N) of the white-noise mixture
/// (violation iff q > q_c), clamped to [0, 1]. Empty when the signal itself
/// does not violate. noise_gamma defaults to the signal gain.
std::optional<double> critical_noise(double gamma, const SettingsQuad& quad, ObservableKind kind,
                                     int cutoff, std::optional<double> noise_gamma = std::nullopt,
                                     int jobs = 1);

/// Signed CHSH sums (signal, noise) used by critical_noise; exposed for the
/// mixture cross-checks.
struct NoiseMixture {
  double signal = 0.0;
  double noise = 0.0;
  double mixture_lhs(double q) const;
};
NoiseMixture chsh_noise_mixture(double gamma, const SettingsQuad& quad, ObservableKind kind,
                                int cutoff, std::optional<double> noise_gamma = std::nullopt,
                                int jobs = 1);

/// Largest gain below which the inequality stays violated, by coarse scan
/// plus bisection; empty when there is no violation at small gamma, and
/// gamma_max when the violation never stops on the scanned range.
std::optional<double> gamma_threshold(ObservableKind kind, Inequality ineq, int cutoff,
                                      const SettingsQuad& quad = SettingsQuad::defaults(),
                                      double gamma_max = 3.0, const RootFindOptions& opt = {},
                                      int jobs = 1);

}  // namespace stokesim
