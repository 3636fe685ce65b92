#include "stokesim/bell_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "stokesim/parallel.hpp"

namespace stokesim {

namespace {

using RowMajorMatrixXcd =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMapMat = Eigen::Map<const RowMajorMatrixXcd>;

std::vector<PolarizationSetting> quad_settings(const SettingsQuad& q) {
  return {q.theta, q.theta_prime, q.phi, q.phi_prime};
}

Eigen::MatrixXd joint_probabilities(const SectorAmplitudes& sector, const TransformMatrix& ma,
                                    const TransformMatrix& mb) {
  ConstMapMat a(sector.flat().data(), sector.dim(0), sector.dim(1));
  Eigen::MatrixXcd c = ma * a * mb.transpose();
  return c.cwiseAbs2();
}

double bisect(double lo, double hi, double tol, const std::function<bool(double)>& low_side) {
  // Precondition: low_side(lo) && !low_side(hi). Returns the flip point.
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (low_side(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Shared eta-descent: violation holds at eta = 1; find where it stops.
std::optional<double> descend_efficiency(const std::function<double(double)>& lhs_at,
                                         const RootFindOptions& opt) {
  const double bound = 2.0;
  if (lhs_at(1.0) <= bound) return std::nullopt;
  double hi = 1.0;
  double lo = hi - opt.scan_step;
  while (lo > 0.0 && lhs_at(lo) > bound) {
    hi = lo;
    lo -= opt.scan_step;
  }
  if (lo <= 0.0) {
    lo = 0.0;
    if (lhs_at(lo) > bound) return 0.0;  // violated at every positive efficiency
  }
  // lo does not violate, hi does; the crossing is the critical efficiency
  return bisect(lo, hi, opt.tol, [&](double eta) { return !(lhs_at(eta) > bound); });
}

}  // namespace

const char* to_string(Inequality ineq) {
  switch (ineq) {
    case Inequality::Chsh: return "chsh";
    case Inequality::Ch: return "ch";
    case Inequality::Mermin: return "mermin";
  }
  return "?";
}

SettingsQuad SettingsQuad::defaults() {
  constexpr double pi = std::numbers::pi;
  return {{0.0, 0.0}, {pi / 4.0, 0.0}, {pi / 8.0, 0.0}, {-pi / 8.0, 0.0}};
}

double pair_correlation(const SectorAmplitudes& sector, const PolarizationSetting& sa,
                        const PolarizationSetting& sb, ObservableKind kind, double eta) {
  if (sector.beam_count() != 2)
    throw std::invalid_argument("pair_correlation: two-beam sector required");
  auto& cache = TransformCache::instance();
  const Eigen::MatrixXd probs = joint_probabilities(sector, *cache.get(sector.total(0), sa),
                                                    *cache.get(sector.total(1), sb));
  const int n_max = std::max(sector.total(0), sector.total(1));
  const LossyValueTable table(kind, eta, n_max);
  return table.split_values(sector.total(0)).transpose() * probs *
         table.split_values(sector.total(1));
}

SectorPairProbs make_pair_probs(const SectorAmplitudes& sector, const SettingsQuad& quad) {
  if (sector.beam_count() != 2)
    throw std::invalid_argument("make_pair_probs: two-beam sector required");
  if (sector.total(0) != sector.total(1))
    throw std::invalid_argument("make_pair_probs: equal per-beam totals required");
  auto& cache = TransformCache::instance();
  const int n = sector.total(0);
  const auto ma0 = cache.get(n, quad.theta);
  const auto ma1 = cache.get(n, quad.theta_prime);
  const auto mb0 = cache.get(n, quad.phi);
  const auto mb1 = cache.get(n, quad.phi_prime);

  ConstMapMat a(sector.flat().data(), n + 1, n + 1);
  const Eigen::MatrixXcd t0 = *ma0 * a;
  const Eigen::MatrixXcd t1 = *ma1 * a;

  SectorPairProbs out;
  out.total = n;
  out.p[0] = (t0 * mb0->transpose()).cwiseAbs2();
  out.p[1] = (t0 * mb1->transpose()).cwiseAbs2();
  out.p[2] = (t1 * mb0->transpose()).cwiseAbs2();
  out.p[3] = (t1 * mb1->transpose()).cwiseAbs2();
  return out;
}

double chsh_sector_value(const SectorPairProbs& probs, const LossyValueTable& table) {
  const Eigen::VectorXd va = table.split_values(probs.total);
  const Eigen::VectorXd vb = table.split_values_swapped(probs.total);
  auto corr = [&](int i) { return double(va.transpose() * probs.p[i] * vb); };
  return corr(0) + corr(1) + corr(2) - corr(3);
}

double ch_sector_value(const SectorPairProbs& probs, const LossyValueTable& table) {
  const Eigen::VectorXd va = table.split_values(probs.total);
  const Eigen::VectorXd vb = table.split_values_swapped(probs.total);
  auto joint = [&](int i) { return double(va.transpose() * probs.p[i] * vb); };
  const double marg1 = probs.p[0].rowwise().sum().dot(va);
  const double marg2 = probs.p[0].colwise().sum().dot(vb);
  return joint(0) + joint(1) + joint(2) - joint(3) - marg1 - marg2;
}

QuadProbCache::QuadProbCache(BellFamily family, const SettingsQuad& quad, int cutoff, int jobs) {
  if (cutoff < 0) throw std::invalid_argument("QuadProbCache: negative cutoff");
  TransformCache::instance().warm(cutoff, quad_settings(quad));
  probs_.resize(cutoff + 1);
  parallel_for(0, cutoff + 1, jobs, [&](int n) {
    probs_[n] = make_pair_probs(bell_family_sector(family, n), quad);
  });
}

std::vector<double> QuadProbCache::chsh_combos(ObservableKind kind, double eta) const {
  const LossyValueTable table(vacuum_subtracted(kind), eta, cutoff());
  std::vector<double> combos(probs_.size());
  for (std::size_t n = 0; n < probs_.size(); ++n)
    combos[n] = chsh_sector_value(probs_[n], table);
  return combos;
}

std::vector<double> QuadProbCache::ch_values(ObservableKind kind, double eta) const {
  const LossyValueTable table(kind, eta, cutoff());
  std::vector<double> values(probs_.size());
  for (std::size_t n = 0; n < probs_.size(); ++n)
    values[n] = ch_sector_value(probs_[n], table);
  return values;
}

InequalityReport assemble_report(const std::vector<double>& sector_values,
                                 const BsvWeights& weights, bool absolute_value) {
  if (sector_values.size() != weights.w.size())
    throw std::invalid_argument("assemble_report: size mismatch");
  InequalityReport rep;
  rep.cutoff = static_cast<int>(sector_values.size()) - 1;
  rep.tail_mass = weights.tail_mass;
  rep.per_sector.reserve(sector_values.size());
  for (std::size_t n = 0; n < sector_values.size(); ++n) {
    const double contrib = weights.w[n] * sector_values[n];
    rep.per_sector.push_back(
        {static_cast<int>(n), weights.w[n], sector_values[n], contrib});
    rep.signed_sum += contrib;
  }
  rep.vacuum_term = rep.per_sector.empty() ? 0.0 : rep.per_sector[0].contribution;
  rep.lhs = absolute_value ? std::abs(rep.signed_sum) : rep.signed_sum;
  return rep;
}

namespace {

InequalityReport ensemble_report(const SectorEnsemble& ensemble, const SettingsQuad& quad,
                                 ObservableKind table_kind, double eta, bool chsh) {
  int n_max = 0;
  for (const auto& e : ensemble.entries)
    n_max = std::max({n_max, e.sector.total(0), e.sector.total(1)});
  const LossyValueTable table(table_kind, eta, n_max);

  InequalityReport rep;
  rep.cutoff = ensemble.cutoff;
  rep.tail_mass = ensemble.tail_mass;
  rep.eta = eta;
  rep.gamma = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : ensemble.entries) {
    const SectorPairProbs probs = make_pair_probs(e.sector, quad);
    const double value =
        chsh ? chsh_sector_value(probs, table) : ch_sector_value(probs, table);
    const double contrib = e.weight * value;
    rep.per_sector.push_back({probs.total, e.weight, value, contrib});
    rep.signed_sum += contrib;
    if (probs.total == 0) rep.vacuum_term = contrib;
  }
  rep.lhs = chsh ? std::abs(rep.signed_sum) : rep.signed_sum;
  return rep;
}

}  // namespace

InequalityReport chsh_lhs(const SectorEnsemble& ensemble, const SettingsQuad& quad,
                          ObservableKind kind, double eta) {
  InequalityReport rep = ensemble_report(ensemble, quad, vacuum_subtracted(kind), eta, true);
  rep.kind = kind;
  return rep;
}

double vacuum_term_chsh(double gamma) {
  const double sech2 = 1.0 / (std::cosh(gamma) * std::cosh(gamma));
  return 2.0 * sech2 * sech2;
}

double per_sector_chsh(int n, const SettingsQuad& quad, ObservableKind kind) {
  const LossyValueTable table(vacuum_subtracted(kind), 1.0, n);
  return chsh_sector_value(make_pair_probs(bsv_sector(n), quad), table);
}

double block_average_from_combos(int N, double gamma, const std::vector<double>& combos) {
  if (N < 1) throw std::invalid_argument("block_average: period index starts at 1");
  const int n_lo = 1 + 8 * (N - 1);
  const int n_hi = 8 * N;
  if (n_hi >= static_cast<int>(combos.size()))
    throw std::invalid_argument("block_average: sector values do not cover the period");
  // Relative weights within the block; the tanh power is referenced to the
  // block start so arbitrarily large gamma stays finite.
  const double t2 = std::isinf(gamma) ? 1.0 : std::tanh(gamma) * std::tanh(gamma);
  double num = 0.0, den = 0.0;
  for (int n = n_lo; n <= n_hi; ++n) {
    const double w = (n + 1.0) * std::pow(t2, n - n_lo);
    num += w * combos[n];
    den += w;
  }
  return num / den;
}

double block_average(int N, double gamma, const SettingsQuad& quad, ObservableKind kind) {
  const QuadProbCache cache(BellFamily::PsiMinus, quad, 8 * N, 1);
  return block_average_from_combos(N, gamma, cache.chsh_combos(kind, 1.0));
}

double asymptotic_bound(double gamma) {
  const double t2 = std::tanh(gamma) * std::tanh(gamma);
  const double sech2 = 1.0 / (std::cosh(gamma) * std::cosh(gamma));
  return 2.0 * (t2 + sech2 * t2);
}

InequalityReport ch_lhs(const SectorEnsemble& ensemble, const SettingsQuad& quad,
                        ObservableKind kind, double eta) {
  InequalityReport rep = ensemble_report(ensemble, quad, kind, eta, false);
  rep.kind = kind;
  return rep;
}

double per_sector_ch(int n, const SettingsQuad& quad, ObservableKind kind) {
  const LossyValueTable table(kind, 1.0, n);
  return ch_sector_value(make_pair_probs(bsv_sector(n), quad), table);
}

// ---------------------------------------------------------------------------
// Mermin / BGHZ
// ---------------------------------------------------------------------------

MerminProbCache::MerminProbCache(const BghzCoefficients& coeffs, int jobs)
    : gamma_(coeffs.gamma), leakage_(coeffs.leakage) {
  const int cutoff = static_cast<int>(coeffs.c.size()) - 1;
  TransformCache::instance().warm(cutoff, {diagonal_basis(), circular_basis()});
  weights_.assign(cutoff + 1, 0.0);
  probs_.resize(cutoff + 1);

  parallel_for(0, cutoff + 1, jobs, [&](int k) {
    const int d = k + 1;
    Eigen::VectorXd diag(d);
    for (int j = 0; j <= k; ++j) diag[j] = coeffs.c[j] * coeffs.c[k - j];
    const double weight = diag.squaredNorm();
    weights_[k] = weight;
    if (weight <= 0.0) {
      for (auto& p : probs_[k]) p = Eigen::VectorXd::Zero(d * d * d);
      return;
    }
    diag /= std::sqrt(weight);

    auto& cache = TransformCache::instance();
    const auto m1 = cache.get(k, diagonal_basis());
    const auto m2 = cache.get(k, circular_basis());
    const std::array<std::array<int, 3>, 4> terms = {{{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}}};
    const std::array<const TransformMatrix*, 2> ms = {m1.get(), m2.get()};

    for (int t = 0; t < 4; ++t) {
      const TransformMatrix& u1 = *ms[terms[t][0]];
      const TransformMatrix& u2 = *ms[terms[t][1]];
      const TransformMatrix& u3 = *ms[terms[t][2]];
      // The sector is diagonal (j, j, j); after the first two beams the
      // partially transformed tensor is column-separable, so only the last
      // beam costs a dense contraction.
      Eigen::MatrixXcd c(d * d, d);
      for (int j = 0; j < d; ++j) {
        Eigen::VectorXcd col1 = u1.col(j) * diag[j];
        for (int a = 0; a < d; ++a) c.col(j).segment(a * d, d) = col1[a] * u2.col(j);
      }
      Eigen::MatrixXcd full = c * u3.transpose();  // rows (a,b), cols cc
      probs_[k][t] = full.cwiseAbs2().reshaped<Eigen::RowMajor>();
    }
  });
}

std::vector<double> MerminProbCache::combos(ObservableKind kind, double eta) const {
  const int cut = cutoff();
  const LossyValueTable table(vacuum_subtracted(kind), eta, cut);
  std::vector<double> out(cut + 1, 0.0);
  for (int k = 0; k <= cut; ++k) {
    const int d = k + 1;
    const Eigen::VectorXd v = table.split_values(k);
    std::array<double, 4> t{};
    for (int term = 0; term < 4; ++term) {
      const Eigen::VectorXd& p = probs_[k][term];
      double acc = 0.0;
      Eigen::Index idx = 0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          const double vab = v[a] * v[b];
          double inner = 0.0;
          for (int cc = 0; cc < d; ++cc) inner += p[idx++] * v[cc];
          acc += vab * inner;
        }
      t[term] = acc;
    }
    out[k] = t[0] - t[1] - t[2] - t[3];
  }
  return out;
}

InequalityReport MerminProbCache::lhs(ObservableKind kind, double eta) const {
  const std::vector<double> sector_values = combos(kind, eta);
  InequalityReport rep;
  rep.cutoff = cutoff();
  rep.kind = kind;
  rep.eta = eta;
  rep.gamma = gamma_;
  double total_weight = 0.0;
  for (int k = 0; k <= cutoff(); ++k) {
    const double contrib = weights_[k] * sector_values[k];
    rep.per_sector.push_back({k, weights_[k], sector_values[k], contrib});
    rep.signed_sum += contrib;
    total_weight += weights_[k];
  }
  rep.vacuum_term = rep.per_sector.empty() ? 0.0 : rep.per_sector[0].contribution;
  rep.tail_mass = std::max(0.0, 1.0 - total_weight);
  rep.lhs = std::abs(rep.signed_sum);
  return rep;
}

InequalityReport mermin_lhs(const BghzCoefficients& coeffs, ObservableKind kind, double eta) {
  return MerminProbCache(coeffs).lhs(kind, eta);
}

// ---------------------------------------------------------------------------
// Critical-parameter solvers
// ---------------------------------------------------------------------------

std::optional<double> critical_efficiency_chsh(const QuadProbCache& cache,
                                               const BsvWeights& weights, ObservableKind kind,
                                               const RootFindOptions& opt) {
  return descend_efficiency(
      [&](double eta) {
        const std::vector<double> combos = cache.chsh_combos(kind, eta);
        double sum = 0.0;
        for (std::size_t n = 0; n < combos.size(); ++n) sum += weights.w[n] * combos[n];
        return std::abs(sum);
      },
      opt);
}

std::optional<double> critical_efficiency_mermin(const MerminProbCache& cache,
                                                 ObservableKind kind,
                                                 const RootFindOptions& opt) {
  return descend_efficiency([&](double eta) { return cache.lhs(kind, eta).lhs; }, opt);
}

std::optional<double> critical_efficiency(double gamma, Inequality ineq, ObservableKind kind,
                                          int cutoff, const SettingsQuad& quad,
                                          const RootFindOptions& opt, int jobs) {
  if (ineq == Inequality::Chsh) {
    const QuadProbCache cache(BellFamily::PsiMinus, quad, cutoff, jobs);
    return critical_efficiency_chsh(cache, bsv_weights(gamma, cutoff), kind, opt);
  }
  if (ineq == Inequality::Mermin) {
    const MerminProbCache cache(bghz_coefficients(gamma, cutoff), jobs);
    return critical_efficiency_mermin(cache, kind, opt);
  }
  throw std::invalid_argument("critical_efficiency: chsh or mermin only");
}

NoiseMixture chsh_noise_mixture(double gamma, const SettingsQuad& quad, ObservableKind kind,
                                int cutoff, std::optional<double> noise_gamma, int jobs) {
  const double gn = noise_gamma.value_or(gamma);
  const BsvWeights w_signal = bsv_weights(gamma, cutoff);
  const BsvWeights w_noise = bsv_weights(gn, cutoff);

  NoiseMixture mix;
  for (BellFamily fam : {BellFamily::PsiMinus, BellFamily::PsiPlus, BellFamily::PhiMinus,
                         BellFamily::PhiPlus}) {
    const QuadProbCache cache(fam, quad, cutoff, jobs);
    const std::vector<double> combos = cache.chsh_combos(kind, 1.0);
    double sum = 0.0;
    for (std::size_t n = 0; n < combos.size(); ++n) sum += w_noise.w[n] * combos[n];
    mix.noise += 0.25 * sum;
    if (fam == BellFamily::PsiMinus) {
      double s = 0.0;
      for (std::size_t n = 0; n < combos.size(); ++n) s += w_signal.w[n] * combos[n];
      mix.signal = s;
    }
  }
  return mix;
}

double NoiseMixture::mixture_lhs(double q) const {
  return std::abs(noise_mixture_lhs(signal, noise, q));
}

std::optional<double> critical_noise(double gamma, const SettingsQuad& quad, ObservableKind kind,
                                     int cutoff, std::optional<double> noise_gamma, int jobs) {
  const NoiseMixture mix = chsh_noise_mixture(gamma, quad, kind, cutoff, noise_gamma, jobs);
  if (mix.signal < 2.0) return std::nullopt;
  if (mix.signal == 2.0 || mix.signal <= mix.noise) return 1.0;  // degenerate boundary
  const double qc = (2.0 - mix.noise) / (mix.signal - mix.noise);
  return std::clamp(qc, 0.0, 1.0);
}

std::optional<double> gamma_threshold(ObservableKind kind, Inequality ineq, int cutoff,
                                      const SettingsQuad& quad, double gamma_max,
                                      const RootFindOptions& opt, int jobs) {
  if (ineq != Inequality::Chsh && ineq != Inequality::Ch)
    throw std::invalid_argument("gamma_threshold: chsh or ch only");
  const QuadProbCache cache(BellFamily::PsiMinus, quad, cutoff, jobs);
  const bool chsh = ineq == Inequality::Chsh;
  const std::vector<double> values =
      chsh ? cache.chsh_combos(kind, 1.0) : cache.ch_values(kind, 1.0);
  const double bound = chsh ? 2.0 : 0.0;

  auto lhs_at = [&](double gamma) {
    const BsvWeights weights = bsv_weights(gamma, cutoff);
    double sum = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) sum += weights.w[n] * values[n];
    return chsh ? std::abs(sum) : sum;
  };

  double lo = opt.scan_step;
  if (!(lhs_at(lo) > bound)) return std::nullopt;
  double hi = lo + opt.scan_step;
  while (hi <= gamma_max && lhs_at(hi) > bound) {
    lo = hi;
    hi += opt.scan_step;
  }
  if (hi > gamma_max) return gamma_max;  // violated on the whole scanned range
  return bisect(lo, hi, opt.tol, [&](double gamma) { return lhs_at(gamma) > bound; });
}

}  // namespace stokesim
