#include "stokesim/bell_engine.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace stokesim;

namespace {
constexpr double kPi = std::numbers::pi;
const double kRoot8 = 2.0 * std::sqrt(2.0);

double lhs_from(const std::vector<double>& combos, const BsvWeights& w, bool absolute = true) {
  double s = 0.0;
  for (std::size_t n = 0; n < combos.size(); ++n) s += w.w[n] * combos[n];
  return absolute ? std::abs(s) : s;
}
}  // namespace

TEST_CASE("singlet pair correlation equals -cos 2(theta_a - theta_b)") {
  const SectorAmplitudes singlet = bsv_sector(1);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int rep = 0; rep < 10; ++rep) {
    const PolarizationSetting sa{angle(rng), 0.0};
    const PolarizationSetting sb{angle(rng), 0.0};
    const double e = pair_correlation(singlet, sa, sb, ObservableKind::Sign);
    CHECK(e == doctest::Approx(-std::cos(2.0 * (sa.theta - sb.theta))).epsilon(1e-12));
    CHECK(e == doctest::Approx(oracle::singlet_correlation(sa, sb, ObservableKind::Sign))
                   .epsilon(1e-12));
  }
  // with analyzer phases the closed form no longer applies; the dense qubit
  // oracle still must agree
  for (int rep = 0; rep < 5; ++rep) {
    const PolarizationSetting sa{angle(rng), angle(rng)};
    const PolarizationSetting sb{angle(rng), angle(rng)};
    CHECK(pair_correlation(singlet, sa, sb, ObservableKind::Sign) ==
          doctest::Approx(oracle::singlet_correlation(sa, sb, ObservableKind::Sign))
              .epsilon(1e-12));
  }
}

TEST_CASE("vacuum sector correlation of the subtracted sign is +1") {
  const SectorAmplitudes vac = bsv_sector(0);
  for (double t : {0.0, 0.3, 1.2})
    CHECK(pair_correlation(vac, {t, 0.1}, {-t, 0.7}, ObservableKind::SignMinus) == 1.0);
}

TEST_CASE("losing each photon independently rescales the singlet correlation") {
  // one photon per beam: the plain sign correlation just picks up a factor
  // eta per beam (a lost photon reads 0)
  const SectorAmplitudes singlet = bsv_sector(1);
  const PolarizationSetting sa{0.4, 0.0}, sb{-0.2, 0.0};
  const double ideal = pair_correlation(singlet, sa, sb, ObservableKind::Sign);
  const double lossy = pair_correlation(singlet, sa, sb, ObservableKind::Sign, 0.8);
  CHECK(lossy == doctest::Approx(0.64 * ideal).epsilon(1e-13));
}

TEST_CASE("single-beam marginals of the singlet sectors vanish") {
  // the reduced state of each beam is maximally mixed within its sector
  for (int n : {1, 2, 5}) {
    const SectorAmplitudes sec = bsv_sector(n);
    for (double t : {0.0, 0.61, 1.41}) {
      CHECK(expectation(sec, 0, {t, 0.0}, ObservableKind::Normalized) ==
            doctest::Approx(0.0).epsilon(1e-12));
      CHECK(expectation(sec, 1, {t, 0.3}, ObservableKind::Sign) ==
            doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("bsv correlations are invariant under a common rotation") {
  const SectorAmplitudes sec = bsv_sector(2);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  const PolarizationSetting sa{0.2, 0.0}, sb{0.9, 0.0};
  const double base = pair_correlation(sec, sa, sb, ObservableKind::Sign);
  for (int rep = 0; rep < 6; ++rep) {
    const double offset = angle(rng);
    const double moved =
        pair_correlation(sec, sa.rotated(offset), sb.rotated(offset), ObservableKind::Sign);
    CHECK(moved == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("per-sector CHSH matches the qubit oracle on the singlet") {
  const SettingsQuad quad = SettingsQuad::defaults();
  CHECK(per_sector_chsh(1, quad, ObservableKind::Sign) == doctest::Approx(kRoot8).epsilon(1e-10));
  CHECK(per_sector_chsh(1, quad, ObservableKind::Normalized) ==
        doctest::Approx(kRoot8).epsilon(1e-10));
  CHECK(per_sector_chsh(1, quad, ObservableKind::Sign) ==
        doctest::Approx(oracle::qubit_chsh(quad, ObservableKind::Sign)).epsilon(1e-12));

  // arbitrary quads: the engine and the dense 2-qubit oracle stay locked
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int rep = 0; rep < 5; ++rep) {
    const SettingsQuad q{{angle(rng), 0.0}, {angle(rng), 0.0}, {angle(rng), 0.0},
                         {angle(rng), 0.0}};
    CHECK(per_sector_chsh(1, q, ObservableKind::Sign) ==
          doctest::Approx(oracle::qubit_chsh(q, ObservableKind::Sign)).epsilon(1e-12));
  }
}

TEST_CASE("sign and normalized coincide on sectors with at most two photon pairs") {
  const SettingsQuad quad = SettingsQuad::defaults();
  for (int n : {1, 2})
    CHECK(per_sector_chsh(n, quad, ObservableKind::Sign) ==
          doctest::Approx(per_sector_chsh(n, quad, ObservableKind::Normalized))
              .epsilon(1e-13));
}

TEST_CASE("odd-sector CHSH maxima recur with period eight") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 60, 1);
  const std::vector<double> combos = cache.chsh_combos(ObservableKind::Sign, 1.0);
  std::vector<int> maxima;
  for (int n = 3; n + 2 <= 59; n += 2)
    if (combos[n] > combos[n - 2] && combos[n] > combos[n + 2]) maxima.push_back(n);
  REQUIRE(maxima.size() >= 5);
  for (std::size_t i = 1; i < maxima.size(); ++i) CHECK(maxima[i] - maxima[i - 1] == 8);
}

TEST_CASE("only odd sectors violate CHSH") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 60, 1);
  const std::vector<double> combos = cache.chsh_combos(ObservableKind::Sign, 1.0);
  for (int n = 2; n <= 60; n += 2) CHECK(combos[n] < 2.0);
}

TEST_CASE("chsh report: vacuum term and decomposition identity") {
  const SettingsQuad quad = SettingsQuad::defaults();
  for (double gamma : {0.25, 0.75, 1.25}) {
    const InequalityReport rep =
        chsh_lhs(bsv_ensemble(gamma, 40), quad, ObservableKind::Sign);
    CHECK(rep.vacuum_term == doctest::Approx(vacuum_term_chsh(gamma)).epsilon(1e-12));
    double sum = 0.0;
    for (const auto& s : rep.per_sector) sum += s.contribution;
    CHECK(rep.signed_sum == doctest::Approx(sum).epsilon(1e-12));
    CHECK(std::abs(rep.lhs - std::abs(sum)) < 1e-10);
  }
}

TEST_CASE("chsh approaches the pure vacuum value 2 at small gain") {
  const InequalityReport rep =
      chsh_lhs(bsv_ensemble(1e-6, 8), SettingsQuad::defaults(), ObservableKind::Sign);
  CHECK(rep.lhs == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("bsv violates CHSH at unit gain") {
  const InequalityReport rep =
      chsh_lhs(bsv_ensemble(1.0, 60), SettingsQuad::defaults(), ObservableKind::Sign);
  CHECK(rep.lhs > 2.0);
  CHECK(rep.lhs == doctest::Approx(2.159).epsilon(5e-3));
}

TEST_CASE("lossless evaluation is the eta=1 special case, bit for bit") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 20, 1);
  const std::vector<double> at_eta1 = cache.chsh_combos(ObservableKind::Sign, 1.0);
  for (int n : {1, 2, 7, 20})
    CHECK(at_eta1[n] == per_sector_chsh(n, SettingsQuad::defaults(), ObservableKind::Sign));
}

TEST_CASE("losses degrade the violation monotonically on a grid") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 40, 1);
  const BsvWeights w = bsv_weights(1.0, 40);
  double prev = std::numeric_limits<double>::infinity();
  for (double eta : {1.0, 0.95, 0.9, 0.85, 0.8, 0.75, 0.7, 0.65, 0.6}) {
    const double lhs = lhs_from(cache.chsh_combos(ObservableKind::Sign, eta), w);
    CHECK(lhs <= prev + 1e-12);
    prev = lhs;
  }
}

TEST_CASE("vacuum term formula and asymptotic bound close to the constant 2") {
  CHECK(vacuum_term_chsh(0.0) == 2.0);
  CHECK(asymptotic_bound(0.0) == 0.0);
  const double t1 = std::tanh(1.0) * std::tanh(1.0);
  const double s1 = 1.0 - t1;
  CHECK(asymptotic_bound(1.0) == doctest::Approx(2.0 * (t1 + s1 * t1)).epsilon(1e-15));
  for (int i = 0; i <= 100; ++i) {
    const double gamma = 0.03 * i;
    CHECK(std::abs(asymptotic_bound(gamma) + vacuum_term_chsh(gamma) - 2.0) < 1e-14);
  }
}

TEST_CASE("block averages stay above the classical bound") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 24, 1);
  const std::vector<double> combos = cache.chsh_combos(ObservableKind::Sign, 1.0);
  const double inf = std::numeric_limits<double>::infinity();
  for (int N : {1, 2, 3}) {
    double prev = std::numeric_limits<double>::infinity();
    for (double gamma : {1.0, 2.0, 3.0, inf}) {
      const double v = block_average_from_combos(N, gamma, combos);
      CHECK(v > 2.0);
      CHECK(v <= prev + 1e-12);  // decreasing in gamma; infinity is the floor
      prev = v;
    }
  }
  CHECK(block_average(1, 1.0, SettingsQuad::defaults()) ==
        doctest::Approx(block_average_from_combos(1, 1.0, combos)).epsilon(1e-13));
}

TEST_CASE("per-sector CH on the singlet is the positive qubit value") {
  const SettingsQuad quad = SettingsQuad::defaults();
  const double expected = (kRoot8 - 2.0) / 4.0;  // 0.20710678...
  CHECK(per_sector_ch(1, quad, ObservableKind::Projector) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(per_sector_ch(1, quad, ObservableKind::Rate) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(per_sector_ch(1, quad, ObservableKind::Projector) ==
        doctest::Approx(oracle::qubit_ch(quad, ObservableKind::Projector)).epsilon(1e-12));
}

TEST_CASE("ch on the vacuum alone sits on the boundary") {
  SectorEnsemble vac;
  vac.cutoff = 0;
  vac.entries.push_back({1.0, bsv_sector(0)});
  const InequalityReport rep =
      ch_lhs(vac, SettingsQuad::defaults(), ObservableKind::Projector);
  CHECK(rep.lhs == 0.0);
}

TEST_CASE("ch lhs is positive at small gain and the rate variant dies near 0.89") {
  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 50, 1);
  const std::vector<double> proj = cache.ch_values(ObservableKind::Projector, 1.0);
  const std::vector<double> rate = cache.ch_values(ObservableKind::Rate, 1.0);
  for (double gamma : {0.1, 0.5, 1.0}) {
    CHECK(lhs_from(proj, bsv_weights(gamma, 50), false) > 0.0);
  }
  CHECK(lhs_from(rate, bsv_weights(0.5, 50), false) > 0.0);
  CHECK(lhs_from(rate, bsv_weights(1.0, 50), false) < 0.0);
  const auto thr = gamma_threshold(ObservableKind::Rate, Inequality::Ch, 50);
  REQUIRE(thr.has_value());
  CHECK(*thr == doctest::Approx(0.8866).epsilon(0.012));
}

TEST_CASE("gamma threshold for normalized CHSH lands on 0.8866") {
  const auto thr = gamma_threshold(ObservableKind::Normalized, Inequality::Chsh, 100);
  REQUIRE(thr.has_value());
  CHECK(std::abs(*thr - 0.8866) < 0.002);
}

TEST_CASE("mermin: vacuum limit, GHZ sector, and oracle agreement") {
  const BghzCoefficients tiny = bghz_coefficients(1e-4, 10);
  const InequalityReport rep0 = mermin_lhs(tiny, ObservableKind::Sign);
  CHECK(rep0.lhs == doctest::Approx(2.0).epsilon(1e-6));

  const BghzCoefficients c = bghz_coefficients(0.3, 40);
  const MerminProbCache cache(c);
  const std::vector<double> combos = cache.combos(ObservableKind::Sign, 1.0);
  CHECK(combos[0] == doctest::Approx(2.0).epsilon(1e-13));
  // the k=1 sector is exactly (|HHH> + |VVV>)/sqrt(2)
  CHECK(combos[1] == doctest::Approx(oracle::ghz_mermin(0.0)).epsilon(1e-12));
  CHECK(combos[1] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(oracle::ghz_mermin_max() == doctest::Approx(4.0).epsilon(1e-6));

  const InequalityReport rep = cache.lhs(ObservableKind::Sign, 1.0);
  const double c0 = c.c[0];
  CHECK(rep.vacuum_term == doctest::Approx(2.0 * c0 * c0 * c0 * c0).epsilon(1e-12));
  CHECK(rep.lhs > 2.0);
}

TEST_CASE("critical efficiency brackets the crossing") {
  const auto etac = critical_efficiency(0.5, Inequality::Chsh, ObservableKind::Sign, 40);
  REQUIRE(etac.has_value());
  CHECK(*etac > 0.5);
  CHECK(*etac < 1.0);

  const QuadProbCache cache(BellFamily::PsiMinus, SettingsQuad::defaults(), 40, 1);
  const BsvWeights w = bsv_weights(0.5, 40);
  CHECK(lhs_from(cache.chsh_combos(ObservableKind::Sign, *etac + 3e-4), w) > 2.0);
  CHECK(lhs_from(cache.chsh_combos(ObservableKind::Sign, *etac - 3e-4), w) < 2.0);
}

TEST_CASE("critical efficiency is empty without violation") {
  // normalized Stokes CHSH is not violated beyond 0.8866
  CHECK(!critical_efficiency(1.2, Inequality::Chsh, ObservableKind::Normalized, 60).has_value());
}

TEST_CASE("critical noise: formula, cross-check, and boundary") {
  const SettingsQuad quad = SettingsQuad::defaults();
  const NoiseMixture mix = chsh_noise_mixture(0.5, quad, ObservableKind::Sign, 40);
  CHECK(mix.signal > 2.0);
  const auto qc = critical_noise(0.5, quad, ObservableKind::Sign, 40);
  REQUIRE(qc.has_value());
  CHECK(mix.mixture_lhs(*qc) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(*qc > 0.0);
  CHECK(*qc < 1.0);
  // three-point collinearity of the mixture
  const double a = mix.mixture_lhs(0.2), b = mix.mixture_lhs(0.5), c = mix.mixture_lhs(0.8);
  CHECK(std::abs((c - b) - (b - a)) < 1e-12);

  CHECK(!critical_noise(1.2, quad, ObservableKind::Normalized, 60).has_value());
}

TEST_CASE("ensemble path and cache path agree") {
  const SettingsQuad quad = SettingsQuad::defaults();
  const double gamma = 0.8;
  const InequalityReport rep = chsh_lhs(bsv_ensemble(gamma, 30), quad, ObservableKind::Sign);
  const QuadProbCache cache(BellFamily::PsiMinus, quad, 30, 1);
  const double from_cache = lhs_from(cache.chsh_combos(ObservableKind::Sign, 1.0),
                                     bsv_weights(gamma, 30));
  CHECK(rep.lhs == doctest::Approx(from_cache).epsilon(1e-13));
}
