#include "stokesim/observables.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stokesim/state_factory.hpp"

using namespace stokesim;

namespace {
constexpr double kPi = std::numbers::pi;

SectorAmplitudes random_single_beam(int n, std::mt19937& rng) {
  std::normal_distribution<double> gauss;
  SectorAmplitudes s({n});
  for (int j = 0; j <= n; ++j) s.amp(j) = Complex(gauss(rng), gauss(rng));
  s.normalize();
  return s;
}
}  // namespace

TEST_CASE("outcome value table") {
  CHECK(outcome_value(ObservableKind::Sign, {3, 0}) == 1.0);
  CHECK(outcome_value(ObservableKind::Sign, {0, 3}) == -1.0);
  CHECK(outcome_value(ObservableKind::Sign, {2, 2}) == 0.0);
  CHECK(outcome_value(ObservableKind::SignMinus, {0, 0}) == -1.0);
  CHECK(outcome_value(ObservableKind::SignMinus, {1, 1}) == 0.0);
  CHECK(outcome_value(ObservableKind::Normalized, {2, 1}) == doctest::Approx(1.0 / 3.0));
  CHECK(outcome_value(ObservableKind::Normalized, {0, 0}) == 0.0);
  CHECK(outcome_value(ObservableKind::NormalizedMinus, {0, 0}) == -1.0);
  CHECK(outcome_value(ObservableKind::Projector, {1, 1}) == 0.0);
  CHECK(outcome_value(ObservableKind::Projector, {2, 1}) == 1.0);
  CHECK(outcome_value(ObservableKind::Rate, {0, 0}) == 0.0);
  CHECK(outcome_value(ObservableKind::Rate, {3, 1}) == doctest::Approx(0.75));
  CHECK(outcome_value(ObservableKind::Standard, {5, 2}) == 3.0);
}

TEST_CASE("outcome ranges and antisymmetry over all splits up to 300 photons") {
  for (int total = 0; total <= 300; ++total) {
    for (int j = 0; j <= total; ++j) {
      const ModeSplit split{j, total - j};
      const ModeSplit mirror{total - j, j};
      const double sgn = outcome_value(ObservableKind::Sign, split);
      CHECK((sgn == -1.0 || sgn == 0.0 || sgn == 1.0));
      const double sgn_m = outcome_value(ObservableKind::SignMinus, split);
      CHECK((sgn_m == -1.0 || sgn_m == 0.0 || sgn_m == 1.0));
      const double proj = outcome_value(ObservableKind::Projector, split);
      CHECK((proj == 0.0 || proj == 1.0));
      const double rate = outcome_value(ObservableKind::Rate, split);
      CHECK(rate >= 0.0);
      CHECK(rate <= 1.0);
      const double nor = outcome_value(ObservableKind::Normalized, split);
      CHECK(std::abs(nor) <= 1.0);
      CHECK(outcome_value(ObservableKind::Sign, mirror) == -sgn);
      CHECK(outcome_value(ObservableKind::Normalized, mirror) == -nor);
    }
  }
}

TEST_CASE("vacuum subtraction mapping") {
  CHECK(vacuum_subtracted(ObservableKind::Sign) == ObservableKind::SignMinus);
  CHECK(vacuum_subtracted(ObservableKind::Normalized) == ObservableKind::NormalizedMinus);
  CHECK(vacuum_subtracted(ObservableKind::Projector) == ObservableKind::Projector);
  CHECK(vacuum_subtracted(ObservableKind::Rate) == ObservableKind::Rate);
}

TEST_CASE("expectations on |3,0>") {
  const SectorAmplitudes s = fock_product_state(3, 0);
  CHECK(expectation(s, 0, rectilinear_basis(), ObservableKind::Sign) == doctest::Approx(1.0));
  // In the diagonal basis the split probabilities are symmetric binomials and
  // the antisymmetric sign averages to zero.
  CHECK(expectation(s, 0, diagonal_basis(), ObservableKind::Sign) ==
        doctest::Approx(0.0).epsilon(1e-13));
  const SectorAmplitudes vac = fock_product_state(0, 0);
  CHECK(expectation(vac, 0, diagonal_basis(), ObservableKind::Normalized) == 0.0);
}

TEST_CASE("single-photon sectors make all Stokes flavors coincide") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int rep = 0; rep < 8; ++rep) {
    const PolarizationSetting s{angle(rng), angle(rng)};
    SectorAmplitudes state = random_single_beam(1, rng);
    const double sign_v = expectation(state, 0, s, ObservableKind::Sign);
    const double norm_v = expectation(state, 0, s, ObservableKind::Normalized);
    const double std_v = expectation(state, 0, s, ObservableKind::Standard);
    CHECK(sign_v == doctest::Approx(norm_v).epsilon(1e-12));
    CHECK(sign_v == doctest::Approx(std_v).epsilon(1e-12));
  }
}

TEST_CASE("stokes vector of |3,0>") {
  const SectorAmplitudes s = fock_product_state(3, 0);
  const Eigen::Vector3d v = stokes_vector(s, ObservableKind::Sign);
  CHECK(v[0] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(stokes_vector_norm(s, ObservableKind::Sign) == doctest::Approx(1.0));
}

TEST_CASE("sign-Stokes norm is not rotation invariant: |3,0> rotated by pi/8") {
  const SectorAmplitudes rotated = fock_product_state(3, 0).rotated(0, kPi / 8);
  const Eigen::Vector3d v = stokes_vector(rotated, ObservableKind::Sign);
  // Exact values: G1 = G3 = 5*sqrt(2)/8, G2 = 0, norm 5/4.
  const double expect = 5.0 * std::sqrt(2.0) / 8.0;
  CHECK(v[0] == doctest::Approx(expect).epsilon(1e-12));
  CHECK(v[1] == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(v[2] == doctest::Approx(expect).epsilon(1e-12));
  const double norm = stokes_vector_norm(rotated, ObservableKind::Sign);
  CHECK(norm == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(norm > 1.0 + 1e-6);  // strict non-invariance

  // A further rotation to pi/4 lands back on norm 1.
  const SectorAmplitudes quarter = fock_product_state(3, 0).rotated(0, kPi / 4);
  CHECK(stokes_vector_norm(quarter, ObservableKind::Sign) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalized-Stokes norm is invariant under a common basis change") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  for (int n = 1; n <= 6; ++n) {
    const SectorAmplitudes state = random_single_beam(n, rng);
    const double base = stokes_vector_norm(state, ObservableKind::Normalized);
    for (int rep = 0; rep < 4; ++rep) {
      const SectorAmplitudes moved = state.transformed(0, PolarizationSetting{angle(rng), 0.0});
      CHECK(stokes_vector_norm(moved, ObservableKind::Normalized) ==
            doctest::Approx(base).epsilon(1e-10));
    }
  }
}

TEST_CASE("standard-Stokes norm is bounded by the total photon number") {
  std::mt19937 rng(13);
  for (int n = 1; n <= 8; ++n)
    for (int rep = 0; rep < 4; ++rep)
      CHECK(stokes_vector_norm(random_single_beam(n, rng), ObservableKind::Standard) <=
            n + 1e-10);
}
