#include "stokesim/fock_core.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace stokesim {

namespace {

constexpr double kPi = std::numbers::pi;

double log_factorial(int n) {
  static constexpr int kTableSize = 512;
  static const auto table = [] {
    std::array<double, kTableSize> t{};
    for (int i = 0; i < kTableSize; ++i) t[i] = std::lgamma(static_cast<double>(i) + 1.0);
    return t;
  }();
  if (n < kTableSize) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// Eigensystem of the sector rotation generator. The passive rotation by
// theta acts on the n-photon sector as R = exp(-theta G) with G tridiagonal
// antisymmetric, G(c-1, c) = sqrt(c (n - c + 1)). With D = diag(i^j) one has
// G = D^-1 (-i T) D for the real symmetric tridiagonal T, so
// R = W exp(i theta L) W^dag where W = D^-1 V and T = V L V^T. W is unitary,
// which keeps R unitary to machine precision at any sector size; the
// eigensystem is theta independent and cached per n.
struct SectorEigenBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXcd w;  // unitary
};

const SectorEigenBasis& sector_eigen_basis(int n) {
  static std::mutex mu;
  static std::vector<std::unique_ptr<SectorEigenBasis>> cache;
  std::scoped_lock lock(mu);
  if (n >= static_cast<int>(cache.size())) cache.resize(n + 1);
  if (!cache[n]) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n + 1);
    Eigen::VectorXd sub(n);
    for (int c = 1; c <= n; ++c) sub[c - 1] = std::sqrt(double(c) * double(n - c + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    auto basis = std::make_unique<SectorEigenBasis>();
    basis->eigenvalues = solver.eigenvalues();
    // i^{-j}, exact on the four-cycle
    static constexpr std::array<Complex, 4> kInvPowers = {
        Complex(1, 0), Complex(0, -1), Complex(-1, 0), Complex(0, 1)};
    Eigen::VectorXcd d_inv(n + 1);
    for (int j = 0; j <= n; ++j) d_inv[j] = kInvPowers[j % 4];
    basis->w = d_inv.asDiagonal() * solver.eigenvectors().cast<Complex>();
    cache[n] = std::move(basis);
  }
  return *cache[n];
}

int sign_pow(double base, int exponent) {
  return (base < 0.0 && (exponent & 1)) ? -1 : 1;
}

}  // namespace

PolarizationSetting diagonal_basis() { return {kPi / 4.0, 0.0}; }
PolarizationSetting circular_basis() { return {-kPi / 4.0, 3.0 * kPi / 2.0}; }
PolarizationSetting rectilinear_basis() { return {0.0, 0.0}; }

Complex transform_coefficient(int n, int j_in, int j_out, const PolarizationSetting& s) {
  if (n < 0 || j_in < 0 || j_in > n || j_out < 0 || j_out > n)
    throw std::invalid_argument("transform_coefficient: split index out of range");
  if (!std::isfinite(s.theta) || !std::isfinite(s.phi))
    throw std::invalid_argument("transform_coefficient: non-finite setting");

  const double c = std::cos(s.theta);
  const double sn = std::sin(s.theta);
  const int k_in = n - j_in;
  if (s.theta == 0.0) {  // exact identity up to the mode phase
    if (j_in != j_out) return Complex(0.0);
    if (s.phi == 0.0 || k_in == 0) return Complex(1.0);
    return std::polar(1.0, -s.phi * k_in);
  }

  // Expand (a_H^dag)^{j_in} (a_V^dag)^{k_in} with
  //   a_H^dag = cos(t) a_i^dag - sin(t) a_perp^dag
  //   a_V^dag = e^{-i phi} (sin(t) a_i^dag + cos(t) a_perp^dag)
  // and collect the coefficient of the normalized ket |j_out, n-j_out>.
  long double acc = 0.0L;
  const double lead = 0.5 * (log_factorial(j_out) + log_factorial(n - j_out) -
                             log_factorial(j_in) - log_factorial(k_in));
  const int p_lo = std::max(0, j_out - k_in);
  const int p_hi = std::min(j_in, j_out);
  for (int p = p_lo; p <= p_hi; ++p) {
    const int c_pow = n - j_in - j_out + 2 * p;
    const int s_pow = j_in + j_out - 2 * p;
    if (c == 0.0 && c_pow > 0) continue;
    if (sn == 0.0 && s_pow > 0) continue;
    double lm = lead + log_factorial(j_in) - log_factorial(p) - log_factorial(j_in - p) +
                log_factorial(k_in) - log_factorial(j_out - p) -
                log_factorial(k_in - j_out + p);
    if (c_pow > 0) lm += c_pow * std::log(std::abs(c));
    if (s_pow > 0) lm += s_pow * std::log(std::abs(sn));
    int sign = ((j_in - p) & 1) ? -1 : 1;
    sign *= sign_pow(c, c_pow) * sign_pow(sn, s_pow);
    acc += sign * std::exp(static_cast<long double>(lm));
  }
  const double magnitude = static_cast<double>(acc);
  if (s.phi == 0.0 || k_in == 0) return Complex(magnitude, 0.0);
  return std::polar(magnitude, -s.phi * k_in);
}

TransformMatrix build_transform(int n, const PolarizationSetting& s) {
  if (n < 0) throw std::invalid_argument("build_transform: negative total");
  if (!std::isfinite(s.theta) || !std::isfinite(s.phi))
    throw std::invalid_argument("build_transform: non-finite setting");
  if (n == 0) return TransformMatrix::Ones(1, 1);

  TransformMatrix m;
  if (s.theta == 0.0) {
    m = TransformMatrix::Identity(n + 1, n + 1);
  } else {
    const SectorEigenBasis& basis = sector_eigen_basis(n);
    Eigen::VectorXcd phase(n + 1);
    for (int j = 0; j <= n; ++j) phase[j] = std::polar(1.0, s.theta * basis.eigenvalues[j]);
    m = basis.w * phase.asDiagonal() * basis.w.adjoint();
  }
  if (s.phi != 0.0) {
    for (int j_in = 0; j_in <= n; ++j_in)
      m.col(j_in) *= std::polar(1.0, -s.phi * (n - j_in));
  }
  return m;
}

struct TransformCache::Impl {
  struct Key {
    int n;
    std::uint64_t theta_bits;
    std::uint64_t phi_bits;
    auto operator<=>(const Key&) const = default;
  };
  static Key make_key(int n, const PolarizationSetting& s) {
    Key k{n, 0, 0};
    std::memcpy(&k.theta_bits, &s.theta, sizeof(double));
    std::memcpy(&k.phi_bits, &s.phi, sizeof(double));
    return k;
  }
  std::mutex mu;
  std::map<Key, std::shared_ptr<const TransformMatrix>> entries;
};

std::shared_ptr<TransformCache::Impl> TransformCache::make_impl() {
  return std::make_shared<Impl>();
}

TransformCache& TransformCache::instance() {
  static TransformCache cache;
  return cache;
}

std::shared_ptr<const TransformMatrix> TransformCache::get(int n, const PolarizationSetting& s) {
  const auto key = Impl::make_key(n, s);
  {
    std::scoped_lock lock(impl_->mu);
    auto it = impl_->entries.find(key);
    if (it != impl_->entries.end()) return it->second;
  }
  // Built outside the lock; a racing builder just wins the insert.
  auto built = std::make_shared<const TransformMatrix>(build_transform(n, s));
  std::scoped_lock lock(impl_->mu);
  auto [it, inserted] = impl_->entries.emplace(key, std::move(built));
  return it->second;
}

void TransformCache::warm(int n_max, const std::vector<PolarizationSetting>& settings) {
  for (const auto& s : settings)
    for (int n = 0; n <= n_max; ++n) get(n, s);
}

double unitarity_defect(const TransformMatrix& m) {
  TransformMatrix prod = m * m.adjoint();
  prod -= TransformMatrix::Identity(m.rows(), m.cols());
  return prod.cwiseAbs().maxCoeff();
}

}  // namespace stokesim
