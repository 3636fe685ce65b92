#include "stokesim/sector_amplitudes.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace stokesim {

namespace {

using RowMajorMatrixXcd =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMajorMatrixXcd>;
using ConstMapMat = Eigen::Map<const RowMajorMatrixXcd>;

}  // namespace

SectorAmplitudes::SectorAmplitudes(std::vector<int> totals) : totals_(std::move(totals)) {
  if (totals_.empty() || totals_.size() > 3)
    throw std::invalid_argument("SectorAmplitudes: 1 to 3 beams supported");
  Eigen::Index size = 1;
  for (int t : totals_) {
    if (t < 0) throw std::invalid_argument("SectorAmplitudes: negative total");
    size *= t + 1;
  }
  flat_ = Eigen::VectorXcd::Zero(size);
}

Complex& SectorAmplitudes::amp(int j1) {
  assert(beam_count() == 1);
  return flat_[j1];
}

Complex& SectorAmplitudes::amp(int j1, int j2) {
  assert(beam_count() == 2);
  return flat_[j1 * dim(1) + j2];
}

Complex& SectorAmplitudes::amp(int j1, int j2, int j3) {
  assert(beam_count() == 3);
  return flat_[(j1 * dim(1) + j2) * dim(2) + j3];
}

Complex SectorAmplitudes::amp(int j1) const { return const_cast<SectorAmplitudes*>(this)->amp(j1); }
Complex SectorAmplitudes::amp(int j1, int j2) const {
  return const_cast<SectorAmplitudes*>(this)->amp(j1, j2);
}
Complex SectorAmplitudes::amp(int j1, int j2, int j3) const {
  return const_cast<SectorAmplitudes*>(this)->amp(j1, j2, j3);
}

void SectorAmplitudes::normalize() {
  const double norm = std::sqrt(squared_norm());
  if (norm > 0.0) flat_ /= norm;
}

Complex SectorAmplitudes::overlap(const SectorAmplitudes& other) const {
  if (totals_ != other.totals_)
    throw std::invalid_argument("SectorAmplitudes::overlap: totals mismatch");
  return flat_.dot(other.flat_);  // Eigen dot conjugates the left factor
}

SectorAmplitudes SectorAmplitudes::transformed(int beam, const TransformMatrix& m) const {
  if (beam < 0 || beam >= beam_count())
    throw std::invalid_argument("SectorAmplitudes::transformed: bad beam index");
  if (m.rows() != dim(beam) || m.cols() != dim(beam))
    throw std::invalid_argument("SectorAmplitudes::transformed: matrix/sector size mismatch");

  SectorAmplitudes out(totals_);
  const int b = beam_count();
  if (b == 1) {
    out.flat_ = m * flat_;
    return out;
  }
  if (b == 2) {
    ConstMapMat a(flat_.data(), dim(0), dim(1));
    MapMat r(out.flat_.data(), dim(0), dim(1));
    if (beam == 0)
      r = m * a;
    else
      r = a * m.transpose();
    return out;
  }
  // three beams
  const int d0 = dim(0), d1 = dim(1), d2 = dim(2);
  if (beam == 0) {
    ConstMapMat a(flat_.data(), d0, d1 * d2);
    MapMat r(out.flat_.data(), d0, d1 * d2);
    r = m * a;
  } else if (beam == 2) {
    ConstMapMat a(flat_.data(), d0 * d1, d2);
    MapMat r(out.flat_.data(), d0 * d1, d2);
    r = a * m.transpose();
  } else {
    for (int i = 0; i < d0; ++i) {
      ConstMapMat slice(flat_.data() + static_cast<Eigen::Index>(i) * d1 * d2, d1, d2);
      MapMat r(out.flat_.data() + static_cast<Eigen::Index>(i) * d1 * d2, d1, d2);
      r = m * slice;
    }
  }
  return out;
}

SectorAmplitudes SectorAmplitudes::transformed(int beam, const PolarizationSetting& s) const {
  auto m = TransformCache::instance().get(total(beam), s);
  return transformed(beam, *m);
}

SectorAmplitudes SectorAmplitudes::rotated(int beam, double angle) const {
  // An active rotation by `angle` equals a passive re-expression in the basis
  // rotated by -angle.
  return transformed(beam, PolarizationSetting{-angle, 0.0});
}

}  // namespace stokesim
