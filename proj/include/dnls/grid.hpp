#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dnls {

template <typename Real>
using ComplexArray = Eigen::Array<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealArray = Eigen::Array<Real, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

// Uniform periodic grid on [-L, L) with num_points samples. Frequencies are
// pi k / L for k = -N/2, ..., N/2 - 1; spectra are stored in that (centered)
// order.
template <typename Real>
class SpatialGrid {
 public:
  SpatialGrid(Index num_points, Real half_length) : n_(num_points), half_length_(half_length) {
    if (n_ < 16 || (n_ & (n_ - 1)) != 0)
      throw std::invalid_argument("grid size must be a power of two >= 16, got " + std::to_string(n_));
    if (!(half_length_ > 0) || !std::isfinite(static_cast<double>(half_length_)))
      throw std::invalid_argument("grid half-length must be positive and finite");
  }

  Index size() const { return n_; }
  Real half_length() const { return half_length_; }
  Real spacing() const { return Real(2) * half_length_ / static_cast<Real>(n_); }
  Real frequency_spacing() const { return std::numbers::pi_v<Real> / half_length_; }
  // |xi| must stay below this for a frequency to be representable
  Real band_limit() const { return std::numbers::pi_v<Real> / spacing(); }

  Real position(Index n) const { return -half_length_ + static_cast<Real>(n) * spacing(); }
  Real frequency(Index i) const { return static_cast<Real>(i - n_ / 2) * frequency_spacing(); }
  // signed wavenumber of FFT-ordered index
  Index wavenumber(Index fft_index) const { return fft_index < n_ / 2 ? fft_index : fft_index - n_; }

  RealArray<Real> positions() const {
    RealArray<Real> x(n_);
    for (Index n = 0; n < n_; ++n) x[n] = position(n);
    return x;
  }
  RealArray<Real> frequencies() const {
    RealArray<Real> xi(n_);
    for (Index i = 0; i < n_; ++i) xi[i] = frequency(i);
    return xi;
  }
  // frequencies in FFT order, Nyquist entry included
  RealArray<Real> fft_frequencies() const {
    RealArray<Real> xi(n_);
    for (Index k = 0; k < n_; ++k) xi[k] = static_cast<Real>(wavenumber(k)) * frequency_spacing();
    return xi;
  }

  bool operator==(const SpatialGrid& other) const {
    return n_ == other.n_ && half_length_ == other.half_length_;
  }

 private:
  Index n_;
  Real half_length_;
};

struct PositionDomain {};
struct FrequencyDomain {};

// Complex samples tied to a grid. Field holds values at x_n; Spectrum holds
// continuum-normalized Fourier coefficients at xi_k (centered order).
template <typename Real, typename Domain>
class GridFunction {
 public:
  using Scalar = std::complex<Real>;

  explicit GridFunction(const SpatialGrid<Real>& grid) : grid_(grid), values_(ComplexArray<Real>::Zero(grid.size())) {}
  GridFunction(const SpatialGrid<Real>& grid, ComplexArray<Real> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw std::invalid_argument("sample count " + std::to_string(values_.size()) + " does not match grid size " +
                                  std::to_string(grid_.size()));
  }

  const SpatialGrid<Real>& grid() const { return grid_; }
  const ComplexArray<Real>& values() const { return values_; }
  ComplexArray<Real>& values() { return values_; }
  Index size() const { return values_.size(); }
  const Scalar& operator[](Index i) const { return values_[i]; }
  Scalar& operator[](Index i) { return values_[i]; }

  bool all_finite() const { return values_.isFinite().all(); }

  GridFunction& operator+=(const GridFunction& o) {
    check_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  GridFunction& operator-=(const GridFunction& o) {
    check_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  GridFunction& operator*=(Scalar c) {
    values_ *= c;
    return *this;
  }
  GridFunction& operator/=(Scalar c) {
    values_ /= c;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(Scalar c, GridFunction a) { return a *= c; }
  friend GridFunction operator*(GridFunction a, Scalar c) { return a *= c; }
  friend GridFunction operator/(GridFunction a, Scalar c) { return a /= c; }

  void check_same_grid(const GridFunction& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("grid functions live on different grids");
  }

 private:
  SpatialGrid<Real> grid_;
  ComplexArray<Real> values_;
};

template <typename Real>
using BasicField = GridFunction<Real, PositionDomain>;
template <typename Real>
using BasicSpectrum = GridFunction<Real, FrequencyDomain>;

using Grid = SpatialGrid<double>;
using Field = BasicField<double>;
using Spectrum = BasicSpectrum<double>;

template <typename Real, typename Domain>
void require_finite(const GridFunction<Real, Domain>& f, const char* where) {
  if (!f.all_finite()) throw std::domain_error(std::string(where) + ": non-finite samples");
}

// Builds a field from a callable evaluated at every grid point.
template <typename Real, typename Fn>
BasicField<Real> sample_field(const SpatialGrid<Real>& grid, Fn&& fn) {
  ComplexArray<Real> v(grid.size());
  for (Index n = 0; n < grid.size(); ++n) v[n] = std::complex<Real>(fn(grid.position(n)));
  return BasicField<Real>(grid, std::move(v));
}

template <typename Real, typename Fn>
BasicSpectrum<Real> sample_spectrum(const SpatialGrid<Real>& grid, Fn&& fn) {
  ComplexArray<Real> v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) v[i] = std::complex<Real>(fn(grid.frequency(i)));
  return BasicSpectrum<Real>(grid, std::move(v));
}

}  // namespace dnls
