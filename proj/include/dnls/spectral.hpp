#pragma once

#include "dnls/fft.hpp"
#include "dnls/grid.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <span>
#include <vector>

namespace dnls {

namespace detail {

template <typename Real>
ComplexArray<Real> centered_to_fft_order(const ComplexArray<Real>& centered) {
  const Index n = centered.size(), h = n / 2;
  ComplexArray<Real> out(n);
  out.head(h) = centered.tail(h);
  out.tail(h) = centered.head(h);
  return out;
}

template <typename Real>
ComplexArray<Real> fft_to_centered_order(const ComplexArray<Real>& fft_ordered) {
  // the half-swap is its own inverse for even sizes
  return centered_to_fft_order<Real>(fft_ordered);
}

// Fourier-series coefficients c_k (FFT order) with f(x_n) = sum_k c_k exp(2 pi i k n / N).
template <typename Real>
ComplexArray<Real> series_coefficients(const BasicField<Real>& f) {
  return fft_forward<Real>(f.values()) / static_cast<Real>(f.size());
}

template <typename Real>
BasicField<Real> field_from_series(const SpatialGrid<Real>& grid, const ComplexArray<Real>& coeffs) {
  return BasicField<Real>(grid, fft_backward<Real>(coeffs));
}

inline long double wrap_phase(long double x) {
  return std::remainder(x, 2.0L * std::numbers::pi_v<long double>);
}

template <typename Real>
std::complex<Real> unit_phase(long double x) {
  const long double w = wrap_phase(x);
  return {static_cast<Real>(std::cos(w)), static_cast<Real>(std::sin(w))};
}

template <typename Real>
struct ChirpKernel {
  long double theta0, delta;
  Index n, count, p;
  ComplexArray<Real> pre, h_hat, post;
};

// Kernels depend only on the sampling pattern; callers that resample the same
// pattern repeatedly (profile ODEs, dilations in a time loop) reuse them.
template <typename Real>
const ChirpKernel<Real>& chirp_kernel(long double theta0, long double delta, Index n, Index count) {
  thread_local std::vector<ChirpKernel<Real>> cache;
  for (const auto& k : cache)
    if (k.theta0 == theta0 && k.delta == delta && k.n == n && k.count == count) return k;
  ChirpKernel<Real> k{theta0, delta, n, count, 1, ComplexArray<Real>(n), {}, ComplexArray<Real>(count)};
  while (k.p < n + count - 1) k.p <<= 1;
  for (Index j = 0; j < n; ++j) {
    const long double jl = static_cast<long double>(j);
    k.pre[j] = unit_phase<Real>(-(theta0 * jl + 0.5L * delta * jl * jl));
  }
  ComplexArray<Real> h = ComplexArray<Real>::Zero(k.p);
  for (Index m = 0; m < count; ++m) {
    const long double ml = static_cast<long double>(m);
    h[m] = unit_phase<Real>(0.5L * delta * ml * ml);
  }
  for (Index m = 1; m < n; ++m) {
    const long double ml = static_cast<long double>(m);
    h[k.p - m] = unit_phase<Real>(0.5L * delta * ml * ml);
  }
  k.h_hat = fft_forward<Real>(h);
  for (Index j = 0; j < count; ++j) {
    const long double jl = static_cast<long double>(j);
    k.post[j] = unit_phase<Real>(-0.5L * delta * jl * jl) / static_cast<Real>(k.p);
  }
  if (cache.size() >= 8) cache.erase(cache.begin());
  cache.push_back(std::move(k));
  return cache.back();
}

// y_j = sum_n a_n exp(-i n (theta0 + j delta)), j = 0..count-1, via Bluestein's
// chirp convolution. Phases are reduced in long double.
template <typename Real>
ComplexArray<Real> chirp_sum(const ComplexArray<Real>& a, long double theta0, long double delta, Index count) {
  const ChirpKernel<Real>& k = chirp_kernel<Real>(theta0, delta, a.size(), count);
  ComplexArray<Real> b = ComplexArray<Real>::Zero(k.p);
  b.head(k.n) = a * k.pre;
  const ComplexArray<Real> conv = fft_backward<Real>((fft_forward<Real>(b) * k.h_hat).eval());
  return conv.head(count) * k.post;
}

template <typename Real>
Real inv_sqrt_2pi() {
  return Real(1) / std::sqrt(Real(2) * std::numbers::pi_v<Real>);
}

}  // namespace detail

// Continuum-normalized transform (1/sqrt(2 pi)) int exp(-i x xi) f(x) dx by the
// periodic trapezoidal rule.
template <typename Real>
BasicSpectrum<Real> continuum_fourier(const BasicField<Real>& f) {
  require_finite(f, "continuum_fourier");
  const auto& g = f.grid();
  ComplexArray<Real> c = detail::fft_to_centered_order<Real>(detail::fft_forward<Real>(f.values()));
  const Real scale = g.spacing() * detail::inv_sqrt_2pi<Real>();
  for (Index i = 0; i < c.size(); ++i) c[i] *= (i % 2 == 0 ? scale : -scale);
  return BasicSpectrum<Real>(g, std::move(c));
}

template <typename Real>
BasicField<Real> inverse_fourier(const BasicSpectrum<Real>& s) {
  require_finite(s, "inverse_fourier");
  const auto& g = s.grid();
  ComplexArray<Real> c = s.values();
  const Real scale = g.frequency_spacing() * detail::inv_sqrt_2pi<Real>();
  for (Index i = 0; i < c.size(); ++i) c[i] *= (i % 2 == 0 ? scale : -scale);
  return BasicField<Real>(g, detail::fft_backward<Real>(detail::centered_to_fft_order<Real>(c)));
}

// Multiplies the field's Fourier transform by symbol(xi); symbol is called with
// every grid frequency including the Nyquist frequency -band_limit.
template <typename Real, typename Symbol>
BasicField<Real> apply_fourier_multiplier(const BasicField<Real>& f, Symbol&& symbol) {
  const auto& g = f.grid();
  ComplexArray<Real> c = detail::fft_forward<Real>(f.values());
  const Real dxi = g.frequency_spacing();
  for (Index k = 0; k < c.size(); ++k) c[k] *= std::complex<Real>(symbol(static_cast<Real>(g.wavenumber(k)) * dxi));
  c /= static_cast<Real>(c.size());
  return BasicField<Real>(g, detail::fft_backward<Real>(c));
}

template <typename Real>
BasicField<Real> spatial_derivative(const BasicField<Real>& f, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("spatial_derivative: order must be 1 or 2");
  require_finite(f, "spatial_derivative");
  const Real nyquist = -f.grid().band_limit();
  if (order == 1)
    return apply_fourier_multiplier(f, [nyquist](Real xi) {
      return xi == nyquist ? std::complex<Real>(0) : std::complex<Real>(0, xi);
    });
  return apply_fourier_multiplier(f, [](Real xi) { return std::complex<Real>(-xi * xi); });
}

namespace detail {

// Zero-pads FFT-ordered series coefficients from n to 2n modes; the Nyquist
// mode is dropped so that conjugation commutes with padding.
template <typename Real>
ComplexArray<Real> pad_series(const ComplexArray<Real>& c) {
  const Index n = c.size(), h = n / 2;
  ComplexArray<Real> out = ComplexArray<Real>::Zero(2 * n);
  out.head(h) = c.head(h);
  out.tail(h - 1) = c.tail(h - 1);
  return out;
}

// Inverse of pad_series: keeps |k| < n/2, Nyquist set to zero.
template <typename Real>
ComplexArray<Real> truncate_series(const ComplexArray<Real>& padded, Index n) {
  const Index h = n / 2;
  ComplexArray<Real> out = ComplexArray<Real>::Zero(n);
  out.head(h) = padded.head(h);
  out.tail(h - 1) = padded.tail(h - 1);
  return out;
}

template <typename Real>
void differentiate_series(ComplexArray<Real>& c, const SpatialGrid<Real>& g) {
  const Real dxi = g.frequency_spacing();
  for (Index k = 0; k < c.size(); ++k) c[k] *= std::complex<Real>(0, static_cast<Real>(g.wavenumber(k)) * dxi);
  c[c.size() / 2] = 0;
}

}  // namespace detail

// Product of (d/dx)^{l_i} f_i for three factors. Factors are zero-padded to 2N
// modes before the pointwise product and truncated after, which removes cubic
// aliasing exactly. The Nyquist mode is treated as zero.
template <typename Real>
BasicField<Real> dealias_pad_multiply(std::span<const BasicField<Real>> factors, std::span<const int> derivative_orders) {
  if (factors.size() != 3 || derivative_orders.size() != 3)
    throw std::invalid_argument("dealias_pad_multiply: exactly three factors and three derivative orders required");
  const auto& g = factors[0].grid();
  const Index n = g.size();
  ComplexArray<Real> product = ComplexArray<Real>::Ones(2 * n);
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(factors[i].grid() == g)) throw std::invalid_argument("dealias_pad_multiply: factors on different grids");
    if (derivative_orders[i] != 0 && derivative_orders[i] != 1)
      throw std::invalid_argument("dealias_pad_multiply: derivative order must be 0 or 1");
    require_finite(factors[i], "dealias_pad_multiply");
    ComplexArray<Real> c = detail::series_coefficients(factors[i]);
    if (derivative_orders[i] == 1) detail::differentiate_series(c, g);
    product *= detail::fft_backward<Real>(detail::pad_series(c));
  }
  const ComplexArray<Real> c = detail::fft_forward<Real>(product) / static_cast<Real>(2 * n);
  return detail::field_from_series(g, detail::truncate_series(c, n));
}

template <typename Real>
BasicField<Real> dealias_pad_multiply(const BasicField<Real>& a, const BasicField<Real>& b, const BasicField<Real>& c,
                                      std::array<int, 3> derivative_orders = {0, 0, 0}) {
  const std::array<BasicField<Real>, 3> factors{a, b, c};
  return dealias_pad_multiply<Real>(std::span<const BasicField<Real>>(factors), std::span<const int>(derivative_orders));
}

// Continuum transform of f at uniformly spaced frequencies start + j*step.
// Frequencies outside [-band_limit, band_limit) carry no content of a
// band-limited field and are returned as zero.
template <typename Real>
ComplexArray<Real> fourier_at_uniform(const BasicField<Real>& f, Real start, Real step, Index count) {
  const auto& g = f.grid();
  const long double dx = g.spacing();
  ComplexArray<Real> y = detail::chirp_sum<Real>(f.values(), dx * start, dx * step, count);
  const Real scale = g.spacing() * detail::inv_sqrt_2pi<Real>();
  const Real band = g.band_limit();
  for (Index j = 0; j < count; ++j) {
    const long double zeta = static_cast<long double>(start) + static_cast<long double>(step) * j;
    if (zeta < -band || zeta >= band)
      y[j] = 0;
    else
      y[j] *= scale * detail::unit_phase<Real>(static_cast<long double>(g.half_length()) * zeta);
  }
  return y;
}

// Inverse continuum transform of s at uniformly spaced positions start + j*step.
// Positions outside [-L, L) are returned as zero (the field is taken to be
// localized inside the box).
template <typename Real>
ComplexArray<Real> field_at_uniform(const BasicSpectrum<Real>& s, Real start, Real step, Index count) {
  const auto& g = s.grid();
  const long double dxi = g.frequency_spacing();
  ComplexArray<Real> y = detail::chirp_sum<Real>(s.values(), -dxi * start, -dxi * step, count);
  const Real scale = g.frequency_spacing() * detail::inv_sqrt_2pi<Real>();
  const long double band = g.band_limit();
  for (Index j = 0; j < count; ++j) {
    const long double x = static_cast<long double>(start) + static_cast<long double>(step) * j;
    if (x < -g.half_length() || x >= g.half_length())
      y[j] = 0;
    else
      y[j] *= scale * detail::unit_phase<Real>(-x * band);
  }
  return y;
}

// Band-limited interpolation of the spectrum at arbitrary frequencies.
template <typename Real>
ComplexArray<Real> sample_offgrid(const BasicSpectrum<Real>& s, std::span<const Real> points) {
  const auto& g = s.grid();
  const Real band = g.band_limit();
  for (Real p : points)
    if (!(p >= -band && p < band))
      throw std::out_of_range("sample_offgrid: frequency " + std::to_string(static_cast<double>(p)) +
                              " outside the spectral band");
  const BasicField<Real> f = inverse_fourier(s);
  const Real scale = g.spacing() * detail::inv_sqrt_2pi<Real>();
  ComplexArray<Real> out(static_cast<Index>(points.size()));
  for (std::size_t j = 0; j < points.size(); ++j) {
    std::complex<Real> acc = 0;
    const long double zeta = points[j];
    for (Index n = 0; n < g.size(); ++n)
      acc += f[n] * detail::unit_phase<Real>(-static_cast<long double>(g.position(n)) * zeta);
    out[static_cast<Index>(j)] = scale * acc;
  }
  return out;
}

template <typename Real>
Real l2_norm(const BasicField<Real>& f) {
  return std::sqrt(f.values().abs2().sum() * f.grid().spacing());
}

template <typename Real>
Real l2_norm(const BasicSpectrum<Real>& s) {
  return std::sqrt(s.values().abs2().sum() * s.grid().frequency_spacing());
}

template <typename Real, typename Domain>
Real linf_norm(const GridFunction<Real, Domain>& f) {
  return f.size() == 0 ? Real(0) : f.values().abs().maxCoeff();
}

// ||f||_{H^s} = ||<xi>^s fhat||_{L^2}
template <typename Real>
Real sobolev_norm(const BasicField<Real>& f, int order) {
  const BasicSpectrum<Real> s = continuum_fourier(f);
  const RealArray<Real> xi = f.grid().frequencies();
  const RealArray<Real> weight = (Real(1) + xi.square()).pow(static_cast<Real>(order));
  return std::sqrt((weight * s.values().abs2()).sum() * f.grid().frequency_spacing());
}

template <typename Real>
struct FieldNorms {
  Real l2 = 0;
  Real linf = 0;
  Real h1 = 0;
  Real h2 = 0;
  Real weighted_h11 = 0;  // ||<x> f||_{H^1}
};

template <typename Real>
FieldNorms<Real> norms(const BasicField<Real>& f) {
  require_finite(f, "norms");
  FieldNorms<Real> out;
  out.l2 = l2_norm(f);
  out.linf = linf_norm(f);
  out.h1 = sobolev_norm(f, 1);
  out.h2 = sobolev_norm(f, 2);
  const RealArray<Real> x = f.grid().positions();
  BasicField<Real> weighted(f.grid(), f.values() * (Real(1) + x.square()).sqrt());
  out.weighted_h11 = sobolev_norm(weighted, 1);
  return out;
}

}  // namespace dnls
