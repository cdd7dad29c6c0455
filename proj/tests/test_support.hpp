#pragma once

#include "dnls/operators.hpp"

#include <random>

namespace dnls::test {

inline constexpr double pi = std::numbers::pi;

inline Field gaussian(const Grid& g, double width = 1, double center = 0, double wavenumber = 0) {
  return sample_field(g, [&](double x) {
    const double y = x - center;
    return std::exp(-y * y / (2 * width * width)) * std::polar(1.0, wavenumber * x);
  });
}

// Smooth localized random field: a handful of Gaussian packets with random
// centers, widths, carriers and complex amplitudes.
inline Field random_packets(const Grid& g, std::uint64_t seed, int packets = 4, double spread = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1, 1);
  Field f(g);
  for (int p = 0; p < packets; ++p) {
    const double c = spread * uni(rng), w = 0.7 + 0.5 * (uni(rng) + 1), k = 2 * uni(rng);
    const std::complex<double> a(uni(rng), uni(rng));
    f += a * gaussian(g, w, c, k);
  }
  return f;
}

// Random band-limited field with modes restricted to |k| < max_mode.
inline Field random_band_limited(const Grid& g, std::uint64_t seed, Index max_mode) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ComplexArray<double> c = ComplexArray<double>::Zero(g.size());
  for (Index k = 0; k < g.size(); ++k)
    if (std::abs(g.wavenumber(k)) < max_mode) c[k] = {gauss(rng), gauss(rng)};
  return detail::field_from_series(g, c);
}

inline double max_abs_diff(const ComplexArray<double>& a, const ComplexArray<double>& b) {
  return (a - b).abs().maxCoeff();
}

inline double rel_l2(const Field& a, const Field& b) { return l2_norm(a - b) / l2_norm(b); }
inline double rel_l2(const Spectrum& a, const Spectrum& b) { return l2_norm(a - b) / l2_norm(b); }

}  // namespace dnls::test

namespace dnls::test {

// least-squares slope of log(value) against log(t)
inline double loglog_slope(const std::vector<double>& t, const std::vector<double>& v) {
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(t[i]), y = std::log(v[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1));
  return t;
}

}  // namespace dnls::test
