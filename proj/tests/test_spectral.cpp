#include "doctest.h"
#include "test_support.hpp"

using namespace dnls;
using namespace dnls::test;

TEST_CASE("grid validation and frequency lattice") {
  CHECK_THROWS(Grid(12, 1.0));
  CHECK_THROWS(Grid(8, 1.0));
  CHECK_THROWS(Grid(64, 0.0));
  const Grid g(64, 5.0);
  CHECK(g.spacing() * 64 == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(g.frequency(0) == doctest::Approx(-32 * pi / 5));
  CHECK(g.frequency(32) == 0.0);
  CHECK(g.frequency(63) == doctest::Approx(31 * pi / 5));
  CHECK(g.wavenumber(33) == -31);
}

TEST_CASE("continuum transform of Gaussians") {
  const Grid g(1024, 40.0);
  const Spectrum s = continuum_fourier(gaussian(g));
  CHECK(max_abs_diff(s.values(), sample_spectrum(g, [](double xi) { return std::exp(-xi * xi / 2); }).values()) < 1e-10);

  const Spectrum shifted = continuum_fourier(gaussian(g, 1, 0, 3));
  const auto target = sample_spectrum(g, [](double xi) { return std::exp(-(xi - 3) * (xi - 3) / 2); });
  CHECK(max_abs_diff(shifted.values(), target.values()) < 1e-10);

  CHECK(continuum_fourier(Field(g)).values().abs().maxCoeff() == 0.0);

  const Field back = inverse_fourier(sample_spectrum(g, [](double xi) { return std::exp(-xi * xi / 2); }));
  CHECK(max_abs_diff(back.values(), gaussian(g).values()) < 1e-10);
}

TEST_CASE("single-mode spectrum inverts to a complex exponential") {
  const Grid g(128, 10.0);
  Spectrum s(g);
  const Index i = 64 + 5;
  s[i] = 1.0;
  const Field f = inverse_fourier(s);
  const double amp = g.frequency_spacing() / std::sqrt(2 * pi);
  for (Index n = 0; n < g.size(); ++n)
    CHECK(std::abs(f[n] - amp * std::polar(1.0, g.frequency(i) * g.position(n))) < 1e-14);
}

TEST_CASE("round trip and Plancherel on random inputs") {
  const Grid g(512, 20.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Field f = random_band_limited(g, seed, 256);
    const Spectrum s = continuum_fourier(f);
    CHECK(rel_l2(inverse_fourier(s), f) < 1e-12);
    CHECK(std::abs(l2_norm(s) / l2_norm(f) - 1) < 1e-12);
    CHECK(rel_l2(continuum_fourier(inverse_fourier(s)), s) < 1e-12);
  }
}

TEST_CASE("non-finite input is rejected") {
  const Grid g(64, 5.0);
  Field f(g);
  f[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(continuum_fourier(f), std::domain_error);
  CHECK_THROWS_AS(norms(f), std::domain_error);
  Spectrum s(g);
  s[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(inverse_fourier(s), std::domain_error);
}

TEST_CASE("spectral derivatives") {
  const Grid g(1024, 40.0);
  const Field f = gaussian(g);
  const Field d1 = spatial_derivative(f, 1);
  const Field exact1 = sample_field(g, [](double x) { return -x * std::exp(-x * x / 2); });
  CHECK(max_abs_diff(d1.values(), exact1.values()) < 1e-11);

  Field c(g);
  c.values().setConstant(2.5);
  CHECK(spatial_derivative(c, 1).values().abs().maxCoeff() < 1e-13);

  const double k0 = 7 * pi / 40;
  const Field mode = sample_field(g, [&](double x) { return std::sin(k0 * x); });
  CHECK(max_abs_diff(spatial_derivative(mode, 2).values(), (-k0 * k0 * mode).values()) < 1e-11);

  CHECK_THROWS_AS(spatial_derivative(f, 3), std::invalid_argument);
  CHECK_THROWS_AS(spatial_derivative(f, 0), std::invalid_argument);
}

TEST_CASE("derivative acts as (i xi)^order on the transform") {
  const Grid g(256, 12.0);
  const Field f = random_band_limited(g, 7, 100);
  const RealArray<double> xi = g.frequencies();
  ComplexArray<double> expect1 = continuum_fourier(f).values() * (std::complex<double>(0, 1) * xi);
  expect1[0] = 0;  // Nyquist mode of a first derivative is dropped
  CHECK(max_abs_diff(continuum_fourier(spatial_derivative(f, 1)).values(), expect1) < 1e-11);
  const ComplexArray<double> expect2 = continuum_fourier(f).values() * (-xi * xi);
  CHECK(max_abs_diff(continuum_fourier(spatial_derivative(f, 2)).values(), expect2) < 1e-10);
}

namespace {

// Oracle: same cubic product evaluated on a 4N grid by plain pointwise
// multiplication, then projected back to |k| < N/2.
Field fine_grid_product(const std::array<Field, 3>& f, std::array<int, 3> orders) {
  const Grid& g = f[0].grid();
  const Index n = g.size(), big = 4 * n;
  ComplexArray<double> prod = ComplexArray<double>::Ones(big);
  for (int i = 0; i < 3; ++i) {
    ComplexArray<double> c = detail::series_coefficients(f[i]);
    ComplexArray<double> p = ComplexArray<double>::Zero(big);
    for (Index k = 0; k < n; ++k) {
      const Index w = g.wavenumber(k);
      if (w == -n / 2) continue;
      std::complex<double> v = c[k];
      if (orders[i] == 1) v *= std::complex<double>(0, w * g.frequency_spacing());
      p[w >= 0 ? w : big + w] = v;
    }
    prod *= detail::fft_backward<double>(p);
  }
  const ComplexArray<double> c = detail::fft_forward<double>(prod) / static_cast<double>(big);
  ComplexArray<double> out = ComplexArray<double>::Zero(n);
  for (Index k = 0; k < n; ++k) {
    const Index w = g.wavenumber(k);
    if (w == -n / 2) continue;
    out[k] = c[w >= 0 ? w : big + w];
  }
  return detail::field_from_series(g, out);
}

}  // namespace

TEST_CASE("dealiased cubic products") {
  const Grid g(64, pi * 32);  // unit frequency spacing
  auto mode = [&](Index k0) {
    return sample_field(g, [&](double x) { return std::polar(1.0, k0 * g.frequency_spacing() * x); });
  };
  const Field in_band = dealias_pad_multiply(mode(5), mode(5), mode(5));
  CHECK(max_abs_diff(in_band.values(), mode(15).values()) < 1e-13);
  // 3*12 = 36 lies outside |k| < 32: aliasing would fold it to -28
  const Field out_band = dealias_pad_multiply(mode(12), mode(12), mode(12));
  CHECK(out_band.values().abs().maxCoeff() < 1e-13);
  CHECK(dealias_pad_multiply(mode(3), Field(g), mode(4)).values().abs().maxCoeff() == 0.0);

  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Grid h(256, 15.0);
    const std::array<Field, 3> f{random_band_limited(h, 3 * seed, 128), random_band_limited(h, 3 * seed + 1, 128),
                                 random_band_limited(h, 3 * seed + 2, 128)};
    const std::array<int, 3> orders{static_cast<int>(seed % 2), 0, static_cast<int>((seed / 2) % 2)};
    const Field fast = dealias_pad_multiply(f[0], f[1], f[2], orders);
    CHECK(rel_l2(fast, fine_grid_product(f, orders)) < 1e-12);
  }

  const Grid other(128, 15.0);
  const std::array<Field, 3> mixed{Field(g), Field(other), Field(g)};
  const std::array<int, 3> zeros{0, 0, 0};
  CHECK_THROWS_AS(dealias_pad_multiply<double>(std::span<const Field>(mixed), std::span<const int>(zeros)),
                  std::invalid_argument);
  const std::array<Field, 2> two{Field(g), Field(g)};
  CHECK_THROWS_AS(dealias_pad_multiply<double>(std::span<const Field>(two), std::span<const int>(zeros)),
                  std::invalid_argument);
}

TEST_CASE("off-grid sampling") {
  const Grid g(512, 30.0);
  const Spectrum s = continuum_fourier(gaussian(g));
  std::vector<double> on_grid, mid;
  for (Index i = 100; i < 412; i += 7) {
    on_grid.push_back(g.frequency(i));
    mid.push_back(g.frequency(i) + 0.5 * g.frequency_spacing());
  }
  const ComplexArray<double> a = sample_offgrid(s, std::span<const double>(on_grid));
  for (std::size_t j = 0; j < on_grid.size(); ++j) CHECK(std::abs(a[j] - s[100 + 7 * j]) < 1e-13);
  const ComplexArray<double> b = sample_offgrid(s, std::span<const double>(mid));
  for (std::size_t j = 0; j < mid.size(); ++j) CHECK(std::abs(b[j] - std::exp(-mid[j] * mid[j] / 2)) < 1e-8);

  // (xi^3 - 2 xi) e^{-xi^2/2} sampled at xi/3
  auto poly = [](double xi) { return (xi * xi * xi - 2 * xi) * std::exp(-xi * xi / 2); };
  const Spectrum p = sample_spectrum(g, poly);
  std::vector<double> scaled;
  for (Index i = 0; i < g.size(); i += 5) scaled.push_back(g.frequency(i) / 3);
  const ComplexArray<double> c = sample_offgrid(p, std::span<const double>(scaled));
  for (std::size_t j = 0; j < scaled.size(); ++j) CHECK(std::abs(c[j] - poly(scaled[j])) < 1e-6);

  // the uniform chirp path agrees with the direct sum
  const ComplexArray<double> chirp =
      fourier_at_uniform(inverse_fourier(p), g.frequency(0) / 3, 5 * g.frequency_spacing() / 3,
                         static_cast<Index>(scaled.size()));
  CHECK(max_abs_diff(chirp, c) < 1e-11);

  const std::vector<double> bad{g.band_limit()};
  CHECK_THROWS_AS(sample_offgrid(s, std::span<const double>(bad)), std::out_of_range);
}

TEST_CASE("norms") {
  const Grid g(1024, 40.0);
  const auto n = norms(gaussian(g));
  CHECK(n.l2 == doctest::Approx(std::pow(pi, 0.25)).epsilon(1e-12));
  CHECK(n.linf == doctest::Approx(1.0));
  // ||e^{-x^2/2}||_{H^1}^2 = int (1 + xi^2) e^{-xi^2} = sqrt(pi) * 3/2
  CHECK(n.h1 == doctest::Approx(std::sqrt(1.5 * std::sqrt(pi))).epsilon(1e-12));
  // H^2: int (1+xi^2)^2 e^{-xi^2} = sqrt(pi) (1 + 1 + 3/4)
  CHECK(n.h2 == doctest::Approx(std::sqrt(2.75 * std::sqrt(pi))).epsilon(1e-12));

  const auto z = norms(Field(g));
  CHECK(z.l2 == 0.0);
  CHECK(z.linf == 0.0);
  CHECK(z.h1 == 0.0);
  CHECK(z.h2 == 0.0);
  CHECK(z.weighted_h11 == 0.0);

  const std::complex<double> a(0.3, -1.2);
  const double k0 = 9 * g.frequency_spacing();
  const Field mode = sample_field(g, [&](double x) { return a * std::polar(1.0, k0 * x); });
  CHECK(norms(mode).linf == doctest::Approx(std::abs(a)).epsilon(1e-14));
  CHECK(norms(mode).l2 == doctest::Approx(std::abs(a) * std::sqrt(80.0)).epsilon(1e-13));

  const Field f = random_packets(g, 11);
  const auto base = norms(f);
  const std::complex<double> c(-2.5, 1.5);
  const auto scaled = norms(c * f);
  const double ac = std::abs(c);
  CHECK(scaled.l2 == doctest::Approx(ac * base.l2).epsilon(1e-13));
  CHECK(scaled.linf == doctest::Approx(ac * base.linf).epsilon(1e-13));
  CHECK(scaled.h1 == doctest::Approx(ac * base.h1).epsilon(1e-13));
  CHECK(scaled.h2 == doctest::Approx(ac * base.h2).epsilon(1e-13));
  CHECK(scaled.weighted_h11 == doctest::Approx(ac * base.weighted_h11).epsilon(1e-13));
}

TEST_CASE("single precision instantiation") {
  const SpatialGrid<float> g(256, 20.0f);
  const auto f = sample_field(g, [](float x) { return std::exp(-x * x / 2); });
  const auto s = continuum_fourier(f);
  const auto expect = sample_spectrum(g, [](float xi) { return std::exp(-xi * xi / 2); });
  CHECK((s.values() - expect.values()).abs().maxCoeff() < 1e-5f);
  CHECK(l2_norm(inverse_fourier(s) - f) < 1e-5f);
}
