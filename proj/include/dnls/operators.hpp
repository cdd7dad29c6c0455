#pragma once

#include "dnls/rational.hpp"
#include "dnls/spectral.hpp"

#include <Eigen/Dense>

#include <optional>
#include <random>

namespace dnls {

// Nonzero real mass m of L_m = i d_t + (1/2m) d_x^2, optionally with an exact
// rational value for resonance arithmetic.
class Mass {
 public:
  explicit Mass(double value) : value_(value) {
    if (value == 0 || !std::isfinite(value)) throw std::invalid_argument("mass must be finite and nonzero");
  }
  explicit Mass(const Rational& exact) : Mass(exact.to_double()) { exact_ = exact; }

  // "p/q", integer or decimal text is kept exact; anything strtod accepts otherwise
  static Mass parse(const std::string& text) {
    if (auto r = Rational::parse(text)) return Mass(*r);
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("cannot parse mass '" + text + "'");
    return Mass(v);
  }

  double value() const { return value_; }
  int sign() const { return value_ > 0 ? 1 : -1; }
  const std::optional<Rational>& exact() const { return exact_; }
  Mass negated() const {
    Mass out(-value_);
    if (exact_) out.exact_ = -*exact_;
    return out;
  }

 private:
  double value_;
  std::optional<Rational> exact_;
};

// Content the band-limited resampling inside F_m, F_m^{-1} and D(t) may drop,
// as a fraction of the input's squared L2 norm.
inline constexpr double default_resampling_loss = 1e-4;

namespace detail {

template <typename Real>
Real mass_fraction_outside(const RealArray<Real>& coords, const ComplexArray<Real>& values, Real radius) {
  const Real total = values.abs2().sum();
  if (total == 0) return 0;
  return (coords.abs() >= radius).select(values.abs2(), Real(0)).sum() / total;
}

inline void check_resampling_loss(double lost, double allowed, const char* where) {
  if (lost > allowed)
    throw std::domain_error(std::string(where) + ": resampling would discard " + std::to_string(lost) +
                            " of the squared L2 norm (allowed " + std::to_string(allowed) +
                            "); enlarge the box or refine the grid");
}

template <typename Real>
std::complex<Real> eighth_turn(int sign) {
  const Real h = std::sqrt(Real(0.5));
  return {h, static_cast<Real>(sign) * h};
}

}  // namespace detail

// U_m(t) = exp(i t/(2m) d_x^2); negative t gives U_m(t)^{-1}.
template <typename Real>
BasicField<Real> free_evolve(const BasicField<Real>& f, const Mass& m, Real t) {
  require_finite(f, "free_evolve");
  if (t == 0) return f;
  const long double rate = static_cast<long double>(t) / (2.0L * m.value());
  return apply_fourier_multiplier(f, [rate](Real xi) {
    const long double x = xi;
    return detail::unit_phase<Real>(-rate * x * x);
  });
}

// F_m f(xi) = |m|^{1/2} exp(-i pi/4 sgn m) fhat(m xi)
template <typename Real>
BasicSpectrum<Real> scaled_fourier(const BasicField<Real>& f, const Mass& m,
                                   double max_lost_fraction = default_resampling_loss) {
  require_finite(f, "scaled_fourier");
  const auto& g = f.grid();
  const Real mv = static_cast<Real>(m.value());
  const std::complex<Real> factor = std::sqrt(std::abs(mv)) * detail::eighth_turn<Real>(-m.sign());
  if (mv == Real(1)) return continuum_fourier(f) * factor;
  if (mv == Real(-1)) {
    const BasicSpectrum<Real> s = continuum_fourier(f);
    ComplexArray<Real> r(g.size());
    r[0] = s[0];
    for (Index i = 1; i < g.size(); ++i) r[i] = s[g.size() - i];
    return BasicSpectrum<Real>(g, r * factor);
  }
  if (std::abs(mv) > 1) {
    // fhat(m xi) on the grid spacing only resolves f on |x| < L/|m|
    detail::check_resampling_loss(detail::mass_fraction_outside(g.positions(), f.values(), g.half_length() / std::abs(mv)),
                                  max_lost_fraction, "scaled_fourier");
  } else {
    const BasicSpectrum<Real> s = continuum_fourier(f);
    detail::check_resampling_loss(
        detail::mass_fraction_outside(g.frequencies(), s.values(), std::abs(mv) * g.band_limit()), max_lost_fraction,
        "scaled_fourier");
  }
  ComplexArray<Real> v = fourier_at_uniform(f, mv * g.frequency(0), mv * g.frequency_spacing(), g.size());
  return BasicSpectrum<Real>(g, v * factor);
}

// F_m^{-1} s(x) = |m|^{1/2} exp(+i pi/4 sgn m) s_check(m x)
template <typename Real>
BasicField<Real> inverse_scaled_fourier(const BasicSpectrum<Real>& s, const Mass& m,
                                        double max_lost_fraction = default_resampling_loss) {
  require_finite(s, "inverse_scaled_fourier");
  const auto& g = s.grid();
  const Real mv = static_cast<Real>(m.value());
  const std::complex<Real> factor = std::sqrt(std::abs(mv)) * detail::eighth_turn<Real>(m.sign());
  if (mv == Real(1)) return inverse_fourier(s) * factor;
  if (mv == Real(-1)) {
    const BasicField<Real> f = inverse_fourier(s);
    ComplexArray<Real> r(g.size());
    r[0] = f[0];
    for (Index n = 1; n < g.size(); ++n) r[n] = f[g.size() - n];
    return BasicField<Real>(g, r * factor);
  }
  if (std::abs(mv) > 1) {
    detail::check_resampling_loss(
        detail::mass_fraction_outside(g.frequencies(), s.values(), g.band_limit() / std::abs(mv)), max_lost_fraction,
        "inverse_scaled_fourier");
  } else {
    const BasicField<Real> f = inverse_fourier(s);
    detail::check_resampling_loss(
        detail::mass_fraction_outside(g.positions(), f.values(), std::abs(mv) * g.half_length()), max_lost_fraction,
        "inverse_scaled_fourier");
  }
  ComplexArray<Real> v = field_at_uniform(s, mv * g.position(0), mv * g.spacing(), g.size());
  return BasicField<Real>(g, v * factor);
}

// M_m(t) f = exp(i m x^2 / 2t) f
template <typename Real>
BasicField<Real> gauge_M(const BasicField<Real>& f, const Mass& m, Real t) {
  if (!(t > 0)) throw std::invalid_argument("gauge_M: t must be positive");
  require_finite(f, "gauge_M");
  const auto& g = f.grid();
  const long double rate = m.value() / (2.0L * static_cast<long double>(t));
  ComplexArray<Real> v = f.values();
  for (Index n = 0; n < g.size(); ++n) {
    const long double x = g.position(n);
    v[n] *= detail::unit_phase<Real>(rate * x * x);
  }
  return BasicField<Real>(g, std::move(v));
}

// D(t) f(x) = t^{-1/2} f(x/t), resampled onto the same grid
template <typename Real>
BasicField<Real> dilate_D(const BasicField<Real>& f, Real t, double max_lost_fraction = default_resampling_loss) {
  if (!(t > 0)) throw std::invalid_argument("dilate_D: t must be positive");
  require_finite(f, "dilate_D");
  const auto& g = f.grid();
  const BasicSpectrum<Real> s = continuum_fourier(f);
  if (t > 1)
    detail::check_resampling_loss(detail::mass_fraction_outside(g.positions(), f.values(), g.half_length() / t),
                                  max_lost_fraction, "dilate_D");
  else
    detail::check_resampling_loss(detail::mass_fraction_outside(g.frequencies(), s.values(), t * g.band_limit()),
                                  max_lost_fraction, "dilate_D");
  ComplexArray<Real> v = field_at_uniform(s, g.position(0) / t, g.spacing() / t, g.size());
  return BasicField<Real>(g, v / std::sqrt(t));
}

// D(t) applied to a function of the frequency variable: x -> t^{-1/2} s(x/t).
template <typename Real>
BasicField<Real> dilate_D(const BasicSpectrum<Real>& s, Real t, double max_lost_fraction = default_resampling_loss) {
  if (!(t > 0)) throw std::invalid_argument("dilate_D: t must be positive");
  require_finite(s, "dilate_D");
  const auto& g = s.grid();
  // s read as samples of a function of xi; its band-limited interpolant is the
  // transform of the field g below
  const BasicField<Real> f = inverse_fourier(s);
  const Real reach = g.half_length() / t;  // |x/t| covered by the output grid
  if (reach < g.band_limit())
    detail::check_resampling_loss(detail::mass_fraction_outside(g.frequencies(), s.values(), reach), max_lost_fraction,
                                  "dilate_D");
  ComplexArray<Real> v = fourier_at_uniform(f, g.position(0) / t, g.spacing() / t, g.size());
  return BasicField<Real>(g, v / std::sqrt(t));
}

// W_m(t) = F_m M_m(t) F_m^{-1}. The scalings cancel, leaving
// W_m(t) s = FT[exp(i y^2/(2 m t)) IFT[s]] on one grid (inverse flips the sign).
template <typename Real>
BasicSpectrum<Real> lens_W(const BasicSpectrum<Real>& s, const Mass& m, Real t, bool inverse = false) {
  if (!(t > 0)) throw std::invalid_argument("lens_W: t must be positive");
  require_finite(s, "lens_W");
  BasicField<Real> f = inverse_fourier(s);
  const auto& g = s.grid();
  const long double rate = (inverse ? -1.0L : 1.0L) / (2.0L * m.value() * static_cast<long double>(t));
  for (Index n = 0; n < g.size(); ++n) {
    const long double y = g.position(n);
    f[n] *= detail::unit_phase<Real>(rate * y * y);
  }
  return continuum_fourier(f);
}

// J_m = x + (i t/m) d_x
template <typename Real>
BasicField<Real> apply_J(const BasicField<Real>& f, const Mass& m, Real t) {
  require_finite(f, "apply_J");
  BasicField<Real> out(f.grid(), f.values() * f.grid().positions());
  if (t != 0) out += spatial_derivative(f, 1) * std::complex<Real>(0, t / static_cast<Real>(m.value()));
  return out;
}

// P f = J_m d_x f - 2 i t L_m f, with L_m f supplied by the caller
template <typename Real>
BasicField<Real> apply_P(const BasicField<Real>& f, const Mass& m, Real t, const BasicField<Real>& Lf) {
  BasicField<Real> out = apply_J(spatial_derivative(f, 1), m, t);
  out -= Lf * std::complex<Real>(0, 2 * t);
  return out;
}

// Multiplier -i sgn(xi), sgn(0) = 0. The Nyquist mode counts as negative so
// that H^2 = -1 on every nonzero mode.
template <typename Real>
BasicField<Real> hilbert_transform(const BasicField<Real>& f) {
  require_finite(f, "hilbert_transform");
  return apply_fourier_multiplier(f, [](Real xi) {
    return xi > 0 ? std::complex<Real>(0, -1) : xi < 0 ? std::complex<Real>(0, 1) : std::complex<Real>(0);
  });
}

// Phi = eta |w|^2 sampled on a grid.
template <typename Real>
class WeightFunction {
 public:
  WeightFunction(const SpatialGrid<Real>& grid, RealArray<Real> samples, Real eta = 1)
      : grid_(grid), samples_(std::move(samples)), eta_(eta) {
    if (samples_.size() != grid_.size()) throw std::invalid_argument("weight sample count does not match grid");
    if (!samples_.isFinite().all()) throw std::domain_error("weight samples must be finite");
    if ((samples_ < 0).any()) throw std::domain_error("weight samples must be nonnegative");
    if (!(eta_ >= 1)) throw std::invalid_argument("weight eta must be >= 1");
  }

  static WeightFunction from_profile(const BasicField<Real>& w, Real eta) {
    return WeightFunction(w.grid(), eta * w.values().abs2(), eta);
  }

  const SpatialGrid<Real>& grid() const { return grid_; }
  const RealArray<Real>& samples() const { return samples_; }
  Real eta() const { return eta_; }
  Real l1_norm() const { return samples_.sum() * grid_.spacing(); }

  // trapezoidal int_{-L}^{x_n} Phi
  RealArray<Real> cumulative() const {
    RealArray<Real> out(samples_.size());
    const Real h = grid_.spacing() / 2;
    out[0] = 0;
    for (Index n = 1; n < samples_.size(); ++n) out[n] = out[n - 1] + h * (samples_[n - 1] + samples_[n]);
    return out;
  }

 private:
  SpatialGrid<Real> grid_;
  RealArray<Real> samples_;
  Real eta_;
};

// S f = cosh(I) f - i sgn(m) sinh(I) H f with I = int_{-L}^x Phi.
template <typename Real>
class SmoothingOperator {
 public:
  SmoothingOperator(const WeightFunction<Real>& weight, const Mass& m)
      : grid_(weight.grid()), sign_(static_cast<Real>(m.sign())) {
    const RealArray<Real> I = weight.cumulative();
    cosh_ = I.cosh();
    sinh_ = I.sinh();
    growth_ = I.exp();
  }

  BasicField<Real> apply(const BasicField<Real>& f) const {
    check(f);
    const BasicField<Real> h = hilbert_transform(f);
    return BasicField<Real>(grid_, cosh_ * f.values() - std::complex<Real>(0, sign_) * (sinh_ * h.values()));
  }

  // S* f = cosh(I) f - i sgn(m) H (sinh(I) f)
  BasicField<Real> apply_adjoint(const BasicField<Real>& f) const {
    check(f);
    const BasicField<Real> h = hilbert_transform(BasicField<Real>(grid_, sinh_ * f.values()));
    return BasicField<Real>(grid_, cosh_ * f.values() - std::complex<Real>(0, sign_) * h.values());
  }

  struct SolveReport {
    int iterations = 0;
    Real relative_residual = 0;
  };

  // S^{-1} f by right-preconditioned restarted GMRES.
  BasicField<Real> apply_inverse(const BasicField<Real>& f, Real tolerance = Real(1e-13), int max_iterations = 2000,
                                 SolveReport* report = nullptr) const {
    check(f);
    using Vec = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
    const Index n = grid_.size();
    const int restart = 60;
    const Real bnorm = f.values().matrix().norm();
    BasicField<Real> x(grid_);
    SolveReport rep;
    if (bnorm == 0) {
      if (report) *report = rep;
      return x;
    }
    auto op = [&](const Vec& v) {
      const BasicField<Real> z = precondition(BasicField<Real>(grid_, v.array()));
      return Vec(apply(z).values().matrix());
    };
    Vec y_total = Vec::Zero(n);  // solution of S T y = f
    while (rep.iterations < max_iterations) {
      const Vec r = f.values().matrix() - op(y_total);
      const Real beta = r.norm();
      rep.relative_residual = beta / bnorm;
      if (rep.relative_residual <= tolerance) break;
      std::vector<Vec> basis{r / beta};
      Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic> hess =
          Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>::Zero(restart + 1, restart);
      std::vector<std::complex<Real>> cs, sn;
      Vec g = Vec::Zero(restart + 1);
      g[0] = beta;
      int k = 0;
      for (; k < restart && rep.iterations < max_iterations; ++k, ++rep.iterations) {
        Vec w = op(basis[k]);
        for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
          hess(i, k) = basis[i].dot(w);
          w -= hess(i, k) * basis[i];
        }
        hess(k + 1, k) = w.norm();
        if (std::abs(hess(k + 1, k)) > 0) basis.push_back(w / hess(k + 1, k).real());
        for (int i = 0; i < k; ++i) {
          const std::complex<Real> a = hess(i, k), b = hess(i + 1, k);
          hess(i, k) = std::conj(cs[i]) * a + std::conj(sn[i]) * b;
          hess(i + 1, k) = -sn[i] * a + cs[i] * b;
        }
        const std::complex<Real> a = hess(k, k), b = hess(k + 1, k);
        const Real rho = std::sqrt(std::norm(a) + std::norm(b));
        cs.push_back(rho == 0 ? std::complex<Real>(1) : a / rho);
        sn.push_back(rho == 0 ? std::complex<Real>(0) : b / rho);
        hess(k, k) = rho;
        hess(k + 1, k) = 0;
        g[k + 1] = -sn[k] * g[k];
        g[k] = std::conj(cs[k]) * g[k];
        rep.relative_residual = std::abs(g[k + 1]) / bnorm;
        if (rep.relative_residual <= tolerance || static_cast<int>(basis.size()) <= k + 1) {
          ++k;
          ++rep.iterations;
          break;
        }
      }
      const Vec c = hess.topLeftCorner(k, k).template triangularView<Eigen::Upper>().solve(g.head(k));
      for (int i = 0; i < k; ++i) y_total += c[i] * basis[i];
    }
    x = precondition(BasicField<Real>(grid_, y_total.array()));
    rep.relative_residual = (apply(x).values() - f.values()).matrix().norm() / bnorm;
    if (report) *report = rep;
    if (!(rep.relative_residual <= std::max(tolerance * 100, Real(1e-11))))
      throw std::runtime_error("smoothing operator inverse did not converge (relative residual " +
                               std::to_string(static_cast<double>(rep.relative_residual)) + ")");
    return x;
  }

  // Power iteration on S*S from a seeded random start.
  Real operator_norm_estimate(int iterations = 200, unsigned seed = 1) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<Real> gauss;
    ComplexArray<Real> v(grid_.size());
    for (Index i = 0; i < v.size(); ++i) v[i] = {gauss(rng), gauss(rng)};
    BasicField<Real> f(grid_, v / v.matrix().norm());
    Real estimate = 0;
    for (int it = 0; it < iterations; ++it) {
      BasicField<Real> next = apply_adjoint(apply(f));
      const Real nrm = next.values().matrix().norm();
      if (nrm == 0) return 0;
      estimate = std::sqrt(nrm);
      f = next * std::complex<Real>(1 / nrm);
    }
    return estimate;
  }

 private:
  void check(const BasicField<Real>& f) const {
    if (!(f.grid() == grid_)) throw std::invalid_argument("smoothing operator applied on a different grid");
    require_finite(f, "smoothing operator");
  }

  // T = e^{sI} P_+ + e^{-sI} P_- + P_0 / cosh(I), s = sgn(m): inverts S up to commutators
  BasicField<Real> precondition(const BasicField<Real>& f) const {
    ComplexArray<Real> c = detail::series_coefficients(f);
    ComplexArray<Real> plus = ComplexArray<Real>::Zero(c.size()), minus = plus, zero = plus;
    for (Index k = 0; k < c.size(); ++k) {
      const Index w = grid_.wavenumber(k);
      (w > 0 ? plus : w < 0 ? minus : zero)[k] = c[k];
    }
    const ComplexArray<Real> up = detail::fft_backward<Real>(plus), down = detail::fft_backward<Real>(minus),
                             flat = detail::fft_backward<Real>(zero);
    const RealArray<Real> inv_growth = growth_.inverse();
    const RealArray<Real>& pos = sign_ > 0 ? growth_ : inv_growth;
    const RealArray<Real>& neg = sign_ > 0 ? inv_growth : growth_;
    return BasicField<Real>(grid_, pos * up + neg * down + flat / cosh_);
  }

  SpatialGrid<Real> grid_;
  Real sign_;
  RealArray<Real> cosh_, sinh_, growth_;
};

template <typename Real>
BasicField<Real> smoothing_S(const BasicField<Real>& f, const WeightFunction<Real>& w, const Mass& m,
                             bool inverse = false) {
  const SmoothingOperator<Real> op(w, m);
  return inverse ? op.apply_inverse(f) : op.apply(f);
}

namespace detail {

template <typename Real>
Real relative_difference(const BasicField<Real>& lhs, const BasicField<Real>& rhs) {
  const Real diff = l2_norm(lhs - rhs);
  const Real scale = l2_norm(lhs);
  return scale > 0 ? diff / scale : diff;
}

template <typename Real>
BasicField<Real> conj(const BasicField<Real>& f) {
  return BasicField<Real>(f.grid(), f.values().conjugate());
}

}  // namespace detail

// || J_m(f1 f2 f3) - sum_i (mu_i/m) (J_{mu_i} f_i) prod_{k != i} f_k || / ||lhs||
template <typename Real>
Real leibniz_residual(const BasicField<Real>& f1, const BasicField<Real>& f2, const BasicField<Real>& f3,
                      const Mass& mu1, const Mass& mu2, const Mass& mu3, const Mass& m, Real t) {
  const BasicField<Real> lhs = apply_J(dealias_pad_multiply(f1, f2, f3), m, t);
  const Real inv_m = static_cast<Real>(1 / m.value());
  BasicField<Real> rhs = dealias_pad_multiply(apply_J(f1, mu1, t), f2, f3) * std::complex<Real>(mu1.value() * inv_m);
  rhs += dealias_pad_multiply(f1, apply_J(f2, mu2, t), f3) * std::complex<Real>(mu2.value() * inv_m);
  rhs += dealias_pad_multiply(f1, f2, apply_J(f3, mu3, t)) * std::complex<Real>(mu3.value() * inv_m);
  return detail::relative_difference(lhs, rhs);
}

// f1 f2 d_x f3 = (mu3/M) d_x(f1 f2 f3) + R / (i t M), M = mu1 + mu2 + mu3, with
// R = mu2 mu3 f1 (f2 J3 f3 - (J2 f2) f3) + mu1 mu3 f2 (f1 J3 f3 - (J1 f1) f3).
template <typename Real>
Real divergence_identity_residual(const BasicField<Real>& f1, const BasicField<Real>& f2, const BasicField<Real>& f3,
                                  const Mass& mu1, const Mass& mu2, const Mass& mu3, Real t) {
  const double total = mu1.value() + mu2.value() + mu3.value();
  if (total == 0) throw std::domain_error("divergence identity undefined for zero mass sum");
  if (t == 0) throw std::invalid_argument("divergence identity requires t != 0");
  const BasicField<Real> lhs = dealias_pad_multiply(f1, f2, f3, {0, 0, 1});
  const BasicField<Real> j1 = apply_J(f1, mu1, t), j2 = apply_J(f2, mu2, t), j3 = apply_J(f3, mu3, t);
  const BasicField<Real> f1f2j3 = dealias_pad_multiply(f1, f2, j3);
  BasicField<Real> r = (f1f2j3 - dealias_pad_multiply(f1, j2, f3)) * std::complex<Real>(mu2.value() * mu3.value());
  r += (f1f2j3 - dealias_pad_multiply(j1, f2, f3)) * std::complex<Real>(mu1.value() * mu3.value());
  BasicField<Real> rhs = spatial_derivative(dealias_pad_multiply(f1, f2, f3), 1) *
                         std::complex<Real>(static_cast<Real>(mu3.value() / total));
  rhs += r / std::complex<Real>(0, t * static_cast<Real>(total));
  return detail::relative_difference(lhs, rhs);
}

// Two-component form: conj(u)^2 d_x v = (mu/(mu-2m)) d_x(conj(u)^2 v) + R / (i t (mu - 2m))
// with R = -2 m mu conj(u) (conj(u) J_mu v - conj(J_m u) v).
template <typename Real>
Real nls2_divergence_residual(const BasicField<Real>& u, const BasicField<Real>& v, const Mass& m, const Mass& mu,
                              Real t) {
  const double denom = mu.value() - 2 * m.value();
  if (denom == 0) throw std::domain_error("two-component divergence identity undefined for mu = 2m");
  if (t == 0) throw std::invalid_argument("divergence identity requires t != 0");
  const BasicField<Real> ub = detail::conj(u);
  const BasicField<Real> lhs = dealias_pad_multiply(ub, ub, v, {0, 0, 1});
  const BasicField<Real> r = (dealias_pad_multiply(ub, ub, apply_J(v, mu, t)) -
                              dealias_pad_multiply(ub, detail::conj(apply_J(u, m, t)), v)) *
                             std::complex<Real>(-2 * m.value() * mu.value());
  BasicField<Real> rhs =
      spatial_derivative(dealias_pad_multiply(ub, ub, v), 1) * std::complex<Real>(static_cast<Real>(mu.value() / denom));
  rhs += r / std::complex<Real>(0, t * static_cast<Real>(denom));
  return detail::relative_difference(lhs, rhs);
}

}  // namespace dnls
