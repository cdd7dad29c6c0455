#include "dnls/system.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dnls {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::nls2: return "nls2";
    case SystemKind::nls3: return "nls3";
    case SystemKind::single_cubic: return "single";
    case SystemKind::custom: return "custom";
  }
  return "custom";
}

std::string to_string(RegularityTier tier) {
  return tier == RegularityTier::h2_h11 ? "H2+H11" : "H3+H21";
}

SystemSpec::SystemSpec(std::vector<Mass> masses, std::vector<CubicTerm> terms, SystemKind kind)
    : masses_(std::move(masses)), terms_(std::move(terms)), kind_(kind) {
  if (masses_.empty()) throw std::invalid_argument("system needs at least one component");
  const int n = components();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& term = terms_[i];
    const std::string where = "term " + std::to_string(i + 1) + ": ";
    if (term.target < 0 || term.target >= n) throw std::invalid_argument(where + "target component out of range");
    for (const auto& f : term.factors) {
      if (f.slot < 0 || f.slot >= 2 * n) throw std::invalid_argument(where + "factor index out of range");
      if (f.derivative != 0 && f.derivative != 1) throw std::invalid_argument(where + "derivative order must be 0 or 1");
    }
    if (!std::isfinite(term.coeff.real()) || !std::isfinite(term.coeff.imag()))
      throw std::invalid_argument(where + "coefficient must be finite");
  }
}

Mass SystemSpec::signed_mass(int slot) const {
  if (slot < 0 || slot >= 2 * components()) throw std::out_of_range("slot out of range");
  const Mass& m = masses_[component_of(slot)];
  return conjugated(slot) ? m.negated() : m;
}

SystemSpec build_nls3(const Mass& m, const Mass& mu, std::complex<double> kappa, std::complex<double> lambda) {
  // d_x(w^3) = 3 w^2 d_x w
  std::vector<CubicTerm> terms{
      {0, {{{1, 0}, {1, 0}, {1, 1}}}, 3.0 * kappa},
      {1, {{{0, 0}, {0, 0}, {0, 1}}}, 3.0 * lambda},
  };
  return SystemSpec({m, mu}, std::move(terms), SystemKind::nls3);
}

SystemSpec build_nls2(const Mass& m, const Mass& mu, std::complex<double> kappa, std::complex<double> lambda) {
  std::vector<CubicTerm> terms{
      {0, {{{2, 0}, {2, 0}, {1, 1}}}, kappa},
      {1, {{{0, 0}, {0, 0}, {0, 1}}}, lambda},
  };
  return SystemSpec({m, mu}, std::move(terms), SystemKind::nls2);
}

SystemSpec build_single_cubic() {
  std::vector<CubicTerm> terms{{0, {{{1, 0}, {0, 0}, {0, 0}}}, 1.0}};
  return SystemSpec({Mass(Rational(1))}, std::move(terms), SystemKind::single_cubic);
}

ResonanceReport classify(const SystemSpec& spec) {
  ResonanceReport report;
  report.regularity = spec.regularity();
  report.covered = true;
  for (std::size_t i = 0; i < spec.terms().size(); ++i) {
    const CubicTerm& term = spec.terms()[i];
    TermResonance r;
    r.term = static_cast<int>(i);
    r.derivative_free = std::all_of(term.factors.begin(), term.factors.end(),
                                    [](const FactorRef& f) { return f.derivative == 0; });
    const Mass& target = spec.mass(term.target);
    std::array<Mass, 3> signed_masses{spec.signed_mass(term.factors[0].slot), spec.signed_mass(term.factors[1].slot),
                                      spec.signed_mass(term.factors[2].slot)};
    const bool exact = target.exact() && std::all_of(signed_masses.begin(), signed_masses.end(),
                                                     [](const Mass& m) { return m.exact().has_value(); });
    double scale = 0;
    for (const Mass& m : signed_masses) {
      r.mass_sum += m.value();
      scale = std::max(scale, std::abs(m.value()));
    }
    const double mj = target.value();
    if (exact) {
      const Rational sum = *signed_masses[0].exact() + *signed_masses[1].exact() + *signed_masses[2].exact();
      r.exact_mass_sum = sum;
      r.mass_sum = sum.to_double();
      r.resonant_zero = sum.is_zero();
      r.resonant_self = sum == *target.exact();
      if (!r.resonant_zero) {
        const Rational mjr = *target.exact();
        r.exact_omega = mjr * mjr / Rational(2) * (Rational(1) / mjr - Rational(1) / sum);
        r.omega = r.exact_omega->to_double();
      }
    } else {
      r.resonant_zero = std::abs(r.mass_sum) <= resonance_tolerance * scale;
      r.resonant_self = std::abs(r.mass_sum - mj) <= resonance_tolerance * std::max(scale, std::abs(mj));
      if (!r.resonant_zero) r.omega = r.resonant_self ? 0.0 : 0.5 * mj * mj * (1 / mj - 1 / r.mass_sum);
    }
    if (r.excluded()) report.covered = false;
    report.terms.push_back(r);
  }
  return report;
}

void SolutionState::validate(int components) const {
  if (static_cast<int>(fields.size()) != components)
    throw std::invalid_argument("state has " + std::to_string(fields.size()) + " fields, system has " +
                                std::to_string(components) + " components");
  for (const Field& f : fields) {
    if (!(f.grid() == fields[0].grid())) throw std::invalid_argument("state fields live on different grids");
    require_finite(f, "solution state");
  }
}

NonlinearityEvaluator::NonlinearityEvaluator(const SystemSpec& spec, const Grid& grid)
    : spec_(spec), grid_(grid), needed_(spec.components(), {false, false}), padded_(spec.components()) {
  for (const auto& term : spec_.terms())
    for (const auto& f : term.factors) needed_[spec_.component_of(f.slot)][f.derivative] = true;
  const Index n = grid_.size();
  derivative_symbol_.resize(n);
  for (Index k = 0; k < n; ++k) derivative_symbol_[k] = grid_.wavenumber(k) * grid_.frequency_spacing();
  derivative_symbol_[n / 2] = 0;
  scratch_.resize(2 * n);
  accumulator_.resize(2 * n);
}

void NonlinearityEvaluator::evaluate_series(const std::vector<ComplexArray<double>>& coeffs,
                                            std::vector<ComplexArray<double>>& out) {
  const int nc = spec_.components();
  const Index n = grid_.size(), h = n / 2;
  if (static_cast<int>(coeffs.size()) != nc) throw std::invalid_argument("coefficient count does not match system");
  auto& plans = detail::fft_plans<double>();
  for (int c = 0; c < nc; ++c) {
    if (coeffs[c].size() != n) throw std::invalid_argument("coefficient length does not match grid");
    for (int l = 0; l < 2; ++l) {
      if (!needed_[c][l]) continue;
      scratch_.setZero();
      for (Index k = 0; k < h; ++k) scratch_[k] = l ? std::complex<double>(0, derivative_symbol_[k]) * coeffs[c][k] : coeffs[c][k];
      for (Index k = h + 1; k < n; ++k)
        scratch_[k + n] = l ? std::complex<double>(0, derivative_symbol_[k]) * coeffs[c][k] : coeffs[c][k];
      padded_[c][l].resize(2 * n);
      plans.backward(scratch_.data(), padded_[c][l].data(), 2 * n);
    }
  }
  out.resize(nc);
  for (int j = 0; j < nc; ++j) {
    bool any = false;
    accumulator_.setZero();
    for (const auto& term : spec_.terms()) {
      if (term.target != j) continue;
      any = true;
      const auto& f0 = term.factors[0];
      const auto& f1 = term.factors[1];
      const auto& f2 = term.factors[2];
      const auto& a = padded_[spec_.component_of(f0.slot)][f0.derivative];
      const auto& b = padded_[spec_.component_of(f1.slot)][f1.derivative];
      const auto& c = padded_[spec_.component_of(f2.slot)][f2.derivative];
      const bool ca = spec_.conjugated(f0.slot), cb = spec_.conjugated(f1.slot), cc = spec_.conjugated(f2.slot);
      // conjugation commutes with padding because the Nyquist mode was dropped
      for (Index i = 0; i < 2 * n; ++i) {
        const std::complex<double> x = ca ? std::conj(a[i]) : a[i];
        const std::complex<double> y = cb ? std::conj(b[i]) : b[i];
        const std::complex<double> z = cc ? std::conj(c[i]) : c[i];
        accumulator_[i] += term.coeff * (x * y * z);
      }
    }
    out[j].setZero(n);
    if (!any) continue;
    plans.forward(accumulator_.data(), scratch_.data(), 2 * n);
    const double scale = 1.0 / static_cast<double>(2 * n);
    for (Index k = 0; k < h; ++k) out[j][k] = scratch_[k] * scale;
    for (Index k = h + 1; k < n; ++k) out[j][k] = scratch_[k + n] * scale;
  }
}

std::vector<Field> NonlinearityEvaluator::evaluate(const std::vector<Field>& fields) {
  std::vector<ComplexArray<double>> coeffs;
  for (const Field& f : fields) {
    if (!(f.grid() == grid_)) throw std::invalid_argument("field grid does not match evaluator grid");
    require_finite(f, "evaluate_nonlinearity");
    coeffs.push_back(detail::series_coefficients(f));
  }
  std::vector<ComplexArray<double>> out;
  evaluate_series(coeffs, out);
  std::vector<Field> result;
  for (const auto& c : out) result.push_back(detail::field_from_series(grid_, c));
  return result;
}

std::vector<Field> evaluate_nonlinearity(const SystemSpec& spec, const SolutionState& state) {
  state.validate(spec.components());
  NonlinearityEvaluator eval(spec, state.grid());
  return eval.evaluate(state.fields);
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void parse_error(const std::string& source, int line, const std::string& msg) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + msg);
}

std::string format_mass(const Mass& m) {
  if (m.exact()) return m.exact()->to_string();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", m.value());
  return buf;
}

}  // namespace

SystemSpec parse_system_spec(std::istream& in, const std::string& source_name) {
  std::vector<Mass> masses;
  struct PendingTerm {
    int line;
    int target;
    std::array<std::pair<int, int>, 3> factors;
    std::complex<double> coeff;
  };
  std::vector<PendingTerm> pending;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.rfind("masses:", 0) == 0) {
      if (!masses.empty()) parse_error(source_name, line_no, "duplicate masses line");
      std::istringstream ss(line.substr(7));
      std::string tok;
      while (ss >> tok) {
        try {
          masses.push_back(Mass::parse(tok));
        } catch (const std::exception& e) {
          parse_error(source_name, line_no, "bad mass '" + tok + "': " + e.what());
        }
      }
      if (masses.empty()) parse_error(source_name, line_no, "masses line lists no masses");
    } else if (line.rfind("term", 0) == 0) {
      std::vector<std::string> parts;
      std::stringstream ss(line.substr(4));
      std::string part;
      while (std::getline(ss, part, '|')) parts.push_back(trim(part));
      if (parts.size() != 3) parse_error(source_name, line_no, "expected 'term j | k1 l1 k2 l2 k3 l3 | re im'");
      PendingTerm t{line_no, 0, {}, {}};
      std::istringstream head(parts[0]), body(parts[1]), coeff(parts[2]);
      std::string extra;
      if (!(head >> t.target) || (head >> extra)) parse_error(source_name, line_no, "bad target index");
      for (auto& f : t.factors)
        if (!(body >> f.first >> f.second)) parse_error(source_name, line_no, "expected three (k, l) factor pairs");
      if (body >> extra) parse_error(source_name, line_no, "trailing text after factor pairs");
      double re = 0, im = 0;
      if (!(coeff >> re >> im) || (coeff >> extra)) parse_error(source_name, line_no, "expected coefficient 're im'");
      t.coeff = {re, im};
      pending.push_back(t);
    } else {
      parse_error(source_name, line_no, "unrecognized line '" + line + "'");
    }
  }
  if (masses.empty()) parse_error(source_name, line_no, "missing 'masses:' line");
  const int n = static_cast<int>(masses.size());
  std::vector<CubicTerm> terms;
  for (const auto& p : pending) {
    if (p.target < 1 || p.target > n)
      parse_error(source_name, p.line, "target " + std::to_string(p.target) + " outside 1.." + std::to_string(n));
    CubicTerm term;
    term.target = p.target - 1;
    for (int i = 0; i < 3; ++i) {
      const auto [k, l] = p.factors[i];
      if (k < 1 || k > 2 * n)
        parse_error(source_name, p.line, "factor index " + std::to_string(k) + " outside 1.." + std::to_string(2 * n));
      if (l != 0 && l != 1) parse_error(source_name, p.line, "derivative order must be 0 or 1");
      term.factors[i] = {k - 1, l};
    }
    term.coeff = p.coeff;
    terms.push_back(term);
  }
  return SystemSpec(std::move(masses), std::move(terms), SystemKind::custom);
}

SystemSpec load_system_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file '" + path + "'");
  return parse_system_spec(in, path);
}

std::string format_system_spec(const SystemSpec& spec) {
  std::ostringstream out;
  out << "masses:";
  for (const Mass& m : spec.masses()) out << ' ' << format_mass(m);
  out << '\n';
  char buf[96];
  for (const auto& t : spec.terms()) {
    out << "term " << t.target + 1 << " |";
    for (const auto& f : t.factors) out << ' ' << f.slot + 1 << ' ' << f.derivative;
    std::snprintf(buf, sizeof buf, " | %.17g %.17g\n", t.coeff.real(), t.coeff.imag());
    out << buf;
  }
  return out.str();
}

}  // namespace dnls
