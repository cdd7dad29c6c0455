#pragma once

#include "dnls/operators.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dnls {

// One factor d_x^derivative of component `slot` of (u_1..u_N, conj u_1..conj u_N).
struct FactorRef {
  int slot = 0;        // 0-based; slot >= N means the conjugate of component slot - N
  int derivative = 0;  // 0 or 1
};

// coeff * prod_i d_x^{l_i} (u or conj u)_{k_i}, contributing to F_target
struct CubicTerm {
  int target = 0;
  std::array<FactorRef, 3> factors{};
  std::complex<double> coeff{1, 0};
};

enum class SystemKind { nls2, nls3, single_cubic, custom };

// Data regularity the well-posedness theory asks for.
enum class RegularityTier { h2_h11, h3_h21 };

std::string to_string(SystemKind kind);
std::string to_string(RegularityTier tier);

class SystemSpec {
 public:
  SystemSpec(std::vector<Mass> masses, std::vector<CubicTerm> terms, SystemKind kind = SystemKind::custom);

  int components() const { return static_cast<int>(masses_.size()); }
  const std::vector<Mass>& masses() const { return masses_; }
  const Mass& mass(int component) const { return masses_.at(component); }
  const std::vector<CubicTerm>& terms() const { return terms_; }
  SystemKind kind() const { return kind_; }
  RegularityTier regularity() const {
    return kind_ == SystemKind::custom ? RegularityTier::h3_h21 : RegularityTier::h2_h11;
  }

  // m_k for plain slots, -m_{k-N} for conjugated ones
  Mass signed_mass(int slot) const;
  int component_of(int slot) const { return slot % components(); }
  bool conjugated(int slot) const { return slot >= components(); }

 private:
  std::vector<Mass> masses_;
  std::vector<CubicTerm> terms_;
  SystemKind kind_;
};

// L_m u = kappa d_x(v^3), L_mu v = lambda d_x(u^3)
SystemSpec build_nls3(const Mass& m, const Mass& mu, std::complex<double> kappa, std::complex<double> lambda);
// L_m u = kappa conj(u)^2 d_x v, L_mu v = lambda u^2 d_x u
SystemSpec build_nls2(const Mass& m, const Mass& mu, std::complex<double> kappa, std::complex<double> lambda);
// i u_t + u_xx / 2 = |u|^2 u
SystemSpec build_single_cubic();

struct TermResonance {
  int term = 0;
  double mass_sum = 0;
  std::optional<Rational> exact_mass_sum;  // set when every mass involved is rational
  bool resonant_zero = false;
  bool resonant_self = false;
  bool derivative_free = false;
  std::optional<double> omega;  // (m_j^2/2)(1/m_j - 1/mass_sum), undefined for a zero sum
  std::optional<Rational> exact_omega;
  bool excluded() const { return derivative_free || resonant_zero || resonant_self; }
};

struct ResonanceReport {
  std::vector<TermResonance> terms;
  bool covered = false;  // no term is derivative-free or mass-resonant
  RegularityTier regularity = RegularityTier::h2_h11;
};

inline constexpr double resonance_tolerance = 1e-12;

ResonanceReport classify(const SystemSpec& spec);

// time plus one field per component, all on one grid
struct SolutionState {
  double time = 0;
  std::vector<Field> fields;

  const Grid& grid() const { return fields.at(0).grid(); }
  void validate(int components) const;
};

// Evaluates F_j for every component with 2N zero padding. Padded factor
// values are shared across terms; each target needs one forward transform.
class NonlinearityEvaluator {
 public:
  NonlinearityEvaluator(const SystemSpec& spec, const Grid& grid);

  // Inputs and outputs are FFT-ordered series coefficients (FFT / N).
  void evaluate_series(const std::vector<ComplexArray<double>>& coeffs, std::vector<ComplexArray<double>>& out);
  std::vector<Field> evaluate(const std::vector<Field>& fields);

  const SystemSpec& spec() const { return spec_; }
  const Grid& grid() const { return grid_; }

 private:
  SystemSpec spec_;
  Grid grid_;
  std::vector<std::array<bool, 2>> needed_;  // [component][derivative]
  std::vector<std::array<ComplexArray<double>, 2>> padded_;
  ComplexArray<double> scratch_, accumulator_;
  std::vector<double> derivative_symbol_;
};

std::vector<Field> evaluate_nonlinearity(const SystemSpec& spec, const SolutionState& state);

// Line format: "masses: m1 ... mN", then "term j | k1 l1 k2 l2 k3 l3 | re im"
// with 1-based j and k (k > N conjugated). '#' starts a comment.
SystemSpec parse_system_spec(std::istream& in, const std::string& source_name = "<spec>");
SystemSpec load_system_spec(const std::string& path);
std::string format_system_spec(const SystemSpec& spec);

}  // namespace dnls
