#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "orthospec/core.hpp"

namespace orthospec {

enum class ProcessingKind {
  kTrim,
  kSubset,
  kMM,
  kStar,
  kStarRegularized,
  kAltWeak,
  kShiftedMM,
  kCustom,
};

std::string to_string(ProcessingKind kind);
ProcessingKind parse_processing_kind(std::string_view text);

/// What a config file says about T. Every kind is written in s = delta*y^2.
struct ProcessingSpec {
  ProcessingKind kind = ProcessingKind::kStar;
  double c1 = 2.0;      // subset threshold on s
  double c2 = 1.5;      // trim threshold; s is kept while s < c2^2
  double kappa = 0.01;  // regularizer of StarRegularized
  // Custom: (s, T) knots, s strictly increasing, linear in between and
  // constant beyond the ends.
  std::vector<std::pair<double, double>> table;
};

/// Affine map applied to the raw function: T_hat = (C + T) / (C + T_max).
struct Normalization {
  double offset = 0.0;     // C
  double raw_sup = 1.0;    // T_max of the raw function
};

/// A processing function bound to one oversampling ratio.
///
/// Values are the normalized T_hat, so sup T_hat = 1. Exact Star is clamped at
/// s >= kStarFloor (T >= 1 - 1e12); simulations should use StarRegularized.
class ProcessingFunction {
 public:
  static constexpr double kStarFloor = 1e-12;

  ProcessingFunction(ProcessingSpec spec, double delta);

  const ProcessingSpec& spec() const { return spec_; }
  ProcessingKind kind() const { return spec_.kind; }
  double delta() const { return delta_; }
  const Normalization& normalization() const { return norm_; }
  std::string name() const;

  /// Same function at another delta (delta-free kinds are unchanged).
  ProcessingFunction at_delta(double delta) const { return {spec_, delta}; }

  /// Raw and normalized T in the variable s = delta*y^2.
  double raw_of_s(double s) const;
  double of_s(double s) const { return (norm_.offset + raw_of_s(s)) / (norm_.offset + norm_.raw_sup); }

  /// T(y), the normalized value.
  double eval_T(double y) const;

  /// G(y, mu) = 1/(1/mu - T(y)).
  double eval_G(double y, double mu) const;

  /// 1/(u - T_hat(s)) with u = 1/mu; throws SingularityError when
  /// |u - T_hat| <= 1e-14.
  double g_of_s(double s, double inv_mu) const;

  double t_min() const { return t_min_; }
  double t_max() const { return 1.0; }
  bool bounded_below() const { return bounded_below_; }

  /// True when T depends on y only through delta*y^2.
  bool delta_free() const;

  /// Points in s where T jumps or has a kink; quadrature splits there.
  std::vector<double> breakpoints() const;

  /// True when sup T is reached at a finite s, so G blows up at mu = 1.
  bool sup_attained() const;

  /// True when T = sup T on a set of positive probability (subset), so the
  /// psi functions have finite limits at mu = 1.
  bool sup_plateau() const;

 private:
  ProcessingSpec spec_;
  double delta_;
  Normalization norm_;
  double t_min_ = 0.0;
  bool bounded_below_ = true;
};

/// Affine normalization of a raw (sup, inf) pair; exposed for tests.
Normalization normalization_for(double raw_sup);

/// Default power-method shift for a kind.
double default_shift(ProcessingKind kind);

/// Grid scan of the normalized function over s in [0, s_max]: (min, max).
std::pair<double, double> scan_range(const ProcessingFunction& f, double s_max = 1e4,
                                     std::size_t points = 20000);

}  // namespace orthospec
