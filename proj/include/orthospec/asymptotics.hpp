#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orthospec/preprocessing.hpp"
#include "orthospec/quadrature.hpp"

namespace orthospec {

/// psi_1, psi_2, psi_3 at one mu. With s ~ Exp(1) and g = G:
/// psi1 = E[s g]/E[g], psi2 = E[g^2]/E[g]^2, psi3 = sqrt(E[s g^2])/E[g].
/// On the extended branch E[g] < 0, so psi3 is negative there; only psi3^2
/// enters the formulas.
struct PsiTriple {
  double psi1 = 0.0;
  double psi2 = 0.0;
  double psi3 = 0.0;
  double mu = 0.0;
  double delta = 0.0;
  double mean_g = 0.0;   // E[g]
  double mean_sg = 0.0;  // E[s g]
};

PsiTriple psi(const ProcessingFunction& f, double mu, const QuadratureSpec& q = {});

/// Same, parameterized by u = 1/mu. Needs u >= 1 or u < t_min.
PsiTriple psi_at_inverse(const ProcessingFunction& f, double inv_mu, const QuadratureSpec& q = {});

/// Lambda(mu) = 1/mu - ((delta-1)/delta) / E[g].
double lambda_of_mu(const ProcessingFunction& f, double mu, const QuadratureSpec& q = {});
double lambda_at_inverse(const ProcessingFunction& f, double inv_mu, const QuadratureSpec& q = {});

/// F(mu) = 1/mu - 1/E[s g].
double f_of_mu(const ProcessingFunction& f, double mu, const QuadratureSpec& q = {});

/// delta/(delta-1).
inline double fixed_point_level(double delta) { return delta / (delta - 1.0); }

/// Root of psi2 = delta/(delta-1) on (0,1) when psi2(1) exceeds it, else 1.
double mu_bar(const ProcessingFunction& f, const QuadratureSpec& q = {});

/// Root of psi1 = delta/(delta-1) on (1e-8, mu_bar], if psi1(mu_bar) reaches it.
/// psi1(mu_bar) within kBoundaryTol of the level counts as reaching it and
/// returns mu_bar itself.
std::optional<double> mu_hat(const ProcessingFunction& f, const QuadratureSpec& q = {});

/// Root of psi1 = delta/(delta-1) with 1/mu < t_min (the minimum-eigenvalue
/// branch). Returns mu; absent when T is unbounded below, no root exists, or
/// psi2 >= delta/(delta-1) at the root.
std::optional<double> mu_hat_min_branch(const ProcessingFunction& f, const QuadratureSpec& q = {});

inline constexpr double kBoundaryTol = 1e-9;

struct AsymptoticPrediction {
  double delta = 0.0;
  double mu_bar = 1.0;
  std::optional<double> mu_hat;
  double rho_sq = 0.0;
  double theta_sq = 0.0;
  double lambda_at_mu_hat = 0.0;  // NaN when mu_hat is absent
  bool positive_phase = false;
  bool boundary = false;  // psi1(mu_bar) within kBoundaryTol of the level
  std::optional<PsiTriple> at_mu_hat;
  std::string note;
};

/// Full prediction for a function bound to its delta.
AsymptoticPrediction rho_sq(const ProcessingFunction& f, const QuadratureSpec& q = {});

/// Same, for a spec at a given delta. Specs that are not defined at this
/// delta (alt_weak below 2) predict no correlation.
AsymptoticPrediction predict(const ProcessingSpec& spec, double delta, const QuadratureSpec& q = {});

struct ThresholdResult {
  double delta = 0.0;
  bool found = false;
  // Delta-free kinds: crossing of psi1 and psi2 and the threshold it implies.
  std::optional<double> mu_diamond;
  std::optional<double> delta_from_crossing;
};

/// Smallest delta with positive_phase, by bisection on (1, delta_max] to
/// 1e-6. For delta-free kinds the crossing formula must agree within 1e-3.
ThresholdResult delta_threshold(const ProcessingSpec& spec, double delta_max,
                                const QuadratureSpec& q = {});

/// Crossing of psi1 and psi2 in (0, 1] when psi1 > psi2 just above 0; 1 when
/// psi1 stays above psi2 on all of (0, 1).
std::optional<double> mu_diamond(const ProcessingFunction& f, const QuadratureSpec& q = {});

/// (delta, rho_sq) for Star over a grid.
std::vector<std::pair<double, double>> rho_star_curve(std::span<const double> delta_grid,
                                                     const QuadratureSpec& q = {});

/// (1 - mu_hat) / (1 - mu_hat/delta).
inline double rho_star_closed_form(double mu_hat, double delta) {
  return (1.0 - mu_hat) / (1.0 - mu_hat / delta);
}

}  // namespace orthospec
