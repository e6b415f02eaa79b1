#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "orthospec/core.hpp"
#include "orthospec/kernels.hpp"

namespace orthospec {

enum class QuadratureScheme {
  // Graded Gauss-Legendre panels on [0, cutoff] split at the breakpoints, with
  // a shifted Gauss-Laguerre tail.
  kComposite,
  // Plain node_count-point Gauss-Laguerre; no splitting.
  kLaguerre,
};

struct QuadratureSpec {
  QuadratureScheme scheme = QuadratureScheme::kComposite;
  std::size_t node_count = 400;  // Laguerre scheme
  std::size_t panel_order = 24;  // composite scheme
  double cutoff = 50.0;
  double abs_tol = 1e-10;
  // Nonzero: every moment evaluation is cross-checked against this many
  // Monte Carlo samples of s ~ Exp(1).
  std::size_t mc_samples = 0;
  std::uint64_t mc_seed = 7;

  friend bool operator==(const QuadratureSpec&, const QuadratureSpec&) = default;
};

/// Nodes and weights with sum_i w_i f(s_i) ~ E[f(s)], s ~ Exp(1).
struct ExpRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre on [-1, 1].
ExpRule gauss_legendre(std::size_t n);

/// n-point Gauss-Laguerre for weight e^{-s} on [0, inf) (Golub-Welsch).
ExpRule gauss_laguerre(std::size_t n);

/// Rule for E[f(s)] that splits at the given breakpoints (in s).
ExpRule exp_rule(const QuadratureSpec& spec, std::span<const double> breakpoints);

/// Quadrature moment sums of g; each field approximates an expectation.
kernels::MomentSums exp_moments(const ExpRule& rule, const std::function<double(double)>& g);

/// Monte Carlo means of the same moments with batch-means standard errors.
struct MonteCarloMoments {
  kernels::MomentSums mean;
  kernels::MomentSums std_error;
};
MonteCarloMoments mc_moments(const std::function<double(double)>& g, std::size_t samples,
                             RandomStream& rng);

}  // namespace orthospec
