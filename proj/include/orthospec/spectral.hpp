#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "orthospec/core.hpp"
#include "orthospec/preprocessing.hpp"
#include "orthospec/sensing.hpp"
#include "orthospec/signal.hpp"

namespace orthospec {

/// diag(T(y_1), ..., T(y_m)).
struct WeightDiagonal {
  RealVector t_values;
};

/// T evaluated at every measurement; the function must be bound to the
/// realized delta of the operator.
WeightDiagonal build_weights(const ProcessingFunction& f, const SignalInstance& signal);

/// D x = A^H (w .* (A x)).
ComplexVector apply_D(const SensingOperator& op, const WeightDiagonal& w, const ComplexVector& x);

/// A^H diag(w) A, formed directly from a dense operator.
ComplexMatrix dense_D_direct(const ComplexMatrix& a, const RealVector& w);

struct PowerOptions {
  double shift = 0.0;
  std::size_t max_iter = 10000;
  double tol = 1e-9;
};

struct SpectralEstimate {
  ComplexVector x_hat;  // |x_hat| = sqrt(n)
  double lambda_hat = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;  // |D v - lambda v| for the unit iterate v
  bool converged = false;
};

using LinearMap = std::function<ComplexVector(const ComplexVector&)>;

/// Shifted power iteration on a Hermitian map from a random complex Gaussian
/// start. Stops when both the phase-aligned update and the residual are
/// <= tol; otherwise returns the iterate with the smallest residual.
SpectralEstimate power_method(const LinearMap& d, std::size_t n, const PowerOptions& opt,
                              RandomStream& rng);

SpectralEstimate power_method(const SensingOperator& op, const WeightDiagonal& w,
                              const PowerOptions& opt, RandomStream& rng);

struct TrialSpec {
  SensingSpec sensing;
  ProcessingSpec func;
  std::optional<double> shift;  // default_shift(kind) when absent
  std::size_t max_iter = 10000;
  double tol = 1e-9;
};

struct TrialResult {
  Seed seed;
  SensingDescriptor descriptor;
  double realized_delta = 0.0;
  double p2 = 0.0;
  double lambda1 = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Builds operator and signal from the seed, runs the power method and
/// scores the estimate. Operator, signal and start vector use the
/// substreams "sensing", "signal" and "power-start" of the seed.
TrialResult run_trial(const TrialSpec& spec, Seed seed);

}  // namespace orthospec
