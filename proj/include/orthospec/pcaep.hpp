#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "orthospec/asymptotics.hpp"
#include "orthospec/core.hpp"
#include "orthospec/preprocessing.hpp"
#include "orthospec/sensing.hpp"
#include "orthospec/signal.hpp"

namespace orthospec {

/// Everything the iteration needs besides z: the operator, G(y_i, mu) and
/// its empirical mean.
struct EPContext {
  OperatorPtr op;
  double mu = 0.0;
  double delta = 0.0;  // realized m/n
  RealVector g;        // G(y_i, mu)
  double g_bar = 0.0;  // (1/m) sum G_i
  RealVector t_values; // T(y_i), for D
};

/// G at every measurement. Singular entries are reported together.
EPContext make_ep_context(const SignalInstance& signal, const ProcessingFunction& f, double mu);

struct EPState {
  ComplexVector z;
  std::size_t t = 0;
};

/// z0 = alpha0 z_star + sigma0 w0, w0 ~ CN(0, 1/delta) entrywise.
EPState ep_init(const SignalInstance& signal, Complex alpha0, double sigma0, RandomStream& rng);

/// E(mu) z = (delta A A^H - I)(G/G_bar - I) z, matrix-free.
ComplexVector ep_apply(const EPContext& ctx, const ComplexVector& z);

EPState ep_step(const EPContext& ctx, const EPState& state);

/// sqrt(n) A^H z / |A^H z|.
ComplexVector ep_extract_x(const SensingOperator& op, const ComplexVector& z);

struct SEState {
  Complex alpha{0.0, 0.0};
  double sigma_sq = 0.0;
  std::size_t t = 0;
};

/// alpha' = (delta-1) alpha (psi1-1);
/// sigma2' = (delta-1) [|alpha|^2 (psi3^2 - psi1^2) + sigma2 (psi2-1)].
SEState se_step(const PsiTriple& psi, double delta, const SEState& state);

/// |alpha|^2 / (|alpha|^2 + c sigma^2) with c = (delta-1)/delta for t >= 1.
/// At t = 0 the noise is the i.i.d. w0 and only 1/delta of it survives A^H,
/// so c = 1/delta there.
double se_cosine(const SEState& state, double delta);

/// Next E[(W~^{t+1})* W~^{t+2}] from E[(W~^t)* W~^{t+1}]; starts from 0.
double noise_corr_step(const PsiTriple& psi, double delta, Complex alpha_t, Complex alpha_t1,
                       double prev);

struct TrackedRecord {
  std::size_t t = 0;
  Complex alpha_emp;
  Complex alpha_se;
  double sigma2_emp = 0.0;
  double sigma2_se = 0.0;
  double p2_emp = 0.0;
  double p2_se = 0.0;
  // Correlation of the noise terms at t and t+1; NaN on the last record.
  double wcorr_emp = 0.0;
  double wcorr_se = 0.0;
};

struct TrackedSpec {
  SensingSpec sensing;
  ProcessingSpec func;
  std::optional<double> mu;  // mu_hat of the prediction when absent
  Complex alpha0{0.2, 0.0};
  double sigma0 = 1.0;
  std::size_t t_max = 20;
  QuadratureSpec quadrature;
};

struct TrackedRun {
  std::vector<TrackedRecord> records;  // t = 0 .. t_max
  double mu = 0.0;
  double realized_delta = 0.0;
  PsiTriple psi;
};

/// Operator, signal and initial noise come from the "sensing", "signal" and
/// "ep-init" substreams of the seed.
TrackedRun run_tracked(const TrackedSpec& spec, Seed seed);

struct FixedPointReport {
  double eigen_residual = 0.0;
  double lambda_pred = 0.0;
};

/// lambda_pred = 1/mu - ((delta-1)/delta)/G_bar and |D x - lambda_pred x|/|x|
/// for x = ep_extract_x(z).
FixedPointReport fixed_point_check(const EPContext& ctx, const ComplexVector& z);

/// 1/mu - ((delta-1)/delta) / G_bar(mu) over the realized measurements.
double empirical_lambda(const EPContext& ctx);

/// mu at which E(mu) has an eigenvalue exactly 1 for the given eigenvalue
/// of D: the finite-n counterpart of mu_hat. Searches near mu_guess on the
/// same branch.
double stationary_mu(const SignalInstance& signal, const ProcessingFunction& f,
                     double lambda_d, double mu_guess);

}  // namespace orthospec
