#include "orthospec/spectral.hpp"

#include <cmath>
#include <limits>

#include "orthospec/error.hpp"
#include "orthospec/kernels.hpp"

namespace orthospec {

WeightDiagonal build_weights(const ProcessingFunction& f, const SignalInstance& signal) {
  const RealVector& y = signal.y;
  WeightDiagonal w;
  w.t_values = kernels::parallel::map_index(static_cast<std::size_t>(y.size()), [&](std::size_t i) {
    return f.eval_T(y[static_cast<Eigen::Index>(i)]);
  });
  return w;
}

ComplexVector apply_D(const SensingOperator& op, const WeightDiagonal& w, const ComplexVector& x) {
  require(static_cast<std::size_t>(w.t_values.size()) == op.rows(), ErrorCode::kInvalidParameter,
          "apply_D: weight length does not match the operator");
  return op.apply_adjoint(kernels::parallel::weighted_product(w.t_values, op.apply(x)));
}

ComplexMatrix dense_D_direct(const ComplexMatrix& a, const RealVector& w) {
  require(a.rows() == w.size(), ErrorCode::kInvalidParameter, "dense_D_direct: size mismatch");
  const ComplexMatrix wa = w.asDiagonal() * a;
  ComplexMatrix d = a.adjoint() * wa;
  return 0.5 * (d + d.adjoint());
}

SpectralEstimate power_method(const LinearMap& d, std::size_t n, const PowerOptions& opt,
                              RandomStream& rng) {
  require(opt.shift >= 0.0, ErrorCode::kInvalidParameter, "power method needs shift >= 0");
  require(opt.tol > 0.0, ErrorCode::kInvalidParameter, "power method needs tol > 0");
  require(n > 0, ErrorCode::kInvalidParameter, "power method needs n > 0");

  ComplexVector v = sample_complex_gaussian(rng, n, 1.0);
  v.normalize();

  SpectralEstimate best;
  best.residual = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= opt.max_iter; ++k) {
    const ComplexVector dv = d(v);
    const double lambda = v.dot(dv).real();
    const double residual = (dv - lambda * v).norm();

    ComplexVector next = dv + opt.shift * v;
    const double norm = next.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      fail(ErrorCode::kNumeric, "power method: iterate vanished or overflowed");
    }
    next /= norm;
    const Complex overlap = v.dot(next);
    const double mag = std::abs(overlap);
    const Complex phase = mag > 0.0 ? overlap / mag : Complex(1.0, 0.0);
    const double change = (next - phase * v).norm();

    if (residual < best.residual) {
      best.x_hat = v;
      best.lambda_hat = lambda;
      best.residual = residual;
    }
    best.iterations = k;
    if (change <= opt.tol && residual <= opt.tol) {
      best.x_hat = v;
      best.lambda_hat = lambda;
      best.residual = residual;
      best.converged = true;
      break;
    }
    v = std::move(next);
  }
  best.x_hat *= std::sqrt(static_cast<double>(n));
  return best;
}

SpectralEstimate power_method(const SensingOperator& op, const WeightDiagonal& w,
                              const PowerOptions& opt, RandomStream& rng) {
  return power_method([&](const ComplexVector& x) { return apply_D(op, w, x); }, op.cols(), opt,
                      rng);
}

TrialResult run_trial(const TrialSpec& spec, Seed seed) {
  const RandomStream root(seed);
  const OperatorPtr op = make_operator(spec.sensing, root.substream("sensing"));
  RandomStream signal_rng = root.substream("signal");
  const SignalInstance signal = make_signal(op, signal_rng);
  const ProcessingFunction f(spec.func, op->delta());
  const WeightDiagonal w = build_weights(f, signal);

  PowerOptions opt;
  opt.shift = spec.shift.value_or(default_shift(spec.func.kind));
  opt.max_iter = spec.max_iter;
  opt.tol = spec.tol;
  RandomStream start_rng = root.substream("power-start");

  SpectralEstimate est;
  if (const ComplexMatrix* a = op->dense()) {
    // Dense operators: one n x n product up front is far cheaper than two
    // m x n products per iteration.
    const ComplexMatrix d = dense_D_direct(*a, w.t_values);
    est = power_method([&d](const ComplexVector& x) -> ComplexVector { return d * x; }, op->cols(),
                       opt, start_rng);
  } else {
    est = power_method(*op, w, opt, start_rng);
  }

  TrialResult r;
  r.seed = seed;
  r.descriptor = op->descriptor();
  r.realized_delta = op->delta();
  r.p2 = cosine_similarity_sq(est.x_hat, signal.x_star);
  r.lambda1 = est.lambda_hat;
  r.iterations = est.iterations;
  r.converged = est.converged;
  r.residual = est.residual;
  return r;
}

}  // namespace orthospec
