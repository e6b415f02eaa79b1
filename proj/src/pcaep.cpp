#include "orthospec/pcaep.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "orthospec/error.hpp"
#include "orthospec/kernels.hpp"

namespace orthospec {

namespace {

double g_mean(const RealVector& g) { return kernels::parallel::mean(g); }

// Overlap of z with z_star, and the residual after removing it.
struct Projection {
  Complex alpha;
  ComplexVector residual;
};

Projection project(const ComplexVector& z_star, const ComplexVector& z) {
  const double zz = z_star.squaredNorm();
  Projection p;
  p.alpha = z_star.dot(z) / zz;
  p.residual = z - p.alpha * z_star;
  return p;
}

}  // namespace

EPContext make_ep_context(const SignalInstance& signal, const ProcessingFunction& f, double mu) {
  require(std::isfinite(mu) && mu != 0.0, ErrorCode::kInvalidParameter, "PCA-EP needs mu != 0");
  EPContext ctx;
  ctx.op = signal.op;
  ctx.mu = mu;
  ctx.delta = signal.op->delta();
  const auto m = static_cast<std::size_t>(signal.y.size());
  const double u = 1.0 / mu;

  ctx.t_values = kernels::parallel::map_index(m, [&](std::size_t i) {
    return f.eval_T(signal.y[static_cast<Eigen::Index>(i)]);
  });
  // Collect every singular index instead of stopping at the first one.
  std::vector<std::size_t> bad;
  ctx.g.resize(static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    const double denom = u - ctx.t_values[static_cast<Eigen::Index>(i)];
    if (std::abs(denom) <= 1e-14) {
      bad.push_back(i);
      continue;
    }
    ctx.g[static_cast<Eigen::Index>(i)] = 1.0 / denom;
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "G is singular at " << bad.size() << " measurement(s), indices";
    for (std::size_t k = 0; k < bad.size() && k < 16; ++k) os << ' ' << bad[k];
    if (bad.size() > 16) os << " ...";
    const std::size_t first = bad.front();
    throw SingularityError(signal.y[static_cast<Eigen::Index>(first)], mu, os.str());
  }
  ctx.g_bar = g_mean(ctx.g);
  require(std::isfinite(ctx.g_bar) && ctx.g_bar != 0.0, ErrorCode::kDegenerate,
          "empirical mean of G is zero or not finite");
  return ctx;
}

EPState ep_init(const SignalInstance& signal, Complex alpha0, double sigma0, RandomStream& rng) {
  require(sigma0 >= 0.0 && std::isfinite(sigma0), ErrorCode::kInvalidParameter,
          "ep_init needs sigma0 >= 0");
  const auto m = static_cast<std::size_t>(signal.z_star.size());
  EPState s;
  s.z = alpha0 * signal.z_star;
  if (sigma0 > 0.0) s.z += sigma0 * sample_complex_gaussian(rng, m, 1.0 / signal.op->delta());
  return s;
}

ComplexVector ep_apply(const EPContext& ctx, const ComplexVector& z) {
  require(z.size() == ctx.g.size(), ErrorCode::kInvalidParameter, "ep_apply: length mismatch");
  const double inv_bar = 1.0 / ctx.g_bar;
  const Eigen::Index m = z.size();
  ComplexVector p(m);
#pragma omp parallel for schedule(static) if (m > 32768)
  for (Eigen::Index i = 0; i < m; ++i) p[i] = (ctx.g[i] * inv_bar - 1.0) * z[i];
  ComplexVector out = ctx.op->apply(ctx.op->apply_adjoint(p));
  out *= ctx.delta;
  out -= p;
  return out;
}

EPState ep_step(const EPContext& ctx, const EPState& state) {
  EPState next;
  next.z = ep_apply(ctx, state.z);
  next.t = state.t + 1;
  return next;
}

ComplexVector ep_extract_x(const SensingOperator& op, const ComplexVector& z) {
  ComplexVector x = op.apply_adjoint(z);
  const double norm = x.norm();
  if (!(norm > 1e-300) || !std::isfinite(norm)) {
    fail(ErrorCode::kDegenerate, "A^H z vanishes; no estimate can be extracted");
  }
  // A tiny projection relative to z is numerically a null-space vector.
  if (norm <= 1e-12 * z.norm()) {
    fail(ErrorCode::kDegenerate, "z lies in the null space of A^H");
  }
  x *= std::sqrt(static_cast<double>(op.cols())) / norm;
  return x;
}

SEState se_step(const PsiTriple& psi, double delta, const SEState& state) {
  SEState next;
  const double a2 = std::norm(state.alpha);
  next.alpha = (delta - 1.0) * state.alpha * (psi.psi1 - 1.0);
  next.sigma_sq = (delta - 1.0) * (a2 * (psi.psi3 * psi.psi3 - psi.psi1 * psi.psi1) +
                                   state.sigma_sq * (psi.psi2 - 1.0));
  next.sigma_sq = std::max(next.sigma_sq, 0.0);
  next.t = state.t + 1;
  return next;
}

double se_cosine(const SEState& state, double delta) {
  const double a2 = std::norm(state.alpha);
  require(a2 > 0.0 || state.sigma_sq > 0.0, ErrorCode::kDegenerate,
          "se_cosine: alpha and sigma are both zero");
  const double c = state.t == 0 ? 1.0 / delta : (delta - 1.0) / delta;
  return a2 / (a2 + c * state.sigma_sq);
}

double noise_corr_step(const PsiTriple& psi, double delta, Complex alpha_t, Complex alpha_t1,
                       double prev) {
  const double aa = (std::conj(alpha_t) * alpha_t1).real();
  return (delta - 1.0) * (aa / delta * (psi.psi3 * psi.psi3 - psi.psi1 * psi.psi1) +
                          (psi.psi2 - 1.0) * prev);
}

TrackedRun run_tracked(const TrackedSpec& spec, Seed seed) {
  const RandomStream root(seed);
  const OperatorPtr op = make_operator(spec.sensing, root.substream("sensing"));
  RandomStream signal_rng = root.substream("signal");
  const SignalInstance signal = make_signal(op, signal_rng);
  const double delta = op->delta();
  const ProcessingFunction f(spec.func, delta);

  TrackedRun run;
  run.realized_delta = delta;
  if (spec.mu) {
    run.mu = *spec.mu;
  } else {
    const AsymptoticPrediction pred = rho_sq(f, spec.quadrature);
    if (!pred.mu_hat) {
      fail(ErrorCode::kNotApplicable,
           "no informative fixed point for " + f.name() + " at delta=" + std::to_string(delta));
    }
    run.mu = *pred.mu_hat;
  }
  run.psi = psi(f, run.mu, spec.quadrature);

  const EPContext ctx = make_ep_context(signal, f, run.mu);
  RandomStream init_rng = root.substream("ep-init");
  EPState state = ep_init(signal, spec.alpha0, spec.sigma0, init_rng);

  SEState se;
  se.alpha = spec.alpha0;
  se.sigma_sq = spec.sigma0 * spec.sigma0;

  std::vector<SEState> se_path{se};
  std::vector<ComplexVector> noise;
  run.records.reserve(spec.t_max + 1);
  for (std::size_t t = 0; t <= spec.t_max; ++t) {
    const Projection pr = project(signal.z_star, state.z);
    TrackedRecord rec;
    rec.t = t;
    rec.alpha_emp = pr.alpha;
    rec.alpha_se = se.alpha;
    rec.sigma2_emp = pr.residual.squaredNorm() / signal.z_star.squaredNorm();
    rec.sigma2_se = se.sigma_sq;
    rec.p2_emp = cosine_similarity_sq(ep_extract_x(*op, state.z), signal.x_star);
    rec.p2_se = se_cosine(se, delta);
    rec.wcorr_emp = std::numeric_limits<double>::quiet_NaN();
    rec.wcorr_se = std::numeric_limits<double>::quiet_NaN();
    run.records.push_back(rec);
    noise.push_back(pr.residual);

    if (t == spec.t_max) break;
    state = ep_step(ctx, state);
    se = se_step(run.psi, delta, se);
    se_path.push_back(se);
  }

  // Correlation between consecutive noise terms, empirical and predicted.
  double c = 0.0;  // E[(W~^0)* W~^1]
  for (std::size_t t = 0; t + 1 < noise.size(); ++t) {
    const ComplexVector& a = noise[t];
    const ComplexVector& b = noise[t + 1];
    const double na = a.norm();
    const double nb = b.norm();
    run.records[t].wcorr_emp = (na > 0.0 && nb > 0.0) ? a.dot(b).real() / (na * nb) : 0.0;
    const double scale = std::sqrt(se_path[t].sigma_sq * se_path[t + 1].sigma_sq) / delta;
    run.records[t].wcorr_se = scale > 0.0 ? c / scale : 0.0;
    c = noise_corr_step(run.psi, delta, se_path[t].alpha, se_path[t + 1].alpha, c);
  }
  return run;
}

double empirical_lambda(const EPContext& ctx) {
  return 1.0 / ctx.mu - ((ctx.delta - 1.0) / ctx.delta) / ctx.g_bar;
}

FixedPointReport fixed_point_check(const EPContext& ctx, const ComplexVector& z) {
  const ComplexVector x = ep_extract_x(*ctx.op, z);
  FixedPointReport r;
  r.lambda_pred = empirical_lambda(ctx);
  const ComplexVector dx =
      ctx.op->apply_adjoint(kernels::parallel::weighted_product(ctx.t_values, ctx.op->apply(x)));
  r.eigen_residual = (dx - r.lambda_pred * x).norm() / x.norm();
  return r;
}

double stationary_mu(const SignalInstance& signal, const ProcessingFunction& f, double lambda_d,
                     double mu_guess) {
  require(std::isfinite(mu_guess) && mu_guess != 0.0, ErrorCode::kInvalidParameter,
          "stationary_mu needs a finite nonzero guess");
  const auto m = static_cast<std::size_t>(signal.y.size());
  const RealVector t = kernels::parallel::map_index(
      m, [&](std::size_t i) { return f.eval_T(signal.y[static_cast<Eigen::Index>(i)]); });
  const double t_hi = t.maxCoeff();
  const double t_lo = t.minCoeff();
  const double delta = signal.op->delta();
  const double u0 = 1.0 / mu_guess;
  const bool above = u0 > t_hi;
  require(above || u0 < t_lo, ErrorCode::kInvalidParameter,
          "stationary_mu: 1/mu_guess lies inside the range of T");

  // Lambda over the realized measurements, as a function of u = 1/mu.
  auto h = [&](double u) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) acc += 1.0 / (u - t[i]);
    const double g_bar = acc / static_cast<double>(t.size());
    return u - ((delta - 1.0) / delta) / g_bar - lambda_d;
  };
  auto inside = [&](double u) { return above ? u > t_hi : u < t_lo; };

  // Expand a bracket outward from u0 on both sides; the nearest sign change
  // is the root on the same branch as the guess.
  const double h0 = h(u0);
  if (h0 == 0.0) return mu_guess;
  const double edge = above ? t_hi : t_lo;
  double step = 1e-4 * std::max(std::abs(u0 - edge), 1e-12);
  double lo = u0;
  double hi = u0;
  bool found = false;
  for (int k = 0; k < 200 && !found; ++k, step *= 1.6) {
    for (double sign : {1.0, -1.0}) {
      double cand = u0 + sign * step;
      if (!inside(cand)) {
        // Approach the edge geometrically instead of crossing it.
        cand = edge + (u0 - edge) * std::pow(0.5, k + 1);
        if (!inside(cand)) continue;
      }
      if ((h(cand) > 0.0) != (h0 > 0.0)) {
        lo = std::min(u0, cand);
        hi = std::max(u0, cand);
        found = true;
        break;
      }
    }
  }
  if (!found) fail(ErrorCode::kNumeric, "stationary_mu: no bracket around the guess");

  double h_lo = h(lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double hm = h(mid);
    if ((hm > 0.0) == (h_lo > 0.0)) {
      lo = mid;
      h_lo = hm;
    } else {
      hi = mid;
    }
  }
  return 1.0 / (0.5 * (lo + hi));
}

}  // namespace orthospec
