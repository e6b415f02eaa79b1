#include <doctest.h>

#include <cmath>

#include "orthospec/asymptotics.hpp"
#include "orthospec/error.hpp"
#include "orthospec/pcaep.hpp"
#include "orthospec/spectral.hpp"

using namespace orthospec;

namespace {

struct Instance {
  SignalInstance signal;
  ProcessingFunction f;
};

Instance instance(SensingKind kind, std::size_t n, double delta, ProcessingKind fk,
                  std::uint64_t seed = 1) {
  SensingSpec s;
  s.kind = kind;
  s.n = n;
  s.delta = delta;
  RandomStream root(Seed{seed});
  OperatorPtr op = make_operator(s, root.substream("sensing"));
  RandomStream sig = root.substream("signal");
  SignalInstance signal = make_signal(op, sig);
  ProcessingSpec ps;
  ps.kind = fk;
  return {std::move(signal), ProcessingFunction(ps, op->delta())};
}

double p2(const ComplexVector& a, const ComplexVector& b) { return cosine_similarity_sq(a, b); }

}  // namespace

TEST_CASE("initial state") {
  const Instance in = instance(SensingKind::kPartialDft, 256, 3.0, ProcessingKind::kMM);
  RandomStream rng(Seed{2});
  CHECK((ep_init(in.signal, 1.0, 0.0, rng).z - in.signal.z_star).norm() == 0.0);

  const double m = static_cast<double>(in.signal.z_star.size());
  for (std::uint64_t k = 0; k < 10; ++k) {
    RandomStream r(Seed{100 + k});
    const EPState s = ep_init(in.signal, 0.0, 1.0, r);
    const double overlap = std::abs(in.signal.z_star.dot(s.z)) / in.signal.z_star.squaredNorm();
    CHECK(overlap <= 5.0 / std::sqrt(m));
  }
  CHECK_THROWS_AS(ep_init(in.signal, 0.2, -1.0, rng), Error);
}

TEST_CASE("initial norm concentrates at n = 16384") {
  const Instance in = instance(SensingKind::kPartialDft, 16384, 3.0, ProcessingKind::kStar);
  RandomStream rng(Seed{3});
  const EPState s = ep_init(in.signal, 0.2, 1.0, rng);
  const double m = static_cast<double>(s.z.size());
  CHECK(std::abs(s.z.squaredNorm() / m - (0.04 + 1.0) / 3.0) <= 0.05);
}

TEST_CASE("one step equals the explicit dense product") {
  for (SensingKind kind : {SensingKind::kHaar, SensingKind::kPartialDft, SensingKind::kCdp}) {
    const Instance in = instance(kind, 48, 3.0, ProcessingKind::kMM);
    const double mu = *rho_sq(in.f).mu_hat;
    const EPContext ctx = make_ep_context(in.signal, in.f, mu);
    const ComplexMatrix a = dense_matrix(*in.signal.op);
    const auto m = a.rows();
    RealVector d(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = in.f.eval_T(in.signal.y[i]);
      d[i] = 1.0 / (1.0 / mu - t);
    }
    const double bar = d.mean();
    const ComplexMatrix left =
        ctx.delta * a * a.adjoint() - ComplexMatrix::Identity(m, m);
    const ComplexMatrix right =
        (d / bar - RealVector::Ones(m)).cast<Complex>().asDiagonal().toDenseMatrix();
    const ComplexMatrix e = left * right;

    RandomStream rng(Seed{8});
    const EPState s = ep_init(in.signal, 0.2, 1.0, rng);
    const EPState next = ep_step(ctx, s);
    CAPTURE(to_string(kind));
    CHECK(next.t == 1);
    CHECK((next.z - e * s.z).norm() <= 1e-11 * std::max(1.0, s.z.norm()));
    // Both factors have zero normalized trace.
    CHECK(std::abs(left.trace()) / static_cast<double>(m) <= 1e-9);
    CHECK(std::abs(right.trace()) / static_cast<double>(m) <= 1e-9);
  }
}

TEST_CASE("constant G leaves nothing to propagate") {
  const Instance base = instance(SensingKind::kPartialDft, 64, 3.0, ProcessingKind::kMM);
  ProcessingSpec c;
  c.kind = ProcessingKind::kCustom;
  c.table = {{0.0, 0.3}, {1.0, 0.3}};
  const ProcessingFunction f(c, base.signal.op->delta());
  const EPContext ctx = make_ep_context(base.signal, f, 0.5);
  RandomStream rng(Seed{1});
  const EPState s = ep_init(base.signal, 0.2, 1.0, rng);
  CHECK(ep_step(ctx, s).z.norm() <= 1e-13 * s.z.norm());
}

TEST_CASE("singular G reports the offending measurements") {
  const Instance in = instance(SensingKind::kPartialDft, 64, 3.0, ProcessingKind::kMM);
  // Choose mu so that 1/mu hits T at the largest measurement.
  Eigen::Index arg = 0;
  in.signal.y.maxCoeff(&arg);
  const double t = in.f.eval_T(in.signal.y[arg]);
  REQUIRE(t > 0.0);
  try {
    (void)make_ep_context(in.signal, in.f, 1.0 / t);
    FAIL("expected a singularity");
  } catch (const SingularityError& e) {
    CHECK(std::string(e.what()).find(std::to_string(arg)) != std::string::npos);
    CHECK(e.y() == in.signal.y[arg]);
  }
}

TEST_CASE("back-projection") {
  const Instance in = instance(SensingKind::kHaar, 64, 3.0, ProcessingKind::kMM);
  const SensingOperator& op = *in.signal.op;
  const ComplexVector x = ep_extract_x(op, in.signal.z_star);
  CHECK(std::abs(p2(x, in.signal.x_star) - 1.0) <= 1e-10);

  RandomStream rng(Seed{4});
  const ComplexVector z = sample_complex_gaussian(rng, op.rows(), 1.0);
  CHECK(std::abs(ep_extract_x(op, z).squaredNorm() - 64.0) <= 1e-10 * 64.0);
  const ComplexVector perp = z - op.apply(op.apply_adjoint(z));
  CHECK_THROWS_AS(ep_extract_x(op, perp), Error);
}

TEST_CASE("state evolution algebra") {
  PsiTriple p;
  p.psi1 = 1.5;
  p.psi2 = 1.3;
  p.psi3 = 1.9;
  const double delta = 3.0;
  SEState s{Complex(0.2, 0.1), 1.0, 0};
  SEState n = se_step(p, delta, s);
  // psi1 = delta/(delta-1) fixes alpha.
  CHECK(n.alpha == s.alpha);
  CHECK(n.t == 1);
  CHECK(n.sigma_sq ==
        doctest::Approx(2.0 * (0.05 * (1.9 * 1.9 - 2.25) + 0.3)).epsilon(1e-14));

  const SEState zero = se_step(p, delta, SEState{0.0, 2.0, 3});
  CHECK(zero.alpha == Complex(0.0, 0.0));
  CHECK(zero.sigma_sq == doctest::Approx(2.0 * 0.3 * 2.0).epsilon(1e-14));

  // Informative fixed point: the ratio |alpha|^2/sigma^2 is stationary.
  const double k = delta / (delta - 1.0);
  const double ratio = (k - p.psi2) / (p.psi3 * p.psi3 - k * k);
  const SEState at{Complex(0.3, 0.0), 0.09 / ratio, 1};
  const SEState after = se_step(p, delta, at);
  CHECK(std::abs(std::norm(after.alpha) / after.sigma_sq - ratio) <= 1e-9 * ratio);
}

TEST_CASE("cosine prediction") {
  CHECK(se_cosine(SEState{0.5, 0.0, 2}, 3.0) == 1.0);
  CHECK(se_cosine(SEState{0.0, 1.0, 2}, 3.0) == 0.0);
  CHECK(se_cosine(SEState{0.2, 1.0, 1}, 3.0) == doctest::Approx(0.04 / (0.04 + 2.0 / 3.0)));
  CHECK(se_cosine(SEState{0.2, 1.0, 1}, 3.0) == doctest::Approx(0.0566).epsilon(1e-3));
  // At t = 0 the noise is i.i.d. and A^H keeps 1/delta of it.
  CHECK(se_cosine(SEState{0.2, 1.0, 0}, 3.0) == doctest::Approx(0.04 / (0.04 + 1.0 / 3.0)));
  CHECK_THROWS_AS(se_cosine(SEState{0.0, 0.0, 1}, 3.0), Error);
}

TEST_CASE("noise correlation recursion") {
  PsiTriple p;
  p.psi1 = 1.5;
  p.psi2 = 1.3;
  p.psi3 = 1.9;
  const double delta = 3.0;
  const Complex a(0.2, 0.0);
  const double first = noise_corr_step(p, delta, a, a, 0.0);
  CHECK(first == doctest::Approx(2.0 * (0.04 / 3.0) * (1.9 * 1.9 - 2.25)).epsilon(1e-14));

  // At mu_hat with alpha constant the recursion converges to sigma_inf^2/delta.
  double c = 0.0;
  SEState s{a, 1.0, 0};
  for (int t = 0; t < 400; ++t) {
    c = noise_corr_step(p, delta, a, a, c);
    s = se_step(p, delta, s);
  }
  const double k = delta / (delta - 1.0);
  const double limit = (0.04 / delta) * (1.9 * 1.9 - 2.25) / (k - p.psi2);
  CHECK(c == doctest::Approx(limit).epsilon(1e-12));
  CHECK(delta * c / s.sigma_sq == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("SE keeps alpha at mu_hat") {
  ProcessingSpec star;
  star.kind = ProcessingKind::kStar;
  const ProcessingFunction f(star, 3.0);
  const AsymptoticPrediction pred = rho_sq(f);
  REQUIRE(pred.at_mu_hat);
  SEState s{0.2, 1.0, 0};
  for (int t = 0; t < 20; ++t) s = se_step(*pred.at_mu_hat, 3.0, s);
  CHECK(std::abs(s.alpha - Complex(0.2, 0.0)) <= 1e-6);
  // sigma^2 contracts onto the informative ratio.
  for (int t = 0; t < 100; ++t) s = se_step(*pred.at_mu_hat, 3.0, s);
  const double k = 1.5;
  const PsiTriple& p = *pred.at_mu_hat;
  const double ratio = (k - p.psi2) / (p.psi3 * p.psi3 - k * k);
  CHECK(std::abs(0.04 / s.sigma_sq - ratio) <= 1e-3 * ratio);
}

TEST_CASE("iterates stay bounded at mu_hat") {
  // |z^t|^2/m tracks (|alpha_t|^2 + sigma_t^2)/delta, which moves from its
  // starting value toward the informative fixed point; the band is taken
  // around that moving target.
  const Instance in = instance(SensingKind::kPartialDft, 16384, 3.0, ProcessingKind::kStar);
  const AsymptoticPrediction pred = rho_sq(in.f);
  const EPContext ctx = make_ep_context(in.signal, in.f, *pred.mu_hat);
  RandomStream rng(Seed{5});
  EPState s = ep_init(in.signal, 0.2, 1.0, rng);
  SEState se{0.2, 1.0, 0};
  const double m = static_cast<double>(s.z.size());
  for (int t = 0; t <= 20; ++t) {
    const double v = s.z.squaredNorm() / m;
    const double r = (std::norm(se.alpha) + se.sigma_sq) / 3.0;
    CAPTURE(t);
    CHECK(v >= 0.5 * r);
    CHECK(v <= 2.0 * r);
    CHECK(std::isfinite(v));
    CHECK(v > 0.0);
    s = ep_step(ctx, s);
    se = se_step(*pred.at_mu_hat, 3.0, se);
  }
}

TEST_CASE("tracked runs") {
  TrackedSpec spec;
  spec.sensing.kind = SensingKind::kPartialDft;
  spec.sensing.n = 2048;
  spec.sensing.delta = 3.0;
  spec.func.kind = ProcessingKind::kStarRegularized;
  spec.t_max = 8;
  const TrackedRun a = run_tracked(spec, Seed{1});
  const TrackedRun b = run_tracked(spec, Seed{1});
  const TrackedRun c = run_tracked(spec, Seed{2});
  REQUIRE(a.records.size() == 9);
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    CHECK(a.records[t].t == t);
    CHECK(a.records[t].p2_emp == b.records[t].p2_emp);
    CHECK(a.records[t].alpha_se == c.records[t].alpha_se);
    CHECK(a.records[t].p2_se == c.records[t].p2_se);
    CHECK(a.records[t].sigma2_emp >= 0.0);
  }
  CHECK(std::isnan(a.records.back().wcorr_emp));
  CHECK(a.records[0].wcorr_se == 0.0);
  CHECK(std::abs(a.records[0].alpha_emp - Complex(0.2, 0.0)) < 0.05);

  spec.func.kind = ProcessingKind::kStar;
  spec.sensing.delta = 1.5;
  try {
    (void)run_tracked(spec, Seed{1});
    FAIL("expected not applicable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNotApplicable);
  }
}

TEST_CASE("fixed-point check") {
  const Instance in = instance(SensingKind::kPartialDft, 512, 3.0, ProcessingKind::kStar);
  const AsymptoticPrediction pred = rho_sq(in.f);
  const EPContext ctx = make_ep_context(in.signal, in.f, *pred.mu_hat);
  RandomStream rng(Seed{6});
  const ComplexVector z = sample_complex_gaussian(rng, in.signal.z_star.size(), 1.0);
  const FixedPointReport r = fixed_point_check(ctx, z);
  CHECK(r.eigen_residual > 0.1);
  CHECK(r.lambda_pred == doctest::Approx(empirical_lambda(ctx)).epsilon(1e-14));
  CHECK(std::abs(r.lambda_pred - pred.lambda_at_mu_hat) <= 0.05);
}
