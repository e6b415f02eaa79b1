#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lapack.hpp"
#include "orthospec/error.hpp"
#include "orthospec/spectrum.hpp"

using namespace orthospec;

namespace {

struct Setup {
  OperatorPtr op;
  SignalInstance signal;
};

Setup setup(SensingKind kind, std::size_t n, double delta, std::uint64_t seed = 1) {
  SensingSpec s;
  s.kind = kind;
  s.n = n;
  s.delta = delta;
  RandomStream root(Seed{seed});
  OperatorPtr op = make_operator(s, root.substream("sensing"));
  RandomStream r = root.substream("signal");
  SignalInstance sig = make_signal(op, r);
  return {op, std::move(sig)};
}

ComplexMatrix random_matrix(Eigen::Index n, std::uint64_t seed) {
  RandomStream rng(Seed{seed});
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.complex_normal(1.0);
  return a;
}

}  // namespace

TEST_CASE("Hermitian eigenvalues") {
  CHECK((eig_hermitian(ComplexMatrix::Identity(5, 5)).array() - 1.0).abs().maxCoeff() <= 1e-14);
  ComplexMatrix d = ComplexMatrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) d(i, i) = 6.0 - i;
  const RealVector e = eig_hermitian(d);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(e[i] - (i + 1.0)) <= 1e-12);

  const ComplexMatrix g = random_matrix(64, 1);
  const ComplexMatrix h = 0.5 * (g + g.adjoint());
  CHECK(std::abs(eig_hermitian(h).sum() - h.trace().real()) <= 1e-9);
  CHECK_THROWS_AS(eig_hermitian(g), Error);
}

TEST_CASE("general eigenvalues") {
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = Complex(1, 2);
  d(1, 1) = Complex(-3, 0);
  d(2, 2) = Complex(0, -1);
  ComplexVector e = eig_general(d);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK((e.array() - d(i, i)).abs().minCoeff() <= 1e-12);

  ComplexMatrix jordan = ComplexMatrix::Zero(4, 4);
  for (int i = 0; i < 3; ++i) jordan(i, i + 1) = 1.0;
  CHECK(eig_general(jordan).cwiseAbs().maxCoeff() <= 1e-8);

  const ComplexMatrix g = random_matrix(64, 2);
  CHECK(std::abs(eig_general(g).sum() - g.trace()) <= 1e-7);
}

TEST_CASE("dense D") {
  const Setup s = setup(SensingKind::kHaar, 48, 4.0);
  const auto m = static_cast<Eigen::Index>(s.op->rows());
  const DenseD ones = dense_D(*s.op, WeightDiagonal{RealVector::Ones(m)});
  CHECK((eig_hermitian(ones.d).array() - 1.0).abs().maxCoeff() <= 1e-9);
  const DenseD c = dense_D(*s.op, WeightDiagonal{RealVector::Constant(m, -0.7)});
  CHECK((eig_hermitian(c.d).array() + 0.7).abs().maxCoeff() <= 1e-9);

  ProcessingSpec mm;
  mm.kind = ProcessingKind::kMM;
  const ProcessingFunction f(mm, s.op->delta());
  const WeightDiagonal w = build_weights(f, s.signal);
  const DenseD d = dense_D(*s.op, w);
  CHECK(d.asymmetry <= 1e-12);
  CHECK((d.d - dense_D_direct(dense_matrix(*s.op), w.t_values)).cwiseAbs().maxCoeff() <= 1e-11);
  CHECK_THROWS_AS(dense_D(*s.op, w, 10), Error);
}

TEST_CASE("dense E") {
  const Setup s = setup(SensingKind::kPartialDft, 48, 3.0);
  const auto m = s.op->rows();
  REQUIRE(m == 144);
  ProcessingSpec mm;
  mm.kind = ProcessingKind::kMM;
  const ProcessingFunction f(mm, s.op->delta());
  const double mu = *rho_sq(f).mu_hat;
  const EPContext ctx = make_ep_context(s.signal, f, mu);
  const ComplexMatrix e = dense_E(ctx);

  const ComplexMatrix a = dense_matrix(*s.op);
  const auto mi = static_cast<Eigen::Index>(m);
  const ComplexMatrix left = ctx.delta * a * a.adjoint() - ComplexMatrix::Identity(mi, mi);
  RealVector diag = ctx.g / ctx.g_bar;
  diag.array() -= 1.0;
  const ComplexMatrix product = left * diag.cast<Complex>().asDiagonal();
  CHECK((e - product).cwiseAbs().maxCoeff() <= 1e-11);

  // Same spectrum, matched greedily.
  ComplexVector ours = eig_general(e);
  ComplexVector ref = eig_general(product);
  std::vector<bool> used(ref.size(), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ours.size(); ++i) {
    double best = INFINITY;
    Eigen::Index arg = 0;
    for (Eigen::Index j = 0; j < ref.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(ours[i] - ref[j]);
      if (dist < best) {
        best = dist;
        arg = j;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  CHECK(worst <= 1e-8);

  CHECK(std::abs(left.trace()) / static_cast<double>(m) <= 1e-9);
  CHECK(std::abs(diag.sum()) / static_cast<double>(m) <= 1e-9);

  ProcessingSpec flat;
  flat.kind = ProcessingKind::kCustom;
  flat.table = {{0.0, 0.4}, {2.0, 0.4}};
  const EPContext c = make_ep_context(s.signal, ProcessingFunction(flat, s.op->delta()), 0.5);
  CHECK(dense_E(c).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK_THROWS_AS(dense_E(ctx, 100), Error);
}

TEST_CASE("eigen-pair identity at the finite-n stationary mu") {
  for (ProcessingKind kind : {ProcessingKind::kMM, ProcessingKind::kStarRegularized}) {
    const Setup s = setup(SensingKind::kHaar, 64, 4.0, 3);
    ProcessingSpec ps;
    ps.kind = kind;
    const ProcessingFunction f(ps, s.op->delta());
    const double mu = *rho_sq(f).mu_hat;
    const RealVector d = eig_hermitian(dense_D(*s.op, build_weights(f, s.signal)).d);
    const EigenpairCheck c = eigenpair_check(s.signal, f, d[d.size() - 1], mu);
    CAPTURE(to_string(kind));
    CHECK(std::abs(c.e_eigenvalue - 1.0) <= 1e-8);
    CHECK(c.fixed_point.eigen_residual <= 1e-5);
    CHECK(std::abs(c.fixed_point.lambda_pred - d[d.size() - 1]) <= 1e-8);
  }
}

TEST_CASE("analysis reports") {
  SpectrumSpec spec;
  spec.sensing.kind = SensingKind::kHaar;
  spec.sensing.n = 96;
  spec.sensing.delta = 4.0;
  spec.func.kind = ProcessingKind::kMM;
  const SpectrumReport r = analyze(spec, Seed{1});
  CHECK(r.status == "ok");
  CHECK(r.n == 96);
  CHECK(r.m == 384);
  CHECK(r.d_eigs.size() == 96);
  CHECK(r.e_eigs.size() == 384);
  CHECK(std::is_sorted(r.d_eigs.data(), r.d_eigs.data() + r.d_eigs.size()));
  CHECK(r.d_extreme == r.d_eigs[95]);
  CHECK(r.top_match == doctest::Approx(std::abs(r.d_extreme - r.lambda_pred)));
  CHECK(r.outlier_gap == doctest::Approx(std::abs(std::abs(r.e_top) - 1.0)));
  const nlohmann::json j = to_json(r);
  CHECK(j["status"] == "ok");
  CHECK(j["branch"] == "max");

  // Power method and the dense solver agree on the top eigenvalue.
  {
    RandomStream root(Seed{1});
    OperatorPtr op = make_operator(spec.sensing, root.substream("sensing"));
    RandomStream sr = root.substream("signal");
    const SignalInstance sig = make_signal(op, sr);
    const ProcessingFunction f(spec.func, op->delta());
    PowerOptions opt;
    opt.shift = 10.0;
    RandomStream start(Seed{4});
    const SpectralEstimate est = power_method(*op, build_weights(f, sig), opt, start);
    CHECK(std::abs(est.lambda_hat - r.d_extreme) <= 1e-6);
  }

  spec.func.kind = ProcessingKind::kStar;
  spec.sensing.delta = 1.5;
  const SpectrumReport na = analyze(spec, Seed{1});
  CHECK(na.status == "not_applicable");
  CHECK(na.d_eigs.size() == 0);
  CHECK(to_json(na)["status"] == "not_applicable");

  spec.func.kind = ProcessingKind::kShiftedMM;
  spec.sensing.delta = 5.0;
  spec.branch = Branch::kMin;
  spec.with_e = false;
  const SpectrumReport mn = analyze(spec, Seed{1});
  CHECK(mn.status == "ok");
  CHECK(mn.d_extreme == mn.d_eigs[0]);
  CHECK(mn.e_eigs.size() == 0);
  CHECK(std::isnan(mn.outlier_gap));

  spec.cap = 50;
  CHECK_THROWS_AS(analyze(spec, Seed{1}), Error);
  CHECK(parse_branch("min") == Branch::kMin);
  CHECK_THROWS_AS(parse_branch("middle"), Error);
}

TEST_CASE("Freedman-Diaconis histogram") {
  RealVector v(1000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i) / 999.0;
  const Histogram h = freedman_diaconis(v);
  // IQR 0.5, width 2*0.5/10 = 0.1, so ten bins on [0, 1].
  CHECK(h.counts.size() == 10);
  CHECK(h.edges.size() == 11);
  CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == 1000);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == doctest::Approx(1.0));

  const Histogram flat = freedman_diaconis(RealVector::Constant(7, 2.0));
  CHECK(flat.counts == std::vector<std::size_t>{7});
  CHECK_THROWS_AS(freedman_diaconis(RealVector()), Error);
}
