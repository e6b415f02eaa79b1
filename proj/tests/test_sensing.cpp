#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "lapack.hpp"
#include "oracles.hpp"
#include "orthospec/error.hpp"
#include "orthospec/sensing.hpp"

using namespace orthospec;

namespace {

OperatorPtr make(SensingKind kind, std::size_t n, double delta, std::uint64_t seed = 5) {
  SensingSpec s;
  s.kind = kind;
  s.n = n;
  s.delta = delta;
  return make_operator(s, RandomStream(Seed{seed}));
}

Complex twiddle(double k, double j, double size) {
  return std::polar(1.0, -2.0 * std::numbers::pi * k * j / size);
}

}  // namespace

TEST_CASE("every ensemble has orthonormal columns") {
  for (auto [kind, delta] : {std::pair{SensingKind::kHaar, 2.5}, std::pair{SensingKind::kCdp, 3.0},
                             std::pair{SensingKind::kPartialDft, 2.5}}) {
    const OperatorPtr op = make(kind, 40, delta);
    CAPTURE(to_string(kind));
    CHECK(op->cols() == 40);
    CHECK(op->rows() == static_cast<std::size_t>(std::ceil(delta * 40)));
    const ComplexMatrix a = dense_matrix(*op);
    CHECK(oracle::orthonormality_error(a) < 1e-12);

    RandomStream rng(Seed{9});
    const ComplexVector x = sample_complex_gaussian(rng, 40, 1.0);
    const ComplexVector z = sample_complex_gaussian(rng, op->rows(), 1.0);
    CHECK((op->apply(x) - a * x).norm() < 1e-12 * x.norm() * 10);
    CHECK((op->apply_adjoint(z) - a.adjoint() * z).norm() < 1e-12 * z.norm() * 10);
    // <Ax, z> = <x, A^H z>
    CHECK(std::abs(op->apply(x).dot(z) - x.dot(op->apply_adjoint(z))) < 1e-10);
  }
}

TEST_CASE("CDP blocks are masked unitary DFTs") {
  const std::size_t n = 16, l = 3;
  const OperatorPtr op = make(SensingKind::kCdp, n, static_cast<double>(l));
  const ComplexMatrix a = dense_matrix(*op);
  const double m = static_cast<double>(n * l);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t b = 0; b < l; ++b) {
      const Complex base = a(static_cast<Eigen::Index>(b * n), static_cast<Eigen::Index>(j));
      CHECK(std::abs(std::abs(base) - 1.0 / std::sqrt(m)) < 1e-14);
      for (std::size_t k = 0; k < n; ++k) {
        const Complex v = a(static_cast<Eigen::Index>(b * n + k), static_cast<Eigen::Index>(j));
        CHECK(std::abs(v - base * twiddle(static_cast<double>(k), static_cast<double>(j),
                                          static_cast<double>(n))) < 1e-13);
      }
    }
  }
}

TEST_CASE("partial DFT columns are DFT columns at distinct frequencies") {
  const std::size_t n = 12;
  const OperatorPtr op = make(SensingKind::kPartialDft, n, 2.5);
  const ComplexMatrix a = dense_matrix(*op);
  const auto m = static_cast<double>(op->rows());
  std::set<long> freqs;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const Complex base = a(0, j);
    CHECK(std::abs(std::abs(base) - 1.0 / std::sqrt(m)) < 1e-14);
    // Recover the selected row index from the first step of the column.
    const double angle = std::arg(a(1, j) / base);
    long f = std::lround(-angle * m / (2.0 * std::numbers::pi));
    f = ((f % static_cast<long>(m)) + static_cast<long>(m)) % static_cast<long>(m);
    freqs.insert(f);
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      CHECK(std::abs(a(k, j) - base * twiddle(static_cast<double>(k), static_cast<double>(f), m)) <
            1e-13);
    }
  }
  CHECK(freqs.size() == n);
}

TEST_CASE("descriptors rebuild identical operators") {
  for (auto [kind, delta] : {std::pair{SensingKind::kHaar, 2.0}, std::pair{SensingKind::kCdp, 2.0},
                             std::pair{SensingKind::kPartialDft, 3.0}}) {
    const OperatorPtr op = make(kind, 32, delta, 77);
    const nlohmann::json j = to_json(op->descriptor());
    const OperatorPtr again = make_operator(descriptor_from_json(j));
    RandomStream rng(Seed{1});
    const ComplexVector x = sample_complex_gaussian(rng, 32, 1.0);
    CHECK((op->apply(x) - again->apply(x)).norm() == 0.0);
    CHECK(again->descriptor().m == op->rows());
  }
}

TEST_CASE("row counts and invalid ensembles") {
  SensingSpec s;
  s.kind = SensingKind::kPartialDft;
  s.n = 100;
  s.delta = 2.51;
  CHECK(resolve_rows(s) == 251);
  s.delta = 2.505;
  CHECK(resolve_rows(s) == 251);
  s.kind = SensingKind::kCdp;
  s.delta = 2.5;
  CHECK_THROWS_AS(resolve_rows(s), Error);
  s.delta = 4.0;
  CHECK(resolve_rows(s) == 400);
  s.kind = SensingKind::kHaar;
  s.n = 10;
  s.delta = 3.0;
  s.haar_row_cap = 20;
  CHECK_THROWS_AS(make_operator(s, RandomStream(Seed{1})), Error);
  CHECK_THROWS_AS(parse_sensing_kind("gaussian"), Error);
}

TEST_CASE("Haar QR factor has a positive real R diagonal") {
  RandomStream rng(Seed{4});
  ComplexMatrix g(30, 8);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = rng.complex_normal(1.0);
  const ComplexMatrix q = lapack::orthonormal_factor(g);
  CHECK(oracle::orthonormality_error(q) < 1e-13);
  const ComplexMatrix r = q.adjoint() * g;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    CHECK(r(i, i).real() > 0.0);
    CHECK(std::abs(r(i, i).imag()) < 1e-12);
    for (Eigen::Index j = 0; j < i; ++j) CHECK(std::abs(r(i, j)) < 1e-12);
  }
}

TEST_CASE("Haar columns are exchangeable") {
  // Under the Haar law every entry has E|A_ij|^2 = 1/m; averaged over seeds
  // the energy of any fixed row is close to n/m.
  const std::size_t n = 8, m = 24;
  double row0 = 0.0;
  const int reps = 400;
  for (int r = 0; r < reps; ++r) {
    const OperatorPtr op = build_haar(m, n, RandomStream(Seed{static_cast<std::uint64_t>(r + 1)}));
    row0 += dense_matrix(*op).row(0).squaredNorm();
  }
  CHECK(std::abs(row0 / reps - static_cast<double>(n) / m) < 0.03);
}
