#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "orthospec/error.hpp"
#include "orthospec/preprocessing.hpp"

using namespace orthospec;

namespace {

ProcessingFunction make(ProcessingKind kind, double delta) {
  ProcessingSpec s;
  s.kind = kind;
  return {s, delta};
}

}  // namespace

TEST_CASE("direct substitutions") {
  CHECK(make(ProcessingKind::kAltWeak, 3.0).of_s(1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(make(ProcessingKind::kStar, 3.0).eval_T(std::sqrt(2.0 / 3.0)) ==
        doctest::Approx(0.5).epsilon(1e-14));
  ProcessingSpec sub;
  sub.kind = ProcessingKind::kSubset;
  sub.c1 = 1.5;
  const ProcessingFunction f(sub, 2.0);
  CHECK(f.of_s(1.49) == 0.0);
  CHECK(f.of_s(1.51) == 1.0);
  CHECK(f.t_min() == 0.0);
}

TEST_CASE("normalized kinds match their written-out forms") {
  for (double delta : {2.0, 3.0, 5.0}) {
    ProcessingSpec trim;
    trim.kind = ProcessingKind::kTrim;
    trim.c2 = 2.0;
    ProcessingSpec reg;
    reg.kind = ProcessingKind::kStarRegularized;
    reg.kappa = 0.01;
    const ProcessingFunction ft(trim, delta), fr(reg, delta);
    const ProcessingFunction fm = make(ProcessingKind::kMM, delta);
    const ProcessingFunction fs = make(ProcessingKind::kStar, delta);
    const ProcessingFunction fa = make(ProcessingKind::kAltWeak, delta);
    const ProcessingFunction fsh = make(ProcessingKind::kShiftedMM, delta);
    for (double s : {1e-3, 0.2, 0.9, 1.7, 3.99, 4.01, 11.0}) {
      CAPTURE(delta);
      CAPTURE(s);
      CHECK(ft.of_s(s) == doctest::Approx(oracle::t_trim(s, 2.0)).epsilon(1e-14));
      CHECK(fr.of_s(s) == doctest::Approx(oracle::t_star_reg(s, 0.01)).epsilon(1e-14));
      CHECK(fm.of_s(s) == doctest::Approx(oracle::t_mm(s, delta)).epsilon(1e-14));
      CHECK(fs.of_s(s) == doctest::Approx(oracle::t_star(s)).epsilon(1e-14));
      if (delta >= 2.0 && s + delta - 2.0 > 0.0) {
        CHECK(fa.of_s(s) == doctest::Approx(oracle::t_alt_weak(s, delta)).epsilon(1e-14));
      }
      CHECK(fsh.of_s(s) == doctest::Approx(oracle::t_shifted_mm(s, delta)).epsilon(1e-14));
      // eval_T is the same function in y.
      CHECK(fm.eval_T(std::sqrt(s / delta)) == doctest::Approx(fm.of_s(s)).epsilon(1e-13));
    }
  }
}

TEST_CASE("normalization") {
  const Normalization half = normalization_for(0.5);
  CHECK(half.offset == 0.0);
  CHECK((half.offset + 0.5) / (half.offset + half.raw_sup) == 1.0);
  const Normalization neg = normalization_for(-2.0);
  CHECK(neg.offset == 3.0);
  CHECK((neg.offset - 2.0) / (neg.offset + neg.raw_sup) == 1.0);
  CHECK_THROWS_AS(normalization_for(INFINITY), Error);

  // Trim, c2 = 2: values are s/4 below the cut.
  ProcessingSpec trim;
  trim.kind = ProcessingKind::kTrim;
  trim.c2 = 2.0;
  const ProcessingFunction ft(trim, 3.0);
  CHECK(ft.normalization().raw_sup == 4.0);
  CHECK(ft.of_s(3.0) == 0.75);
  CHECK(ft.of_s(4.0) == 0.0);
  CHECK(ft.t_min() == 0.0);
}

TEST_CASE("sup of every normalized kind is one") {
  ProcessingSpec custom;
  custom.kind = ProcessingKind::kCustom;
  custom.table = {{0.0, -1.0}, {1.0, 0.5}, {4.0, 2.0}};
  for (const ProcessingFunction& f :
       {make(ProcessingKind::kMM, 4.0), make(ProcessingKind::kStar, 3.0),
        make(ProcessingKind::kAltWeak, 3.0), make(ProcessingKind::kShiftedMM, 5.0),
        ProcessingFunction(custom, 3.0), make(ProcessingKind::kTrim, 3.0),
        make(ProcessingKind::kStarRegularized, 3.0)}) {
    CAPTURE(f.name());
    const auto [lo, hi] = scan_range(f);
    CHECK(hi <= 1.0 + 1e-9);
    CHECK(hi >= 1.0 - 1e-3);
    CHECK(lo >= f.t_min() - 1e-12);
  }
}

TEST_CASE("lower bounds") {
  // MM at delta=4: raw inf 1 - 2/1 = -1 at s = 0, sup 1 so no rescaling.
  const ProcessingFunction mm = make(ProcessingKind::kMM, 4.0);
  CHECK(mm.t_min() == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(mm.of_s(0.0) == doctest::Approx(-1.0).epsilon(1e-15));
  // ShiftedMM at delta=5: 2 / (2 + sqrt5/(sqrt5-1)).
  const ProcessingFunction sh = make(ProcessingKind::kShiftedMM, 5.0);
  const double r5 = std::sqrt(5.0);
  CHECK(sh.t_min() == doctest::Approx(2.0 / (2.0 + r5 / (r5 - 1.0))).epsilon(1e-14));
  CHECK(sh.t_min() == doctest::Approx(0.525070).epsilon(1e-6));
  CHECK_FALSE(make(ProcessingKind::kStar, 3.0).bounded_below());
  CHECK(make(ProcessingKind::kStarRegularized, 3.0).bounded_below());
}

TEST_CASE("delta-free kinds depend on y only through delta*y^2") {
  for (ProcessingKind kind : {ProcessingKind::kTrim, ProcessingKind::kSubset, ProcessingKind::kStar,
                              ProcessingKind::kStarRegularized}) {
    const ProcessingFunction a = make(kind, 2.0);
    CHECK(a.delta_free());
    const ProcessingFunction b = a.at_delta(4.5);
    for (double s : {0.3, 1.2, 2.6, 7.0}) {
      CHECK(a.eval_T(std::sqrt(s / 2.0)) == doctest::Approx(b.eval_T(std::sqrt(s / 4.5))).epsilon(1e-13));
    }
  }
  CHECK_FALSE(make(ProcessingKind::kMM, 3.0).delta_free());
  // MM really changes with delta at fixed s.
  CHECK(make(ProcessingKind::kMM, 2.0).of_s(1.0) != make(ProcessingKind::kMM, 5.0).of_s(1.0));
}

TEST_CASE("G and its singularities") {
  const ProcessingFunction f = make(ProcessingKind::kMM, 3.0);
  const double y = 0.7, mu = 0.8;
  CHECK(f.eval_G(y, mu) == doctest::Approx(1.0 / (1.0 / mu - f.eval_T(y))).epsilon(1e-14));
  // mu with 1/mu = T(y) exactly.
  const double t = f.eval_T(y);
  try {
    (void)f.eval_G(y, 1.0 / t);
    FAIL("expected a singularity");
  } catch (const SingularityError& e) {
    CHECK(e.code() == ErrorCode::kSingularity);
    CHECK(e.y() == doctest::Approx(y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(f.eval_G(-1.0, 0.5), Error);
  CHECK_THROWS_AS(f.eval_G(1.0, 0.0), Error);
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(make(ProcessingKind::kAltWeak, 1.9), Error);
  CHECK_NOTHROW(make(ProcessingKind::kAltWeak, 2.0));
  CHECK_THROWS_AS(make(ProcessingKind::kMM, 1.0), Error);
  ProcessingSpec bad;
  bad.kind = ProcessingKind::kCustom;
  bad.table = {{1.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(ProcessingFunction(bad, 2.0), Error);
  bad.table = {{0.0, 0.0}};
  CHECK_THROWS_AS(ProcessingFunction(bad, 2.0), Error);
  CHECK_THROWS_AS(parse_processing_kind("nope"), Error);
  CHECK(parse_processing_kind("shifted_mm") == ProcessingKind::kShiftedMM);
}

TEST_CASE("custom tables interpolate linearly and clamp") {
  ProcessingSpec c;
  c.kind = ProcessingKind::kCustom;
  c.table = {{0.0, 0.0}, {1.0, 0.5}, {4.0, 1.0}};
  const ProcessingFunction f(c, 3.0);
  CHECK(f.of_s(0.5) == doctest::Approx(0.25));
  CHECK(f.of_s(2.5) == doctest::Approx(0.75));
  CHECK(f.of_s(100.0) == 1.0);
  CHECK(f.sup_plateau());
  CHECK(f.breakpoints() == std::vector<double>{1.0, 4.0});
}

TEST_CASE("breakpoints of discontinuous kinds") {
  ProcessingSpec trim;
  trim.kind = ProcessingKind::kTrim;
  trim.c2 = 1.5;
  CHECK(ProcessingFunction(trim, 3.0).breakpoints() == std::vector<double>{2.25});
  ProcessingSpec sub;
  sub.kind = ProcessingKind::kSubset;
  sub.c1 = 2.0;
  CHECK(ProcessingFunction(sub, 3.0).breakpoints() == std::vector<double>{2.0});
  CHECK(make(ProcessingKind::kMM, 3.0).breakpoints().empty());
}
