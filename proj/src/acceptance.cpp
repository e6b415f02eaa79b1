#include "orthospec/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "orthospec/asymptotics.hpp"
#include "orthospec/config.hpp"
#include "orthospec/experiment.hpp"
#include "orthospec/pcaep.hpp"
#include "orthospec/spectral.hpp"
#include "orthospec/spectrum.hpp"

namespace orthospec {

namespace {

// Collects measured quantities for one criterion.
class Checker {
 public:
  Checker(CriterionResult& r, std::ostream* log) : r_(r), log_(log) {}

  // Records "what: value (limit)" and folds ok into the verdict.
  void expect(bool ok, const std::string& what) {
    if (!ok) failed_ = true;
    note(std::string(ok ? "  ok   " : "  FAIL ") + what);
  }

  void note(const std::string& line) {
    r_.details.push_back(line);
    if (log_) *log_ << line << '\n' << std::flush;
  }

  bool failed() const { return failed_; }

 private:
  CriterionResult& r_;
  std::ostream* log_;
  bool failed_ = false;
};

std::string fmt(const char* pattern, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

std::string fmt(const char* pattern, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b);
  return buf;
}

std::string fmt(const char* pattern, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

ProcessingSpec kind_spec(ProcessingKind k) {
  ProcessingSpec s;
  s.kind = k;
  return s;
}

ProcessingSpec trim2() { return parse_func("trim:c2=2"); }
ProcessingSpec subset(double c1) {
  ProcessingSpec s = kind_spec(ProcessingKind::kSubset);
  s.c1 = c1;
  return s;
}

void ac1(Checker& c) {
  const ProcessingSpec star = kind_spec(ProcessingKind::kStar);
  const ThresholdResult th = delta_threshold(star, 50.0);
  c.expect(th.found && th.delta >= 1.999 && th.delta <= 2.001,
           fmt("delta_threshold(star) = %.9f in [1.999, 2.001]", th.delta));
  const double below = predict(star, 1.9).rho_sq;
  c.expect(below == 0.0, fmt("rho_sq(star, 1.9) = %.3g == 0", below));
  const double above = predict(star, 2.1).rho_sq;
  c.expect(above > 0.0, fmt("rho_sq(star, 2.1) = %.6f > 0", above));
}

void ac2(Checker& c) {
  const ProcessingSpec alt = kind_spec(ProcessingKind::kAltWeak);
  for (double d : {3.0, 4.0, 6.0}) {
    const AsymptoticPrediction p = predict(alt, d);
    const double mu = p.mu_hat.value_or(std::nan(""));
    c.expect(std::abs(mu - 1.0) <= 1e-6, fmt("delta=%g: mu_hat = %.12f, |mu_hat - 1| <= 1e-6", d, mu));
    const double formula = (d * d - 2.0 * d) / (d * d - 2.0);
    c.expect(std::abs(p.rho_sq - formula) <= 1e-6,
             fmt("delta=%g: rho_sq = %.10f vs (d^2-2d)/(d^2-2) = %.10f, tol 1e-6", d, p.rho_sq,
                 formula));
  }
}

void ac3(Checker& c) {
  for (double d : {2.5, 3.0, 4.0, 5.0}) {
    const AsymptoticPrediction star = predict(kind_spec(ProcessingKind::kStar), d);
    if (!star.mu_hat) {
      c.expect(false, fmt("delta=%g: star has no mu_hat", d));
      continue;
    }
    const double closed = rho_star_closed_form(*star.mu_hat, d);
    c.expect(std::abs(star.rho_sq - closed) <= 1e-8,
             fmt("delta=%g: general %.12f vs closed form %.12f, tol 1e-8", d, star.rho_sq, closed));
    struct Named {
      const char* name;
      ProcessingSpec spec;
    };
    for (const Named& n : {Named{"trim c2=2", trim2()}, Named{"subset c1=1.5", subset(1.5)},
                           Named{"subset c1=2", subset(2.0)},
                           Named{"mm", kind_spec(ProcessingKind::kMM)}}) {
      const double r = predict(n.spec, d).rho_sq;
      c.expect(r <= star.rho_sq + 1e-9,
               std::string(n.name) + fmt(" at delta=%g: %.10f <= star %.10f + 1e-9", d, r,
                                         star.rho_sq));
    }
  }
}

bool discontinuous(const std::string& func) {
  const ProcessingKind k = parse_func(func).kind;
  return k == ProcessingKind::kTrim || k == ProcessingKind::kSubset;
}

void ac4(Checker& c) {
  SweepConfig limits;
  const QuadratureSpec q;
  auto judge = [&](const SweepOutput& out, const char* label) {
    for (const SweepRow& r : out.rows) {
      const double tol = discontinuous(r.func) ? 0.05 : 0.03;
      const double diff = std::abs(r.p2_mean - r.p2_pred);
      std::ostringstream os;
      os << label << ' ' << r.func << " delta=" << r.delta_nominal;
      os << fmt(": mean P2 %.4f (sd %.4f) vs pred %.4f", r.p2_mean, r.p2_std, r.p2_pred);
      os << fmt(", |diff| %.4f <= %.2f", diff, tol);
      os << " [" << r.trials << " trials, " << r.converged << " converged";
      if (r.failures) os << ", " << r.failures << " FAILED";
      os << ']';
      c.expect(r.failures == 0 && diff <= tol, os.str());
    }
  };

  std::vector<SweepCell> pdft;
  for (const char* f : {"trim:c2=2", "subset:c1=1.5", "mm", "star_reg"}) {
    for (double d : {2.5, 3.0, 4.0, 5.0}) pdft.push_back({"partial_dft", f, d});
  }
  judge(run_sweep(pdft, 2048, 10, 1, limits, q), "partial_dft n=2048");

  const std::vector<SweepCell> haar{
      {"haar", "mm", 3.0}, {"haar", "subset:c1=1.5", 4.0}, {"haar", "trim:c2=2", 5.0}};
  judge(run_sweep(haar, 1024, 10, 1, limits, q), "haar n=1024");

  const std::vector<SweepCell> cdp{
      {"cdp", "star_reg", 3.0}, {"cdp", "mm", 4.0}, {"cdp", "subset:c1=1.5", 5.0}};
  judge(run_sweep(cdp, 2048, 10, 1, limits, q), "cdp n=2048");
}

void ac5(Checker& c) {
  TrackedSpec spec;
  spec.sensing.kind = SensingKind::kPartialDft;
  spec.sensing.n = 16384;
  spec.sensing.delta = 3.0;
  spec.func = kind_spec(ProcessingKind::kStarRegularized);
  spec.alpha0 = 0.2;
  spec.sigma0 = 1.0;
  spec.t_max = 20;
  constexpr int kSeeds = 5;
  std::vector<TrackedRun> runs;
  for (int k = 1; k <= kSeeds; ++k) runs.push_back(run_tracked(spec, Seed{static_cast<std::uint64_t>(k)}));
  c.note(fmt("  mu_hat = %.10f", runs.front().mu));

  const std::size_t len = runs.front().records.size();
  std::vector<double> p2(len, 0.0);
  std::vector<double> wc(len, 0.0);
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < len; ++t) {
      p2[t] += r.records[t].p2_emp / kSeeds;
      wc[t] += r.records[t].wcorr_emp / kSeeds;
    }
  }
  const auto& se = runs.front().records;
  double worst_p2 = 0.0;
  for (std::size_t t = 0; t <= 10; ++t) {
    const double diff = std::abs(p2[t] - se[t].p2_se);
    worst_p2 = std::max(worst_p2, diff);
    c.expect(diff <= 0.02, fmt("t=%g: P2 empirical %.4f vs SE %.4f, tol 0.02",
                               static_cast<double>(t), p2[t], se[t].p2_se));
  }
  double worst_w = 0.0;
  for (std::size_t t = 0; t + 1 < len; ++t) {
    worst_w = std::max(worst_w, std::abs(wc[t] - se[t].wcorr_se));
  }
  c.expect(worst_w <= 0.03, fmt("noise correlation: max |empirical - predicted| over t<20 = %.4f <= 0.03",
                                worst_w));
  c.expect(wc[15] >= 0.95, fmt("noise correlation at t=15: %.4f >= 0.95", wc[15]));
}

void ac6(Checker& c) {
  constexpr int kSeeds = 5;
  SpectrumSpec mm;
  mm.sensing.kind = SensingKind::kHaar;
  mm.sensing.n = 288;
  mm.sensing.delta = 5.0;
  mm.func = kind_spec(ProcessingKind::kMM);
  mm.branch = Branch::kMax;
  double mean_top = 0.0;
  double worst_match = 0.0;
  for (int k = 1; k <= kSeeds; ++k) {
    const SpectrumReport r = analyze(mm, Seed{static_cast<std::uint64_t>(k)});
    if (r.status != "ok") {
      c.expect(false, "mm max branch not applicable: " + r.note);
      return;
    }
    c.expect(r.m <= 1500, fmt("seed %g: m = %g <= 1500", k, static_cast<double>(r.m)));
    c.note(fmt("  seed %g: |lambda_1(E)| = %.4f, lambda_1(D) = %.4f", k, std::abs(r.e_top),
               r.d_extreme) +
           fmt(", empirical Lambda = %.4f", r.lambda_pred));
    mean_top += std::abs(r.e_top) / kSeeds;
    worst_match = std::max(worst_match, r.top_match);
  }
  c.expect(std::abs(mean_top - 1.0) <= 0.05,
           fmt("mm: | mean |lambda_1(E(mu_hat))| - 1 | = %.4f <= 0.05", std::abs(mean_top - 1.0)));
  c.expect(worst_match <= 0.05,
           fmt("mm: max over seeds |lambda_1(D) - Lambda_empirical| = %.4f <= 0.05", worst_match));

  SpectrumSpec smm = mm;
  smm.func = kind_spec(ProcessingKind::kShiftedMM);
  smm.branch = Branch::kMin;
  smm.with_e = false;
  for (int k = 1; k <= kSeeds; ++k) {
    const SpectrumReport r = analyze(smm, Seed{static_cast<std::uint64_t>(k)});
    if (r.status != "ok") {
      c.expect(false, "shifted_mm min branch not applicable: " + r.note);
      return;
    }
    if (k == 1) {
      c.expect(std::abs(r.lambda_asym - 0.71) <= 0.05,
               fmt("shifted_mm: Lambda(mu_hat) = %.4f near 0.71 (mu_hat = %.4f)", r.lambda_asym,
                   r.mu));
    }
    c.expect(r.asym_match <= 0.05, fmt("seed %g: lambda_n(D) = %.4f vs Lambda(mu_hat), |diff| %.4f <= 0.05",
                                       k, r.d_extreme, r.asym_match));
  }
}

void ac7(Checker& c) {
  const double delta = 3.0;
  std::vector<ProcessingSpec> kinds{trim2(),
                                    subset(1.5),
                                    kind_spec(ProcessingKind::kMM),
                                    kind_spec(ProcessingKind::kStar),
                                    kind_spec(ProcessingKind::kStarRegularized),
                                    kind_spec(ProcessingKind::kAltWeak),
                                    kind_spec(ProcessingKind::kShiftedMM),
                                    parse_func("custom:knots=0/0,1/0.5,4/1")};
  constexpr int kGrid = 50;
  for (const ProcessingSpec& spec : kinds) {
    const ProcessingFunction f(spec, delta);
    bool psi31 = true;
    bool psi2_up = true;
    bool psi12 = true;
    double prev2 = -1.0;
    for (int k = 1; k <= kGrid; ++k) {
      const double mu = static_cast<double>(k) / (kGrid + 1);
      const PsiTriple p = psi(f, mu);
      if (p.psi3 < p.psi1 * (1.0 - 1e-12)) psi31 = false;
      if (!(p.psi2 > prev2)) psi2_up = false;
      if (spec.kind == ProcessingKind::kStar && !(p.psi1 > p.psi2)) psi12 = false;
      prev2 = p.psi2;
    }
    c.expect(psi31, f.name() + ": psi3 >= psi1 on the mu grid");
    c.expect(psi2_up, f.name() + ": psi2 strictly increasing on the mu grid");
    if (spec.kind == ProcessingKind::kStar) c.expect(psi12, "star: psi1 > psi2 on the mu grid");

    const double bar = mu_bar(f);
    bool f_up = true;
    bool lambda_down = true;
    double prev_f = -INFINITY;
    double prev_l = INFINITY;
    for (int k = 1; k <= kGrid; ++k) {
      const double mu = bar * static_cast<double>(k) / (kGrid + 1);
      const double fv = f_of_mu(f, mu);
      const double lv = lambda_of_mu(f, mu);
      if (!(fv > prev_f)) f_up = false;
      if (!(lv < prev_l)) lambda_down = false;
      prev_f = fv;
      prev_l = lv;
    }
    c.expect(f_up && lambda_down,
             f.name() + fmt(": F increasing and Lambda decreasing on (0, mu_bar = %.6f)", bar));

    if (f.delta_free()) {
      double spread = 0.0;
      for (int k = 1; k <= kGrid; k += 7) {
        const double mu = static_cast<double>(k) / (kGrid + 1);
        const PsiTriple ref = psi(f.at_delta(2.0), mu);
        for (double d : {3.0, 5.0}) {
          const PsiTriple p = psi(f.at_delta(d), mu);
          spread = std::max({spread, std::abs(p.psi1 - ref.psi1), std::abs(p.psi2 - ref.psi2),
                             std::abs(p.psi3 - ref.psi3)});
        }
      }
      c.expect(spread <= 1e-12, f.name() + fmt(": psi triple delta-free, spread %.2e <= 1e-12", spread));
    }

    const AsymptoticPrediction pred = rho_sq(f);
    if (pred.mu_hat && pred.positive_phase) {
      SEState s;
      s.alpha = 0.2;
      s.sigma_sq = 1.0;
      const SEState next = se_step(*pred.at_mu_hat, delta, s);
      const double drift = std::abs(next.alpha - s.alpha) / std::abs(s.alpha);
      c.expect(drift <= 1e-9, f.name() + fmt(": SE alpha drift at mu_hat %.2e <= 1e-9", drift));
    }
  }

  // Operator-level properties on every ensemble at small sizes.
  struct Ens {
    SensingKind kind;
    std::size_t n;
    double delta;
  };
  for (const Ens& e : {Ens{SensingKind::kHaar, 48, 3.0}, Ens{SensingKind::kCdp, 48, 3.0},
                       Ens{SensingKind::kPartialDft, 48, 2.5}, Ens{SensingKind::kHaar, 128, 2.0},
                       Ens{SensingKind::kPartialDft, 128, 3.0}}) {
    const RandomStream root(Seed{11});
    SensingSpec spec;
    spec.kind = e.kind;
    spec.n = e.n;
    spec.delta = e.delta;
    const OperatorPtr op = make_operator(spec, root.substream("sensing"));
    const std::string name = to_string(e.kind) + fmt(" n=%g m=%g", static_cast<double>(op->cols()),
                                                     static_cast<double>(op->rows()));
    RandomStream rng = root.substream("probe");
    double orth = 0.0;
    for (int k = 0; k < 5; ++k) {
      const ComplexVector x = sample_complex_gaussian(rng, op->cols(), 1.0);
      orth = std::max(orth, (op->apply_adjoint(op->apply(x)) - x).norm() / x.norm());
    }
    c.expect(orth <= 1e-10, name + fmt(": |A^H A x - x| / |x| = %.2e <= 1e-10", orth));

    const ComplexMatrix a = dense_matrix(*op);
    const double d = op->delta();
    const double trace_aa = a.squaredNorm();  // Tr(A A^H)
    const double m = static_cast<double>(op->rows());
    const double tr1 = std::abs(d * trace_aa - m) / m;
    c.expect(tr1 <= 1e-9, name + fmt(": (1/m) Tr(delta A A^H - I) = %.2e", tr1));

    RandomStream sig_rng = root.substream("signal");
    const SignalInstance signal = make_signal(op, sig_rng);
    const ProcessingFunction f(kind_spec(ProcessingKind::kMM), d);
    const auto mu_hat_mm = rho_sq(f).mu_hat;
    const EPContext ctx = make_ep_context(signal, f, mu_hat_mm.value_or(0.5));
    const double tr2 = std::abs((ctx.g.array() / ctx.g_bar - 1.0).sum()) / m;
    c.expect(tr2 <= 1e-9, name + fmt(": (1/m) Tr(G/G_bar - I) = %.2e", tr2));

    const WeightDiagonal w = build_weights(f, signal);
    const double d_err = (dense_D(*op, w).d - dense_D_direct(a, w.t_values)).cwiseAbs().maxCoeff();
    c.expect(d_err <= 1e-10, name + fmt(": apply_D probes vs dense A^H T A, max diff %.2e", d_err));

    const ComplexVector z = sample_complex_gaussian(rng, op->rows(), 1.0);
    const ComplexVector p = (ctx.g.array() / ctx.g_bar - 1.0).matrix().cwiseProduct(z);
    const ComplexVector dense_e = d * (a * (a.adjoint() * p)) - p;
    const double e_err = (ep_apply(ctx, z) - dense_e).norm() / z.norm();
    c.expect(e_err <= 1e-10, name + fmt(": ep_step vs dense (delta AA^H - I)(G/G_bar - I), rel %.2e", e_err));
  }
}

struct Criterion {
  const char* id;
  const char* title;
  double limit;
  void (*run)(Checker&);
};

constexpr Criterion kCriteria[] = {
    {"AC1", "weak threshold of star is 2", 10.0, ac1},
    {"AC2", "alt_weak closed form", 5.0, ac2},
    {"AC3", "star is optimal among shipped kinds", 30.0, ac3},
    {"AC4", "prediction vs simulation", 900.0, ac4},
    {"AC5", "state evolution tracking", 300.0, ac5},
    {"AC6", "eigen-structure of D and E", 180.0, ac6},
    {"AC7", "property suites", 120.0, ac7},
};

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> out;
  for (const Criterion& cr : kCriteria) {
    if (!opt.only.empty() && !opt.only.count(cr.id)) continue;
    CriterionResult r;
    r.id = cr.id;
    r.title = cr.title;
    r.limit_seconds = cr.limit;
    if (opt.log) *opt.log << "== " << cr.id << ' ' << cr.title << '\n' << std::flush;
    Checker c(r, opt.log);
    const auto t0 = std::chrono::steady_clock::now();
    bool threw = false;
    try {
      cr.run(c);
    } catch (const std::exception& e) {
      threw = true;
      c.note(std::string("  FAIL exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = r.seconds <= r.limit_seconds;
    if (!in_time) c.note(fmt("  FAIL runtime %.1f s exceeds %.0f s", r.seconds, r.limit_seconds));
    r.passed = !threw && !c.failed() && in_time;
    out.push_back(std::move(r));
  }
  return out;
}

std::string summary_line(const CriterionResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, " (%.1f s / %.0f s)", r.seconds, r.limit_seconds);
  return std::string(r.passed ? "PASS " : "FAIL ") + r.id + ' ' + r.title + buf;
}

}  // namespace orthospec
