#include "orthospec/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <tuple>

#include "orthospec/error.hpp"

namespace orthospec {

namespace {

using RuleKey = std::tuple<int, std::size_t, std::size_t, double, std::vector<double>>;

// Rules depend only on the scheme and the breakpoints; building one costs more
// than the integral itself.
std::shared_ptr<const ExpRule> cached_rule(const QuadratureSpec& q, std::vector<double> breaks) {
  static std::mutex mutex;
  static std::map<RuleKey, std::shared_ptr<const ExpRule>> cache;
  RuleKey key{static_cast<int>(q.scheme), q.node_count, q.panel_order, q.cutoff, std::move(breaks)};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const ExpRule>(exp_rule(q, std::get<4>(key)));
  cache.emplace(std::move(key), rule);
  return rule;
}

void check_against_mc(const kernels::MomentSums& quad, const std::function<double(double)>& g,
                      const QuadratureSpec& q) {
  RandomStream rng(Seed{q.mc_seed});
  const MonteCarloMoments mc = mc_moments(g, q.mc_samples, rng);
  for (auto field : {&kernels::MomentSums::g, &kernels::MomentSums::sg, &kernels::MomentSums::g2,
                     &kernels::MomentSums::sg2}) {
    const double diff = std::abs(quad.*field - mc.mean.*field);
    const double tol = std::max(10.0 * q.abs_tol, 5.0 * mc.std_error.*field);
    if (diff > tol) {
      std::ostringstream os;
      os << "quadrature and Monte Carlo disagree: " << quad.*field << " vs " << mc.mean.*field
         << " (tolerance " << tol << ")";
      fail(ErrorCode::kAccuracy, os.str());
    }
  }
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol,
              const char* what) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (!(flo < 0.0 && fhi >= 0.0) && !(flo > 0.0 && fhi <= 0.0)) {
    std::ostringstream os;
    os << what << ": no sign change on [" << lo << ", " << hi << "] (f=" << flo << ", " << fhi
       << ")";
    fail(ErrorCode::kNumeric, os.str());
  }
  for (int iter = 0; iter < 200 && hi - lo > tol; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0) && fm != 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

constexpr double kMuLow = 1e-8;
constexpr double kMuHigh = 1.0 - 1e-12;

}  // namespace

PsiTriple psi_at_inverse(const ProcessingFunction& f, double inv_mu, const QuadratureSpec& q) {
  require(std::isfinite(inv_mu) && (inv_mu >= 1.0 || inv_mu < f.t_min()),
          ErrorCode::kInvalidParameter,
          "psi needs mu in (0, 1] or 1/mu < t_min; got 1/mu=" + std::to_string(inv_mu));
  auto rule = cached_rule(q, f.breakpoints());
  if (std::abs(inv_mu - 1.0) <= 1e-14 && f.sup_attained()) {
    if (!f.sup_plateau()) {
      throw SingularityError(std::numeric_limits<double>::quiet_NaN(), 1.0 / inv_mu,
                             f.name() + " reaches sup T = 1, so G is not integrable at mu = 1");
    }
    // G = 1/(1 - T) is infinite exactly on the plateau {T = 1}; the psi
    // functions are ratios, so their mu -> 1 limits only see that set.
    const kernels::MomentSums m = exp_moments(*rule, [&f](double s) {
      return f.of_s(s) >= 1.0 - 1e-15 ? 1.0 : 0.0;
    });
    PsiTriple p;
    p.mu = 1.0;
    p.delta = f.delta();
    p.mean_g = std::numeric_limits<double>::infinity();
    p.mean_sg = std::numeric_limits<double>::infinity();
    p.psi1 = m.sg / m.g;
    p.psi2 = 1.0 / m.g;
    p.psi3 = std::sqrt(m.sg) / m.g;
    return p;
  }
  const std::function<double(double)> g = [&f, inv_mu](double s) { return f.g_of_s(s, inv_mu); };
  const kernels::MomentSums m = exp_moments(*rule, g);
  if (q.mc_samples > 0) check_against_mc(m, g, q);

  PsiTriple p;
  p.mu = 1.0 / inv_mu;
  p.delta = f.delta();
  p.mean_g = m.g;
  p.mean_sg = m.sg;
  p.psi1 = m.sg / m.g;
  p.psi2 = m.g2 / (m.g * m.g);
  p.psi3 = std::sqrt(m.sg2) / m.g;
  return p;
}

PsiTriple psi(const ProcessingFunction& f, double mu, const QuadratureSpec& q) {
  require(mu != 0.0 && std::isfinite(mu), ErrorCode::kInvalidParameter, "psi needs mu != 0");
  return psi_at_inverse(f, 1.0 / mu, q);
}

double lambda_at_inverse(const ProcessingFunction& f, double inv_mu, const QuadratureSpec& q) {
  const PsiTriple p = psi_at_inverse(f, inv_mu, q);
  return inv_mu - ((f.delta() - 1.0) / f.delta()) / p.mean_g;
}

double lambda_of_mu(const ProcessingFunction& f, double mu, const QuadratureSpec& q) {
  return lambda_at_inverse(f, 1.0 / mu, q);
}

double f_of_mu(const ProcessingFunction& f, double mu, const QuadratureSpec& q) {
  const PsiTriple p = psi(f, mu, q);
  return 1.0 / mu - 1.0 / p.mean_sg;
}

double mu_bar(const ProcessingFunction& f, const QuadratureSpec& q) {
  const double level = fixed_point_level(f.delta());
  const double psi2_at_one =
      f.sup_attained() && !f.sup_plateau() ? std::numeric_limits<double>::infinity()
                                           : psi(f, 1.0, q).psi2;
  if (psi2_at_one <= level) return 1.0;
  return bisect([&](double mu) { return psi(f, mu, q).psi2 - level; }, kMuLow, kMuHigh, 1e-10,
                "mu_bar");
}

namespace {

std::optional<double> mu_hat_given_bar(const ProcessingFunction& f, double bar,
                                       const QuadratureSpec& q, bool& boundary) {
  const double level = fixed_point_level(f.delta());
  const double at_bar = psi(f, bar, q).psi1 - level;
  boundary = std::abs(at_bar) <= kBoundaryTol;
  if (boundary) return bar;
  if (at_bar < 0.0) return std::nullopt;
  return bisect([&](double mu) { return psi(f, mu, q).psi1 - level; }, kMuLow, bar, 1e-10,
                "mu_hat");
}

}  // namespace

std::optional<double> mu_hat(const ProcessingFunction& f, const QuadratureSpec& q) {
  bool boundary = false;
  return mu_hat_given_bar(f, mu_bar(f, q), q, boundary);
}

std::optional<double> mu_hat_min_branch(const ProcessingFunction& f, const QuadratureSpec& q) {
  if (!f.bounded_below()) return std::nullopt;
  const double level = fixed_point_level(f.delta());
  const double t_min = f.t_min();
  const double scale = std::max(1.0, std::abs(t_min));
  const double u_hi = t_min - 1e-12 * scale;
  const double u_lo = t_min - 1e6 * scale;
  auto h = [&](double u) { return psi_at_inverse(f, u, q).psi1 - level; };
  if (h(u_hi) <= 0.0 || h(u_lo) >= 0.0) return std::nullopt;
  const double u = bisect(h, u_lo, u_hi, 1e-12 * scale, "mu_hat (min branch)");
  if (psi_at_inverse(f, u, q).psi2 >= level) return std::nullopt;
  return 1.0 / u;
}

AsymptoticPrediction rho_sq(const ProcessingFunction& f, const QuadratureSpec& q) {
  AsymptoticPrediction out;
  out.delta = f.delta();
  out.mu_bar = mu_bar(f, q);
  out.lambda_at_mu_hat = std::numeric_limits<double>::quiet_NaN();
  bool boundary = false;
  out.mu_hat = mu_hat_given_bar(f, out.mu_bar, q, boundary);
  out.boundary = boundary;
  if (!out.mu_hat) return out;

  const double k = fixed_point_level(f.delta());
  const PsiTriple p = psi(f, *out.mu_hat, q);
  out.at_mu_hat = p;
  out.lambda_at_mu_hat = 1.0 / p.mu - ((f.delta() - 1.0) / f.delta()) / p.mean_g;
  out.positive_phase = p.psi2 < k && !(boundary && p.psi2 >= k - kBoundaryTol);
  if (boundary) out.note = "psi1(mu_bar) is on the phase boundary";
  if (!out.positive_phase) return out;

  const double psi3_sq = p.psi3 * p.psi3;
  const double den_rho = psi3_sq - k * p.psi2;
  const double den_theta = psi3_sq - k * k;
  if (std::abs(den_rho) <= 1e-12 || std::abs(den_theta) <= 1e-12) {
    fail(ErrorCode::kDegenerate, "rho_sq: vanishing denominator at mu_hat=" +
                                     std::to_string(p.mu));
  }
  out.rho_sq = (k * k - k * p.psi2) / den_rho;
  out.theta_sq = (k - p.psi2) / den_theta;
  const double implied = ((f.delta() - 1.0) / f.delta()) * out.rho_sq / (1.0 - out.rho_sq);
  if (std::abs(implied - out.theta_sq) > 1e-9 * std::max(1.0, out.theta_sq)) {
    fail(ErrorCode::kAccuracy, "theta_sq is inconsistent with rho_sq");
  }
  return out;
}

AsymptoticPrediction predict(const ProcessingSpec& spec, double delta, const QuadratureSpec& q) {
  if (spec.kind == ProcessingKind::kAltWeak && delta < 2.0) {
    AsymptoticPrediction out;
    out.delta = delta;
    out.lambda_at_mu_hat = std::numeric_limits<double>::quiet_NaN();
    out.note = "alt_weak is unbounded above for delta < 2";
    return out;
  }
  return rho_sq(ProcessingFunction(spec, delta), q);
}

std::optional<double> mu_diamond(const ProcessingFunction& f, const QuadratureSpec& q) {
  constexpr int kGrid = 100;
  const double top = f.sup_attained() && !f.sup_plateau() ? 1.0 - 1e-9 : 1.0;
  auto d = [&](double mu) {
    const PsiTriple p = psi(f, mu, q);
    return p.psi1 - p.psi2;
  };
  double prev_mu = 0.0;
  bool seen_positive = false;
  for (int j = 1; j <= kGrid; ++j) {
    const double mu = j == kGrid ? top : top * j / kGrid;
    const double v = d(mu);
    if (v > kBoundaryTol) {
      seen_positive = true;
    } else if (seen_positive) {
      if (std::abs(v) <= kBoundaryTol) return mu;
      return bisect(d, prev_mu, mu, 1e-10, "mu_diamond");
    } else if (j == 1) {
      return std::nullopt;  // psi1 <= psi2 from the start: no nonzero crossing
    }
    prev_mu = mu;
  }
  // psi1 > psi2 on all of (0, 1): the threshold is set at mu = 1.
  return seen_positive ? std::optional<double>(top) : std::nullopt;
}

ThresholdResult delta_threshold(const ProcessingSpec& spec, double delta_max,
                                const QuadratureSpec& q) {
  require(delta_max > 1.0, ErrorCode::kInvalidParameter, "delta_threshold needs delta_max > 1");
  ThresholdResult out;
  auto positive = [&](double delta) { return predict(spec, delta, q).positive_phase; };
  double lo = 1.0 + 1e-3;
  double hi = delta_max;
  if (positive(lo)) {
    out.delta = lo;
    out.found = true;
  } else if (!positive(hi)) {
    out.delta = delta_max;
    out.found = false;
  } else {
    while (hi - lo > 1e-6) {
      const double mid = 0.5 * (lo + hi);
      (positive(mid) ? hi : lo) = mid;
    }
    out.delta = hi;
    out.found = true;
  }

  const ProcessingFunction probe(spec, std::max(2.0, 1.0 + 1e-3));
  if (probe.delta_free()) {
    out.mu_diamond = mu_diamond(probe, q);
    if (out.mu_diamond) {
      const double p1 = psi(probe, *out.mu_diamond, q).psi1;
      if (p1 > 1.0) out.delta_from_crossing = p1 / (p1 - 1.0);
    }
    const bool crossing_in_range = out.delta_from_crossing && *out.delta_from_crossing <= delta_max;
    if (crossing_in_range != out.found ||
        (out.found && std::abs(*out.delta_from_crossing - out.delta) > 1e-3)) {
      std::ostringstream os;
      os << "threshold by bisection (" << (out.found ? std::to_string(out.delta) : "none")
         << ") disagrees with the psi1 = psi2 crossing ("
         << (out.delta_from_crossing ? std::to_string(*out.delta_from_crossing) : "none") << ")";
      fail(ErrorCode::kAccuracy, os.str());
    }
  }
  return out;
}

std::vector<std::pair<double, double>> rho_star_curve(std::span<const double> delta_grid,
                                                     const QuadratureSpec& q) {
  ProcessingSpec star;
  star.kind = ProcessingKind::kStar;
  std::vector<std::pair<double, double>> out;
  out.reserve(delta_grid.size());
  for (double delta : delta_grid) out.emplace_back(delta, predict(star, delta, q).rho_sq);
  return out;
}

}  // namespace orthospec
