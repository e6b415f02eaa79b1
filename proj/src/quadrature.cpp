#include "orthospec/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "orthospec/error.hpp"

namespace orthospec {

ExpRule gauss_legendre(std::size_t n) {
  require(n >= 1, ErrorCode::kInvalidParameter, "Gauss-Legendre needs n >= 1");
  ExpRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 2.0);
  if (n == 1) return r;
  const double dn = static_cast<double>(n);
  // P_n(x) and P_n'(x) by the three-term recurrence.
  auto legendre = [n](double x, double& p, double& dp) {
    double p0 = 1.0;
    double p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double dk = static_cast<double>(k);
      const double p2 = ((2.0 * dk - 1.0) * x * p1 - (dk - 1.0) * p0) / dk;
      p0 = p1;
      p1 = p2;
    }
    p = p1;
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  };
  for (std::size_t i = 0; i < n / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double p = 0.0;
    double dp = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre(x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre(x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    double p = 0.0;
    double dp = 1.0;
    legendre(0.0, p, dp);
    r.weights[n / 2] = 2.0 / (dp * dp);
  }
  return r;
}

ExpRule gauss_laguerre(std::size_t n) {
  require(n >= 1, ErrorCode::kInvalidParameter, "Gauss-Laguerre needs n >= 1");
  // Jacobi matrix of the monic Laguerre recurrence: diagonal 2k+1, off-diagonal k.
  Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(n > 1 ? n - 1 : 0));
  for (std::size_t k = 0; k < n; ++k) diag[static_cast<Eigen::Index>(k)] = 2.0 * static_cast<double>(k) + 1.0;
  for (std::size_t k = 1; k < n; ++k) sub[static_cast<Eigen::Index>(k - 1)] = static_cast<double>(k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  require(es.info() == Eigen::Success, ErrorCode::kNumeric, "Gauss-Laguerre eigensolve failed");
  ExpRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    r.nodes[i] = es.eigenvalues()[ii];
    const double v0 = es.eigenvectors()(0, ii);
    r.weights[i] = v0 * v0;
  }
  return r;
}

namespace {

// Panel edges on [a, b], graded geometrically toward both ends and capped in width.
std::vector<double> graded_edges(double a, double b) {
  constexpr double kRatio = 0.2;
  constexpr double kMaxWidth = 2.0;
  const double mid = 0.5 * (a + b);
  const double half = mid - a;
  const double smallest = 1e-14 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  std::vector<double> edges{a};
  std::vector<double> toward_a;
  for (double w = half * kRatio; w > smallest; w *= kRatio) toward_a.push_back(a + w);
  std::reverse(toward_a.begin(), toward_a.end());
  edges.insert(edges.end(), toward_a.begin(), toward_a.end());
  // Uniform middle stretch between the graded ends.
  const double lo = a + half * kRatio;
  const double hi = b - half * kRatio;
  const auto pieces = static_cast<int>(std::ceil((hi - lo) / kMaxWidth));
  for (int k = 1; k < pieces; ++k) edges.push_back(lo + (hi - lo) * k / pieces);
  std::vector<double> toward_b;
  for (double w = half * kRatio; w > smallest; w *= kRatio) toward_b.push_back(b - w);
  edges.insert(edges.end(), toward_b.begin(), toward_b.end());
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

ExpRule exp_rule(const QuadratureSpec& spec, std::span<const double> breakpoints) {
  if (spec.scheme == QuadratureScheme::kLaguerre) return gauss_laguerre(spec.node_count);

  require(spec.cutoff > 0.0 && spec.panel_order >= 2, ErrorCode::kInvalidParameter,
          "composite rule needs cutoff > 0 and panel order >= 2");
  std::vector<double> cuts{0.0};
  for (double b : breakpoints) {
    if (b > 0.0 && b < spec.cutoff) cuts.push_back(b);
  }
  cuts.push_back(spec.cutoff);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const ExpRule gl = gauss_legendre(spec.panel_order);
  ExpRule r;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const auto edges = graded_edges(cuts[c], cuts[c + 1]);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double lo = edges[e];
      const double hi = edges[e + 1];
      const double half = 0.5 * (hi - lo);
      const double centre = 0.5 * (hi + lo);
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double s = centre + half * gl.nodes[i];
        r.nodes.push_back(s);
        r.weights.push_back(half * gl.weights[i] * std::exp(-s));
      }
    }
  }
  // Tail: E[f; s > L] = e^{-L} E[f(L + t)], t ~ Exp(1).
  const ExpRule lag = gauss_laguerre(40);
  const double scale = std::exp(-spec.cutoff);
  for (std::size_t i = 0; i < lag.nodes.size(); ++i) {
    r.nodes.push_back(spec.cutoff + lag.nodes[i]);
    r.weights.push_back(scale * lag.weights[i]);
  }
  return r;
}

kernels::MomentSums exp_moments(const ExpRule& rule, const std::function<double(double)>& g) {
  return kernels::parallel::exp_moments(rule.nodes, rule.weights, g);
}

MonteCarloMoments mc_moments(const std::function<double(double)>& g, std::size_t samples,
                             RandomStream& rng) {
  constexpr std::size_t kBatches = 100;
  require(samples >= kBatches, ErrorCode::kInvalidParameter,
          "Monte Carlo needs at least 100 samples");
  const std::size_t per_batch = samples / kBatches;
  std::vector<double> s(per_batch * kBatches);
  for (double& v : s) v = -std::log(rng.uniform());

  std::vector<kernels::MomentSums> batch(kBatches);
  const std::span<const double> all(s);
  for (std::size_t b = 0; b < kBatches; ++b) {
    batch[b] = kernels::parallel::exp_moments(all.subspan(b * per_batch, per_batch), {}, g);
  }
  auto field_stats = [&](double kernels::MomentSums::*field, double& mean, double& se) {
    double sum = 0.0;
    for (const auto& m : batch) sum += m.*field / static_cast<double>(per_batch);
    mean = sum / kBatches;
    double var = 0.0;
    for (const auto& m : batch) {
      const double d = m.*field / static_cast<double>(per_batch) - mean;
      var += d * d;
    }
    se = std::sqrt(var / (kBatches - 1) / kBatches);
  };
  MonteCarloMoments out;
  for (auto field : {&kernels::MomentSums::weight, &kernels::MomentSums::g, &kernels::MomentSums::sg,
                     &kernels::MomentSums::g2, &kernels::MomentSums::sg2}) {
    field_stats(field, out.mean.*field, out.std_error.*field);
  }
  return out;
}

}  // namespace orthospec
