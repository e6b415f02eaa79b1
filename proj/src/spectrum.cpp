#include "orthospec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lapack.hpp"
#include "orthospec/error.hpp"
#include "orthospec/kernels.hpp"

namespace orthospec {

namespace {

void check_cap(std::size_t size, std::size_t cap, const char* what) {
  if (size > cap) {
    std::ostringstream os;
    os << what << ": size " << size << " exceeds the dense cap " << cap;
    fail(ErrorCode::kCapExceeded, os.str());
  }
}

ComplexVector basis(std::size_t size, std::size_t j) {
  ComplexVector e = ComplexVector::Zero(static_cast<Eigen::Index>(size));
  e[static_cast<Eigen::Index>(j)] = 1.0;
  return e;
}

double max_asymmetry(const ComplexMatrix& a) { return (a - a.adjoint()).cwiseAbs().maxCoeff(); }

}  // namespace

DenseD dense_D(const SensingOperator& op, const WeightDiagonal& w, std::size_t cap) {
  const std::size_t n = op.cols();
  check_cap(n, cap, "dense_D");
  const ComplexMatrix raw = kernels::parallel::build_columns(
      n, n, [&](std::size_t j) { return apply_D(op, w, basis(n, j)); });
  DenseD out;
  out.asymmetry = max_asymmetry(raw);
  if (out.asymmetry > 1e-8) {
    fail(ErrorCode::kNumeric,
         "dense_D is not Hermitian (asymmetry " + std::to_string(out.asymmetry) + ")");
  }
  out.d = 0.5 * (raw + raw.adjoint());
  return out;
}

ComplexMatrix dense_E(const EPContext& ctx, std::size_t cap) {
  const auto m = static_cast<std::size_t>(ctx.g.size());
  check_cap(m, cap, "dense_E");
  return kernels::parallel::build_columns(m, m,
                                          [&](std::size_t j) { return ep_apply(ctx, basis(m, j)); });
}

RealVector eig_hermitian(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), ErrorCode::kInvalidParameter, "eig_hermitian needs a square matrix");
  if (a.size() == 0) return RealVector();
  const double asym = max_asymmetry(a);
  if (asym > 1e-8) {
    fail(ErrorCode::kInvalidParameter,
         "eig_hermitian: input is not Hermitian (asymmetry " + std::to_string(asym) + ")");
  }
  return lapack::hermitian_eigenvalues(a);
}

ComplexVector eig_general(const ComplexMatrix& a) {
  require(a.rows() == a.cols(), ErrorCode::kInvalidParameter, "eig_general needs a square matrix");
  if (a.size() == 0) return ComplexVector();
  return lapack::general_eigenvalues(a);
}

std::string to_string(Branch b) { return b == Branch::kMax ? "max" : "min"; }

Branch parse_branch(const std::string& text) {
  if (text == "max") return Branch::kMax;
  if (text == "min") return Branch::kMin;
  fail(ErrorCode::kInvalidParameter, "branch must be 'max' or 'min', got '" + text + "'");
}

SpectrumReport analyze(const SpectrumSpec& spec, Seed seed) {
  const RandomStream root(seed);
  const OperatorPtr op = make_operator(spec.sensing, root.substream("sensing"));
  check_cap(op->cols(), spec.cap, "analyze (n)");
  if (spec.with_e) check_cap(op->rows(), spec.cap, "analyze (m)");
  RandomStream signal_rng = root.substream("signal");
  const SignalInstance signal = make_signal(op, signal_rng);
  const ProcessingFunction f(spec.func, op->delta());

  SpectrumReport r;
  r.branch = spec.branch;
  r.n = op->cols();
  r.m = op->rows();
  r.realized_delta = op->delta();

  std::optional<double> mu;
  if (spec.branch == Branch::kMax) {
    mu = rho_sq(f, spec.quadrature).mu_hat;
  } else {
    mu = mu_hat_min_branch(f, spec.quadrature);
  }
  if (!mu) {
    r.status = "not_applicable";
    r.note = "no fixed point on the " + to_string(spec.branch) + " branch for " + f.name() +
             " at delta=" + std::to_string(r.realized_delta);
    return r;
  }
  r.mu = *mu;

  const DenseD d = dense_D(*op, build_weights(f, signal));
  r.d_asymmetry = d.asymmetry;
  r.d_eigs = eig_hermitian(d.d);
  r.d_extreme = spec.branch == Branch::kMax ? r.d_eigs[r.d_eigs.size() - 1] : r.d_eigs[0];

  const EPContext ctx = make_ep_context(signal, f, r.mu);
  r.lambda_pred = empirical_lambda(ctx);
  r.lambda_asym = lambda_of_mu(f, r.mu, spec.quadrature);
  r.top_match = std::abs(r.d_extreme - r.lambda_pred);
  r.asym_match = std::abs(r.d_extreme - r.lambda_asym);

  if (spec.with_e) {
    r.e_eigs = eig_general(dense_E(ctx, spec.cap));
    Eigen::Index top = 0;
    r.e_eigs.cwiseAbs().maxCoeff(&top);
    r.e_top = r.e_eigs[top];
    r.outlier_gap = std::abs(std::abs(r.e_top) - 1.0);
  } else {
    r.outlier_gap = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

nlohmann::json to_json(const SpectrumReport& r) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["status"] = r.status;
  if (!r.note.empty()) j["note"] = r.note;
  j["branch"] = to_string(r.branch);
  j["n"] = r.n;
  j["m"] = r.m;
  j["delta_realized"] = r.realized_delta;
  if (r.status != "ok") return j;
  j["mu"] = r.mu;
  j["lambda_pred"] = num(r.lambda_pred);
  j["lambda_asymptotic"] = num(r.lambda_asym);
  j["d_extreme"] = r.d_extreme;
  j["d_min"] = r.d_eigs[0];
  j["d_max"] = r.d_eigs[r.d_eigs.size() - 1];
  j["top_match"] = num(r.top_match);
  j["asymptotic_match"] = num(r.asym_match);
  j["outlier_gap"] = num(r.outlier_gap);
  j["e_top"] = {{"re", r.e_top.real()}, {"im", r.e_top.imag()}};
  j["d_asymmetry"] = r.d_asymmetry;
  return j;
}

Histogram freedman_diaconis(const RealVector& values) {
  require(values.size() > 0, ErrorCode::kInvalidParameter, "histogram of an empty set");
  std::vector<double> v(values.data(), values.data() + values.size());
  std::sort(v.begin(), v.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  const double lo = v.front();
  const double hi = v.back();
  const double iqr = quantile(0.75) - quantile(0.25);
  const double width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));

  Histogram h;
  std::size_t bins = 1;
  if (width > 0.0 && hi > lo) {
    bins = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / width)));
  }
  const double step = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + step * static_cast<double>(b));
  if (!(hi > lo)) h.edges.back() = lo + 1.0;
  h.counts.assign(bins, 0);
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / step);
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

EigenpairCheck eigenpair_check(const SignalInstance& signal, const ProcessingFunction& f,
                               double d_extreme, double mu_guess, std::size_t cap) {
  EigenpairCheck out;
  out.mu_n = stationary_mu(signal, f, d_extreme, mu_guess);
  const EPContext ctx = make_ep_context(signal, f, out.mu_n);
  ComplexVector values;
  ComplexMatrix vectors;
  lapack::general_eigensystem(dense_E(ctx, cap), values, vectors);
  Eigen::Index best = 0;
  (values.array() - 1.0).abs().minCoeff(&best);
  out.e_eigenvalue = values[best];
  out.fixed_point = fixed_point_check(ctx, vectors.col(best));
  return out;
}

}  // namespace orthospec
