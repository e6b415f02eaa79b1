#include "orthospec/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "orthospec/error.hpp"

namespace orthospec {

std::string to_string(ProcessingKind kind) {
  switch (kind) {
    case ProcessingKind::kTrim: return "trim";
    case ProcessingKind::kSubset: return "subset";
    case ProcessingKind::kMM: return "mm";
    case ProcessingKind::kStar: return "star";
    case ProcessingKind::kStarRegularized: return "star_reg";
    case ProcessingKind::kAltWeak: return "alt_weak";
    case ProcessingKind::kShiftedMM: return "shifted_mm";
    case ProcessingKind::kCustom: return "custom";
  }
  return "unknown";
}

ProcessingKind parse_processing_kind(std::string_view text) {
  for (auto k : {ProcessingKind::kTrim, ProcessingKind::kSubset, ProcessingKind::kMM,
                 ProcessingKind::kStar, ProcessingKind::kStarRegularized, ProcessingKind::kAltWeak,
                 ProcessingKind::kShiftedMM, ProcessingKind::kCustom}) {
    if (text == to_string(k)) return k;
  }
  fail(ErrorCode::kInvalidParameter, "unknown processing kind '" + std::string(text) + "'");
}

Normalization normalization_for(double raw_sup) {
  require(std::isfinite(raw_sup), ErrorCode::kInvalidParameter,
          "processing function is unbounded above");
  Normalization n;
  n.raw_sup = raw_sup;
  n.offset = raw_sup > 0.0 ? 0.0 : -raw_sup + 1.0;
  return n;
}

double default_shift(ProcessingKind kind) {
  switch (kind) {
    case ProcessingKind::kMM: return 10.0;
    case ProcessingKind::kStar:
    case ProcessingKind::kStarRegularized:
    case ProcessingKind::kAltWeak: return 50.0;
    default: return 0.0;
  }
}

namespace {

double custom_value(const std::vector<std::pair<double, double>>& table, double s) {
  if (s <= table.front().first) return table.front().second;
  if (s >= table.back().first) return table.back().second;
  auto hi = std::upper_bound(table.begin(), table.end(), s,
                             [](double v, const auto& knot) { return v < knot.first; });
  auto lo = hi - 1;
  const double t = (s - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

}  // namespace

ProcessingFunction::ProcessingFunction(ProcessingSpec spec, double delta)
    : spec_(std::move(spec)), delta_(delta) {
  require(delta > 1.0 && std::isfinite(delta), ErrorCode::kInvalidParameter,
          "oversampling ratio must exceed 1, got " + std::to_string(delta));
  const double rd = std::sqrt(delta);
  double raw_sup = 1.0;
  double raw_inf = 0.0;
  switch (spec_.kind) {
    case ProcessingKind::kTrim:
      require(spec_.c2 > 0.0, ErrorCode::kInvalidParameter, "trim needs c2 > 0");
      raw_sup = spec_.c2 * spec_.c2;  // approached as s -> c2^2 from below
      break;
    case ProcessingKind::kSubset:
      require(spec_.c1 > 0.0, ErrorCode::kInvalidParameter, "subset needs c1 > 0");
      break;
    case ProcessingKind::kMM:
      raw_inf = 1.0 - rd / (rd - 1.0);
      break;
    case ProcessingKind::kStar:
      raw_inf = 1.0 - 1.0 / kStarFloor;
      bounded_below_ = false;
      break;
    case ProcessingKind::kStarRegularized:
      require(spec_.kappa > 0.0, ErrorCode::kInvalidParameter, "star_reg needs kappa > 0");
      raw_inf = 1.0 - 1.0 / spec_.kappa;
      break;
    case ProcessingKind::kAltWeak:
      // 1 - 1/(s + delta - 2) has a pole at s = 2 - delta when delta < 2.
      require(delta >= 2.0, ErrorCode::kInvalidParameter,
              "alt_weak is unbounded above for delta < 2 (delta=" + std::to_string(delta) + ")");
      if (delta - 2.0 < kStarFloor) {
        raw_inf = 1.0 - 1.0 / kStarFloor;
        bounded_below_ = false;
      } else {
        raw_inf = 1.0 - 1.0 / (delta - 2.0);
      }
      break;
    case ProcessingKind::kShiftedMM:
      raw_sup = 2.0 + rd / (rd - 1.0);  // at s = 0
      raw_inf = 2.0;                    // as s -> infinity
      break;
    case ProcessingKind::kCustom: {
      const auto& t = spec_.table;
      require(t.size() >= 2, ErrorCode::kInvalidParameter, "custom table needs at least two knots");
      for (std::size_t i = 0; i < t.size(); ++i) {
        require(std::isfinite(t[i].first) && std::isfinite(t[i].second) && t[i].first >= 0.0,
                ErrorCode::kInvalidParameter, "custom table has a bad knot");
        if (i > 0) {
          require(t[i].first > t[i - 1].first, ErrorCode::kInvalidParameter,
                  "custom table s values must be strictly increasing");
        }
      }
      raw_sup = -std::numeric_limits<double>::infinity();
      raw_inf = std::numeric_limits<double>::infinity();
      for (const auto& [s, v] : t) {
        raw_sup = std::max(raw_sup, v);
        raw_inf = std::min(raw_inf, v);
      }
      break;
    }
  }
  norm_ = normalization_for(raw_sup);
  t_min_ = (norm_.offset + raw_inf) / (norm_.offset + norm_.raw_sup);
}

std::string ProcessingFunction::name() const {
  std::ostringstream os;
  os << to_string(spec_.kind);
  switch (spec_.kind) {
    case ProcessingKind::kTrim: os << "(c2=" << spec_.c2 << ")"; break;
    case ProcessingKind::kSubset: os << "(c1=" << spec_.c1 << ")"; break;
    case ProcessingKind::kStarRegularized: os << "(kappa=" << spec_.kappa << ")"; break;
    default: break;
  }
  return os.str();
}

double ProcessingFunction::raw_of_s(double s) const {
  const double rd = std::sqrt(delta_);
  switch (spec_.kind) {
    case ProcessingKind::kTrim: return s < spec_.c2 * spec_.c2 ? s : 0.0;
    case ProcessingKind::kSubset: return s > spec_.c1 ? 1.0 : 0.0;
    case ProcessingKind::kMM: return 1.0 - rd / (s + rd - 1.0);
    case ProcessingKind::kStar: return 1.0 - 1.0 / std::max(s, kStarFloor);
    case ProcessingKind::kStarRegularized: return 1.0 - 1.0 / (s + spec_.kappa);
    case ProcessingKind::kAltWeak: return 1.0 - 1.0 / std::max(s + delta_ - 2.0, kStarFloor);
    case ProcessingKind::kShiftedMM: return 2.0 + rd / (s + rd - 1.0);
    case ProcessingKind::kCustom: return custom_value(spec_.table, s);
  }
  return 0.0;
}

double ProcessingFunction::eval_T(double y) const {
  require(y >= 0.0 && std::isfinite(y), ErrorCode::kInvalidParameter,
          "eval_T needs a finite y >= 0");
  return of_s(delta_ * y * y);
}

double ProcessingFunction::g_of_s(double s, double inv_mu) const {
  const double denom = inv_mu - of_s(s);
  if (std::abs(denom) <= 1e-14) {
    const double y = std::sqrt(s / delta_);
    throw SingularityError(y, 1.0 / inv_mu,
                           "G is singular at y=" + std::to_string(y) +
                               " mu=" + std::to_string(1.0 / inv_mu));
  }
  return 1.0 / denom;
}

double ProcessingFunction::eval_G(double y, double mu) const {
  require(y >= 0.0 && std::isfinite(y), ErrorCode::kInvalidParameter,
          "eval_G needs a finite y >= 0");
  require(mu != 0.0 && std::isfinite(mu), ErrorCode::kInvalidParameter, "eval_G needs mu != 0");
  return g_of_s(delta_ * y * y, 1.0 / mu);
}

bool ProcessingFunction::delta_free() const {
  switch (spec_.kind) {
    case ProcessingKind::kTrim:
    case ProcessingKind::kSubset:
    case ProcessingKind::kStar:
    case ProcessingKind::kStarRegularized:
    case ProcessingKind::kCustom: return true;
    default: return false;
  }
}

std::vector<double> ProcessingFunction::breakpoints() const {
  switch (spec_.kind) {
    case ProcessingKind::kTrim: return {spec_.c2 * spec_.c2};
    case ProcessingKind::kSubset: return {spec_.c1};
    case ProcessingKind::kCustom: {
      std::vector<double> out;
      for (const auto& [s, v] : spec_.table) {
        if (s > 0.0) out.push_back(s);
      }
      return out;
    }
    default: return {};
  }
}

bool ProcessingFunction::sup_attained() const {
  switch (spec_.kind) {
    case ProcessingKind::kTrim:
    case ProcessingKind::kSubset:
    case ProcessingKind::kShiftedMM:
    case ProcessingKind::kCustom: return true;
    default: return false;
  }
}

bool ProcessingFunction::sup_plateau() const {
  if (spec_.kind == ProcessingKind::kSubset) return true;
  if (spec_.kind != ProcessingKind::kCustom) return false;
  const auto& t = spec_.table;
  if (t.back().second == norm_.raw_sup) return true;  // constant beyond the last knot
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    if (t[i].second == norm_.raw_sup && t[i + 1].second == norm_.raw_sup) return true;
  }
  return false;
}

std::pair<double, double> scan_range(const ProcessingFunction& f, double s_max,
                                     std::size_t points) {
  // Log-spaced in s from 1e-10, plus s = 0.
  double lo = f.of_s(0.0);
  double hi = lo;
  const double a = std::log(1e-10);
  const double b = std::log(s_max);
  for (std::size_t i = 0; i < points; ++i) {
    const double s = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    const double v = f.of_s(s);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace orthospec
