#pragma once

// Data-parallel inner loops. Every kernel exists twice with identical
// signatures: `serial` is the reference the tests compare against, `parallel`
// is the OpenMP version the library calls. Reductions in `parallel` use a
// fixed per-thread partition followed by an ordered combine, so results are
// deterministic for a fixed thread count.

#include <Eigen/Dense>

#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "orthospec/core.hpp"

namespace orthospec::kernels {

/// Weighted sums used by every psi evaluation: with g = g(s),
/// weight = sum w, g = sum w g, sg = sum w s g, g2 = sum w g^2, sg2 = sum w s g^2.
struct MomentSums {
  double weight = 0.0;
  double g = 0.0;
  double sg = 0.0;
  double g2 = 0.0;
  double sg2 = 0.0;

  MomentSums& operator+=(const MomentSums& o) {
    weight += o.weight;
    g += o.g;
    sg += o.sg;
    g2 += o.g2;
    sg2 += o.sg2;
    return *this;
  }
};

inline int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_thread_count(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace detail {

// Collects the first exception thrown inside a parallel region.
class ExceptionSlot {
 public:
  template <class F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr first_;
};

}  // namespace detail

namespace serial {

/// out_i = w_i * v_i
inline ComplexVector weighted_product(const RealVector& w, const ComplexVector& v) {
  ComplexVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = w[i] * v[i];
  return out;
}

/// out_i = f(i)
template <class F>
RealVector map_index(std::size_t n, F&& f) {
  RealVector out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) out[static_cast<Eigen::Index>(i)] = f(i);
  return out;
}

inline double mean(const RealVector& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) acc += v[i];
  return acc / static_cast<double>(v.size());
}

/// Moment sums over nodes s with weights w (empty w means unit weights).
template <class G>
MomentSums exp_moments(std::span<const double> s, std::span<const double> w, G&& g_of_s) {
  MomentSums m;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double g = g_of_s(s[i]);
    m.weight += wi;
    m.g += wi * g;
    m.sg += wi * s[i] * g;
    m.g2 += wi * g * g;
    m.sg2 += wi * s[i] * g * g;
  }
  return m;
}

/// Dense matrix whose j-th column is column(j).
template <class F>
ComplexMatrix build_columns(std::size_t rows, std::size_t cols, F&& column) {
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t j = 0; j < cols; ++j) out.col(static_cast<Eigen::Index>(j)) = column(j);
  return out;
}

}  // namespace serial

namespace parallel {

inline ComplexVector weighted_product(const RealVector& w, const ComplexVector& v) {
  ComplexVector out(v.size());
  const Eigen::Index n = v.size();
#pragma omp parallel for schedule(static) if (n > 32768)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = w[i] * v[i];
  return out;
}

template <class F>
RealVector map_index(std::size_t n, F&& f) {
  RealVector out(static_cast<Eigen::Index>(n));
  detail::ExceptionSlot slot;
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (count > 8192)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    slot.run([&] { out[i] = f(static_cast<std::size_t>(i)); });
  }
  slot.rethrow();
  return out;
}

inline double mean(const RealVector& v) {
  const int threads = thread_count();
  std::vector<double> partial(static_cast<std::size_t>(threads), 0.0);
  const Eigen::Index n = v.size();
#pragma omp parallel num_threads(threads) if (n > 32768)
  {
#ifdef _OPENMP
    const int t = omp_get_thread_num();
    const int nt = omp_get_num_threads();
#else
    const int t = 0;
    const int nt = 1;
#endif
    const Eigen::Index lo = n * t / nt;
    const Eigen::Index hi = n * (t + 1) / nt;
    double acc = 0.0;
    for (Eigen::Index i = lo; i < hi; ++i) acc += v[i];
    partial[static_cast<std::size_t>(t)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total / static_cast<double>(n);
}

template <class G>
MomentSums exp_moments(std::span<const double> s, std::span<const double> w, G&& g_of_s) {
  const int threads = thread_count();
  std::vector<MomentSums> partial(static_cast<std::size_t>(threads));
  detail::ExceptionSlot slot;
  const std::size_t n = s.size();
#pragma omp parallel num_threads(threads) if (n > 16384)
  {
#ifdef _OPENMP
    const int t = omp_get_thread_num();
    const int nt = omp_get_num_threads();
#else
    const int t = 0;
    const int nt = 1;
#endif
    const std::size_t lo = n * static_cast<std::size_t>(t) / static_cast<std::size_t>(nt);
    const std::size_t hi = n * static_cast<std::size_t>(t + 1) / static_cast<std::size_t>(nt);
    slot.run([&] {
      partial[static_cast<std::size_t>(t)] =
          serial::exp_moments(s.subspan(lo, hi - lo), w.empty() ? w : w.subspan(lo, hi - lo), g_of_s);
    });
  }
  slot.rethrow();
  MomentSums total;
  for (const auto& p : partial) total += p;
  return total;
}

template <class F>
ComplexMatrix build_columns(std::size_t rows, std::size_t cols, F&& column) {
  ComplexMatrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  detail::ExceptionSlot slot;
  const auto count = static_cast<std::ptrdiff_t>(cols);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t j = 0; j < count; ++j) {
    slot.run([&] { out.col(j) = column(static_cast<std::size_t>(j)); });
  }
  slot.rethrow();
  return out;
}

}  // namespace parallel

}  // namespace orthospec::kernels
