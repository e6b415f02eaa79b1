// Serial reference kernels against their OpenMP counterparts, plus the
// operator applications that dominate a power-method or PCA-EP step.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "orthospec/kernels.hpp"
#include "orthospec/pcaep.hpp"
#include "orthospec/preprocessing.hpp"
#include "orthospec/sensing.hpp"
#include "orthospec/signal.hpp"
#include "orthospec/spectral.hpp"

using namespace orthospec;
namespace k = orthospec::kernels;

namespace {

std::vector<double> nodes(std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = 40.0 * static_cast<double>(i) / static_cast<double>(n);
  return s;
}

double g_of(double s) { return 1.0 / (1.7 - (1.0 - 1.0 / (s + 0.01))); }

template <bool Parallel>
void BM_ExpMoments(benchmark::State& state) {
  const auto s = nodes(static_cast<std::size_t>(state.range(0)));
  const std::vector<double> w(s.size(), 1.0 / static_cast<double>(s.size()));
  for (auto _ : state) {
    k::MomentSums m = Parallel ? k::parallel::exp_moments(s, w, g_of) : k::serial::exp_moments(s, w, g_of);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_WeightedProduct(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  RandomStream rng(Seed{1});
  const ComplexVector v = sample_complex_gaussian(rng, static_cast<std::size_t>(n), 1.0);
  const RealVector w = RealVector::LinSpaced(n, 0.0, 1.0);
  for (auto _ : state) {
    ComplexVector out = Parallel ? k::parallel::weighted_product(w, v) : k::serial::weighted_product(w, v);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_MapIndex(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto f = [](std::size_t i) { return std::exp(-1e-5 * static_cast<double>(i)); };
  for (auto _ : state) {
    RealVector out = Parallel ? k::parallel::map_index(n, f) : k::serial::map_index(n, f);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Mean(benchmark::State& state) {
  const RealVector v = RealVector::LinSpaced(state.range(0), -1.0, 2.0);
  for (auto _ : state) {
    double m = Parallel ? k::parallel::mean(v) : k::serial::mean(v);
    benchmark::DoNotOptimize(m);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ApplyD(benchmark::State& state) {
  SensingSpec spec;
  spec.kind = static_cast<SensingKind>(state.range(1));
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.delta = 3.0;
  RandomStream root(Seed{1});
  const OperatorPtr op = make_operator(spec, root.substream("sensing"));
  RandomStream sr = root.substream("signal");
  const SignalInstance sig = make_signal(op, sr);
  ProcessingSpec mm;
  mm.kind = ProcessingKind::kMM;
  const WeightDiagonal w = build_weights(ProcessingFunction(mm, op->delta()), sig);
  ComplexVector x = sig.x_star;
  for (auto _ : state) {
    x = apply_D(*op, w, x);
    x.normalize();
    benchmark::DoNotOptimize(x.data());
  }
  state.SetLabel(to_string(spec.kind));
}

}  // namespace

BENCHMARK(BM_ExpMoments<false>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_ExpMoments<true>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_WeightedProduct<false>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WeightedProduct<true>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_MapIndex<false>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_MapIndex<true>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Mean<false>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Mean<true>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_ApplyD)
    ->Args({2048, static_cast<int>(SensingKind::kPartialDft)})
    ->Args({16384, static_cast<int>(SensingKind::kPartialDft)})
    ->Args({2048, static_cast<int>(SensingKind::kCdp)})
    ->Args({512, static_cast<int>(SensingKind::kHaar)});

BENCHMARK_MAIN();
