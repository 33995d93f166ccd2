#include "koopkern/char_kernel.hpp"
#include "koopkern/kernel_bank.hpp"

#include <benchmark/benchmark.h>

using namespace koopkern;

namespace {

Points grid(int n) { return tensor_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {n, n}); }

void BM_GramGaussian(benchmark::State& state) {
  const auto pts = grid(static_cast<int>(state.range(0)));
  const auto k = KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(gram(k, pts));
  state.SetComplexityN(static_cast<long>(pts.size()));
}
BENCHMARK(BM_GramGaussian)->Arg(11)->Arg(21)->Arg(31);

void BM_KernelBlocksMixture(benchmark::State& state) {
  const auto pts = grid(static_cast<int>(state.range(0)));
  const auto mix = KernelMixture::uniform(default_mkl_kernels());
  for (auto _ : state) benchmark::DoNotOptimize(mixture_blocks(mix, pts, pts));
}
BENCHMARK(BM_KernelBlocksMixture)->Arg(11)->Arg(21);

void BM_XiValue(benchmark::State& state) {
  const auto sys = make_duffing();
  const auto lin = linearize(*sys);
  const XiEvaluator xi(sys, lin, mode_kernel_select(lin, lin.eigenvalues[0], 10.0, static_cast<int>(state.range(0))));
  Vec x(2);
  x << 0.3, -0.2;
  for (auto _ : state) benchmark::DoNotOptimize(xi.value(x));
}
BENCHMARK(BM_XiValue)->Arg(500)->Arg(2000);

}  // namespace
