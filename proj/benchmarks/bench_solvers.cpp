#include "koopkern/mkl.hpp"
#include "koopkern/spectral.hpp"
#include "koopkern/variational.hpp"

#include <benchmark/benchmark.h>

using namespace koopkern;

namespace {

Points grid(int n) { return tensor_grid(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0), {n, n}); }

void BM_CollocationSolve(benchmark::State& state) {
  const auto p = make_problem(make_poly2d(), -1.0, KernelMixture::single(KernelSpec::polynomial(2, 0.5)),
                              grid(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_CollocationSolve)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

void BM_MklSolve(benchmark::State& state) {
  const MKLConfig cfg;
  const auto sys = make_poly2d();
  const auto pts = grid(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mkl_solve(sys, -1.0, pts, cfg));
}
BENCHMARK(BM_MklSolve)->Arg(11)->Unit(benchmark::kMillisecond);

void BM_Mercer(benchmark::State& state) {
  const auto pts = grid(static_cast<int>(state.range(0)));
  const auto k = KernelSpec::gaussian(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(mercer_decompose(k, pts, uniform_weights(pts.size())));
}
BENCHMARK(BM_Mercer)->Arg(11)->Arg(21)->Unit(benchmark::kMillisecond);

}  // namespace
