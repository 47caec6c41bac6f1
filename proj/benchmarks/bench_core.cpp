#include <benchmark/benchmark.h>

#include <cmath>

#include "l2t/cellular.hpp"
#include "l2t/random.hpp"

using namespace l2t;
using namespace l2t::gen;

static void BM_FkDetMatrix(benchmark::State& state) {
  Rng rng(1);
  auto b = Backend::matrix();
  Morphism a = random_invertible(rng, b, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(log_fk_det(a));
}
BENCHMARK(BM_FkDetMatrix)->Arg(8)->Arg(32)->Arg(128);

static void BM_FkDetFiniteGroup(benchmark::State& state) {
  Rng rng(2);
  auto b = Backend::finite_group(Backend::cyclic_table(static_cast<int>(state.range(0))));
  Morphism a = random_invertible(rng, b, 2);
  for (auto _ : state) benchmark::DoNotOptimize(log_fk_det(a));
}
BENCHMARK(BM_FkDetFiniteGroup)->Arg(5)->Arg(16)->Arg(64);

static void BM_ExtendedDetFamily(benchmark::State& state) {
  auto b = Backend::unit_interval(static_cast<int>(state.range(0)));
  const HObject x = HObject::free(b, 1);
  std::vector<Mat> f;
  for (double p : b->sample_points()) f.push_back(Mat::Constant(1, 1, p));
  const Morphism a = from_fibers(x, x, std::move(f));
  for (auto _ : state) benchmark::DoNotOptimize(fk_det_extended(a).log_det);
}
BENCHMARK(BM_ExtendedDetFamily)->Arg(1024)->Arg(10000);

static void BM_TorsionRandomComplex(benchmark::State& state) {
  Rng rng(3);
  ComplexShape sh{{2, 2, 2}, {1, 0, 1, 0}};
  ChainComplex c = random_complex(rng, Backend::matrix(), sh);
  for (auto _ : state) benchmark::DoNotOptimize(torsion(c).combined.log_coeff);
}
BENCHMARK(BM_TorsionRandomComplex);

static void BM_CircleRegular(benchmark::State& state) {
  const CellComplex k = examples::circle();
  const Representation rep = examples::circle_regular(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(combinatorial_torsion(k, rep).log_scalar);
}
BENCHMARK(BM_CircleRegular)->Arg(1024)->Arg(4096);

static void BM_LensRegular(benchmark::State& state) {
  const CellComplex k = examples::lens(static_cast<int>(state.range(0)), 1);
  const Representation rep = examples::lens_regular(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(combinatorial_torsion(k, rep).reduced);
}
BENCHMARK(BM_LensRegular)->Arg(5)->Arg(11);

static void BM_SubdivisionCheck(benchmark::State& state) {
  const CellComplex k = examples::lens(5, 1);
  const Representation rep = examples::lens_zeta(5);
  for (auto _ : state) benchmark::DoNotOptimize(subdivision_invariance_check(k, rep, 3, 7).pass);
}
BENCHMARK(BM_SubdivisionCheck);
BENCHMARK_MAIN();
