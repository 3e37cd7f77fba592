// Serial reference vs OpenMP for each data-parallel kernel, plus the end-to-end
// paths that use them. Arg = problem size.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "plemelj/density.hpp"
#include "plemelj/kernels.hpp"
#include "plemelj/transform.hpp"

using namespace plemelj;

namespace {

// Cheap enough that the loop dominates, costly enough that threads can pay off.
Complex integrand(double x) { return std::exp(Complex(0.3 * x, x)) * std::sqrt(std::abs(x) + 0.1); }

std::vector<quad::Interval> panels(std::size_t n) {
  std::vector<quad::Interval> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = {-1.0 + 2.0 * i / n, -1.0 + 2.0 * (i + 1) / n};
  return p;
}

std::vector<kernels::ParamPair> pairs(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<kernels::ParamPair> p(n);
  for (auto& q : p) q = {u(rng), u(rng)};
  return p;
}

std::vector<Complex> wavy_polyline(std::size_t n) {
  std::vector<Complex> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2 * pi * i / n;
    pts[i] = std::polar(1.0 + 0.2 * std::cos(5 * t), t);
  }
  return pts;
}

template <Exec E>
void BM_gk15_batch(benchmark::State& st) {
  const auto p = panels(st.range(0));
  std::vector<kernels::PanelEstimate> out(p.size());
  const quad::Integrand f = integrand;
  for (auto _ : st) {
    kernels::gk15_batch(f, p, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <Exec E>
void BM_pair_differences(benchmark::State& st) {
  const auto p = pairs(st.range(0));
  std::vector<double> out(p.size());
  const kernels::ParamFunction g = integrand;
  for (auto _ : st) {
    kernels::pair_differences(g, p, out, E);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <Exec E>
void BM_polyline_proximity(benchmark::State& st) {
  const auto pts = wavy_polyline(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(kernels::min_nonadjacent_distance(pts, true, E));
}

template <Exec E>
void BM_modulus_estimate(benchmark::State& st) {
  const auto seg = make_builtin_curve("segment", {-1, 1});
  const auto d = builtin_density("holder-power", {0.5});
  ModulusOptions o;
  o.n_pairs = st.range(0);
  o.exec = E;
  for (auto _ : st) benchmark::DoNotOptimize(estimate_modulus(d, seg, o).omega.back());
}

template <Exec E>
void BM_convergence_run(benchmark::State& st) {
  const auto par = make_builtin_curve("parabola-graph", {0.5});
  const auto d = builtin_density("holder-power", {0.5, 0.2});
  const auto seq = make_sequence(par, normalize_at(par, 0.2), Side::left, ApproachShape::normal,
                                 dyadic_radii(int(st.range(0))));
  ConvergenceConfig cfg;
  cfg.exec = E;
  for (auto _ : st) benchmark::DoNotOptimize(run_convergence(par, d, seq, cfg).final_error);
}

}  // namespace

BENCHMARK(BM_gk15_batch<Exec::serial>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_gk15_batch<Exec::parallel>)->Arg(64)->Arg(1024)->Arg(16384);
BENCHMARK(BM_pair_differences<Exec::serial>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_pair_differences<Exec::parallel>)->Arg(4096)->Arg(65536);
BENCHMARK(BM_polyline_proximity<Exec::serial>)->Arg(256)->Arg(2048);
BENCHMARK(BM_polyline_proximity<Exec::parallel>)->Arg(256)->Arg(2048);
BENCHMARK(BM_modulus_estimate<Exec::serial>)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_modulus_estimate<Exec::parallel>)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convergence_run<Exec::serial>)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_convergence_run<Exec::parallel>)->Arg(16)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
