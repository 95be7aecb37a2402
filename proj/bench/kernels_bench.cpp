// Serial reference vs OpenMP kernels on the shapes the model actually hits
// (seq_len x hidden matmuls, row softmax, long elementwise sweeps). The two
// variants are bitwise identical; this target only measures speed.
#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "racap/kernels.hpp"

namespace k = racap::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(gen);
  return v;
}

using MatmulFn = void (*)(const double*, const double*, double*, int, int, int, bool);
using SoftmaxFn = void (*)(const double*, double*, int, int);
using SoftmaxGradFn = void (*)(const double*, const double*, double*, int, int);
using AxpyFn = void (*)(double, const double*, double*, std::size_t);
using ZipFn = void (*)(const double*, const double*, double*, std::size_t);
using MapFn = void (*)(const double*, double*, std::size_t);

void bm_matmul(benchmark::State& state, MatmulFn fn) {
  const int n = static_cast<int>(state.range(0));
  const auto a = random_vec(static_cast<std::size_t>(n) * n, 1);
  const auto b = random_vec(static_cast<std::size_t>(n) * n, 2);
  std::vector<double> c(static_cast<std::size_t>(n) * n);
  for (auto _ : state) {
    fn(a.data(), b.data(), c.data(), n, n, n, false);
    benchmark::DoNotOptimize(c.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n) * n * n);
}

void bm_softmax(benchmark::State& state, SoftmaxFn fn) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  const auto x = random_vec(static_cast<std::size_t>(rows) * cols, 3);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    fn(x.data(), y.data(), rows, cols);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows) * cols);
}

void bm_softmax_grad(benchmark::State& state, SoftmaxGradFn fn) {
  const int rows = static_cast<int>(state.range(0));
  const int cols = static_cast<int>(state.range(1));
  const auto raw = random_vec(static_cast<std::size_t>(rows) * cols, 4);
  std::vector<double> y(raw.size());
  k::softmax_rows_serial(raw.data(), y.data(), rows, cols);
  const auto dy = random_vec(raw.size(), 5);
  std::vector<double> dx(raw.size(), 0.0);
  for (auto _ : state) {
    fn(y.data(), dy.data(), dx.data(), rows, cols);
    benchmark::DoNotOptimize(dx.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows) * cols);
}

void bm_axpy(benchmark::State& state, AxpyFn fn) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vec(n, 6);
  std::vector<double> y(n, 0.25);
  for (auto _ : state) {
    fn(0.5, x.data(), y.data(), n);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bm_zip(benchmark::State& state, ZipFn fn) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vec(n, 7);
  const auto b = random_vec(n, 8);
  std::vector<double> y(n);
  for (auto _ : state) {
    fn(a.data(), b.data(), y.data(), n);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void bm_map(benchmark::State& state, MapFn fn) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vec(n, 9);
  std::vector<double> y(n);
  for (auto _ : state) {
    fn(x.data(), y.data(), n);
    benchmark::DoNotOptimize(y.data());
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK_CAPTURE(bm_matmul, serial, k::matmul_serial)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_matmul, omp, k::matmul_omp)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_matmul, dispatch, k::matmul)->Arg(32)->Arg(128)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_CAPTURE(bm_matmul, nt_serial, k::matmul_nt_serial)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_matmul, nt_omp, k::matmul_nt_omp)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_matmul, tn_serial, k::matmul_tn_serial)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(bm_matmul, tn_omp, k::matmul_tn_omp)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_CAPTURE(bm_softmax, serial, k::softmax_rows_serial)->Args({256, 256})->Args({2048, 64});
BENCHMARK_CAPTURE(bm_softmax, omp, k::softmax_rows_omp)->Args({256, 256})->Args({2048, 64});
BENCHMARK_CAPTURE(bm_softmax_grad, serial, k::softmax_grad_rows_serial)->Args({256, 256});
BENCHMARK_CAPTURE(bm_softmax_grad, omp, k::softmax_grad_rows_omp)->Args({256, 256});

BENCHMARK_CAPTURE(bm_axpy, serial, k::axpy_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(bm_axpy, omp, k::axpy_omp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(bm_zip, vmul_serial, k::vmul_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(bm_zip, vmul_omp, k::vmul_omp)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(bm_map, vtanh_serial, k::vtanh_serial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(bm_map, vtanh_omp, k::vtanh_omp)->Arg(1 << 16)->Arg(1 << 20);

BENCHMARK_MAIN();
