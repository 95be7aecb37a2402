#include "racap/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace racap::kernels {

namespace {

bool g_parallel = true;

// Below this many output elements the OpenMP fork/join overhead dominates,
// so the dispatchers fall back to the serial path. Correctness never depends
// on the cutoff: both paths are bitwise identical.
constexpr std::size_t kGrain = 1 << 12;

template <class F>
void rows_serial(int rows, F body) {
  for (int i = 0; i < rows; ++i) body(i);
}

template <class F>
void rows_omp(int rows, F body) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows; ++i) body(i);
}

template <class F>
void map_serial(std::size_t n, F body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

template <class F>
void map_omp(std::size_t n, F body) {
  const long long nn = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < nn; ++i) body(static_cast<std::size_t>(i));
}

template <class F>
void map_auto(std::size_t n, F body) {
  if (g_parallel && n >= kGrain) {
    map_omp(n, body);
  } else {
    map_serial(n, body);
  }
}

// One output row of c = a * b: accumulate a[i,:] against rows of b in a
// fixed k-major order shared by the serial and parallel variants.
inline void matmul_row(const double* a, const double* b, double* c, int i, int k, int n, bool accumulate) {
  double* crow = c + static_cast<std::size_t>(i) * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  const double* arow = a + static_cast<std::size_t>(i) * k;
  for (int kk = 0; kk < k; ++kk) {
    const double av = arow[kk];
    const double* brow = b + static_cast<std::size_t>(kk) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void matmul_nt_row(const double* a, const double* b, double* c, int i, int n, int k, bool accumulate) {
  const double* arow = a + static_cast<std::size_t>(i) * n;
  double* crow = c + static_cast<std::size_t>(i) * k;
  for (int j = 0; j < k; ++j) {
    const double* brow = b + static_cast<std::size_t>(j) * n;
    double acc = 0.0;
    for (int t = 0; t < n; ++t) acc += arow[t] * brow[t];
    if (accumulate) {
      crow[j] += acc;
    } else {
      crow[j] = acc;
    }
  }
}

// Row i of c = a^T * b is built by sweeping column i of a down the rows of b.
inline void matmul_tn_row(const double* a, const double* b, double* c, int i, int m, int k, int n, bool accumulate) {
  double* crow = c + static_cast<std::size_t>(i) * n;
  if (!accumulate) std::fill(crow, crow + n, 0.0);
  for (int t = 0; t < m; ++t) {
    const double av = a[static_cast<std::size_t>(t) * k + i];
    const double* brow = b + static_cast<std::size_t>(t) * n;
    for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
  }
}

inline void softmax_row(const double* x, double* y, int i, int cols) {
  const double* xr = x + static_cast<std::size_t>(i) * cols;
  double* yr = y + static_cast<std::size_t>(i) * cols;
  double mx = xr[0];
  for (int j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
  double sum = 0.0;
  for (int j = 0; j < cols; ++j) {
    yr[j] = std::exp(xr[j] - mx);
    sum += yr[j];
  }
  for (int j = 0; j < cols; ++j) yr[j] /= sum;
}

inline void softmax_grad_row(const double* y, const double* dy, double* dx, int i, int cols) {
  const double* yr = y + static_cast<std::size_t>(i) * cols;
  const double* dyr = dy + static_cast<std::size_t>(i) * cols;
  double* dxr = dx + static_cast<std::size_t>(i) * cols;
  double s = 0.0;
  for (int j = 0; j < cols; ++j) s += dyr[j] * yr[j];
  for (int j = 0; j < cols; ++j) dxr[j] += yr[j] * (dyr[j] - s);
}

}  // namespace

void set_parallel(bool on) { g_parallel = on; }
bool parallel_enabled() { return g_parallel; }

void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  rows_serial(m, [&](int i) { matmul_row(a, b, c, i, k, n, accumulate); });
}

void matmul_omp(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  rows_omp(m, [&](int i) { matmul_row(a, b, c, i, k, n, accumulate); });
}

void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  if (g_parallel && static_cast<std::size_t>(m) * n >= kGrain && m > 1) {
    matmul_omp(a, b, c, m, k, n, accumulate);
  } else {
    matmul_serial(a, b, c, m, k, n, accumulate);
  }
}

void matmul_nt_serial(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate) {
  rows_serial(m, [&](int i) { matmul_nt_row(a, b, c, i, n, k, accumulate); });
}

void matmul_nt_omp(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate) {
  rows_omp(m, [&](int i) { matmul_nt_row(a, b, c, i, n, k, accumulate); });
}

void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate) {
  if (g_parallel && static_cast<std::size_t>(m) * k >= kGrain && m > 1) {
    matmul_nt_omp(a, b, c, m, n, k, accumulate);
  } else {
    matmul_nt_serial(a, b, c, m, n, k, accumulate);
  }
}

void matmul_tn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  rows_serial(k, [&](int i) { matmul_tn_row(a, b, c, i, m, k, n, accumulate); });
}

void matmul_tn_omp(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  rows_omp(k, [&](int i) { matmul_tn_row(a, b, c, i, m, k, n, accumulate); });
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  if (g_parallel && static_cast<std::size_t>(k) * n >= kGrain && k > 1) {
    matmul_tn_omp(a, b, c, m, k, n, accumulate);
  } else {
    matmul_tn_serial(a, b, c, m, k, n, accumulate);
  }
}

void softmax_rows_serial(const double* x, double* y, int rows, int cols) {
  rows_serial(rows, [&](int i) { softmax_row(x, y, i, cols); });
}

void softmax_rows_omp(const double* x, double* y, int rows, int cols) {
  rows_omp(rows, [&](int i) { softmax_row(x, y, i, cols); });
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
  if (g_parallel && static_cast<std::size_t>(rows) * cols >= kGrain && rows > 1) {
    softmax_rows_omp(x, y, rows, cols);
  } else {
    softmax_rows_serial(x, y, rows, cols);
  }
}

void softmax_grad_rows_serial(const double* y, const double* dy, double* dx, int rows, int cols) {
  rows_serial(rows, [&](int i) { softmax_grad_row(y, dy, dx, i, cols); });
}

void softmax_grad_rows_omp(const double* y, const double* dy, double* dx, int rows, int cols) {
  rows_omp(rows, [&](int i) { softmax_grad_row(y, dy, dx, i, cols); });
}

void softmax_grad_rows(const double* y, const double* dy, double* dx, int rows, int cols) {
  if (g_parallel && static_cast<std::size_t>(rows) * cols >= kGrain && rows > 1) {
    softmax_grad_rows_omp(y, dy, dx, rows, cols);
  } else {
    softmax_grad_rows_serial(y, dy, dx, rows, cols);
  }
}

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_serial(double alpha, const double* x, double* y, std::size_t n) {
  map_serial(n, [&](std::size_t i) { y[i] += alpha * x[i]; });
}

void axpy_omp(double alpha, const double* x, double* y, std::size_t n) {
  map_omp(n, [&](std::size_t i) { y[i] += alpha * x[i]; });
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] += alpha * x[i]; });
}

void vadd(const double* a, const double* b, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = a[i] + b[i]; });
}

void vsub(const double* a, const double* b, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = a[i] - b[i]; });
}

void vdiv(const double* a, const double* b, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = a[i] / b[i]; });
}

void vmul_serial(const double* a, const double* b, double* y, std::size_t n) {
  map_serial(n, [&](std::size_t i) { y[i] = a[i] * b[i]; });
}

void vmul_omp(const double* a, const double* b, double* y, std::size_t n) {
  map_omp(n, [&](std::size_t i) { y[i] = a[i] * b[i]; });
}

void vmul(const double* a, const double* b, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = a[i] * b[i]; });
}

void vscale(double alpha, const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = alpha * x[i]; });
}

void vshift(double c, const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = x[i] + c; });
}

void vrelu(const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = x[i] > 0.0 ? x[i] : 0.0; });
}

void vsigmoid(const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = 1.0 / (1.0 + std::exp(-x[i])); });
}

void vsqrt(const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = std::sqrt(x[i]); });
}

void vtanh_serial(const double* x, double* y, std::size_t n) {
  map_serial(n, [&](std::size_t i) { y[i] = std::tanh(x[i]); });
}

void vtanh_omp(const double* x, double* y, std::size_t n) {
  map_omp(n, [&](std::size_t i) { y[i] = std::tanh(x[i]); });
}

void vtanh(const double* x, double* y, std::size_t n) {
  map_auto(n, [&](std::size_t i) { y[i] = std::tanh(x[i]); });
}

void relu_grad(const double* y, const double* dy, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] += y[i] > 0.0 ? dy[i] : 0.0; });
}

void tanh_grad(const double* y, const double* dy, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] += dy[i] * (1.0 - y[i] * y[i]); });
}

void sigmoid_grad(const double* y, const double* dy, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] += dy[i] * y[i] * (1.0 - y[i]); });
}

void sqrt_grad(const double* y, const double* dy, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) {
    if (y[i] != 0.0) g[i] += dy[i] / (2.0 * y[i]);
  });
}

void accum_mul(const double* a, const double* b, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] += a[i] * b[i]; });
}

void div_grad_den(const double* a, const double* b, const double* dy, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] -= dy[i] * a[i] / (b[i] * b[i]); });
}

void accum_const(double c, double* g, std::size_t n) {
  map_auto(n, [&](std::size_t i) { g[i] += c; });
}

}  // namespace racap::kernels
