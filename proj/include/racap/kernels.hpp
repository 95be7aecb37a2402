#pragma once

#include <cstddef>

// Dense numeric kernels behind the tensor ops. Every hot kernel comes in a
// serial reference version and an OpenMP version. The two are bitwise
// identical: each output element is produced by exactly one thread with the
// same inner-loop order, so thread count and scheduling cannot change results.
// The unsuffixed names dispatch on problem size and the global switch.
namespace racap::kernels {

void set_parallel(bool on);
bool parallel_enabled();

// c[m x n] = a[m x k] * b[k x n]; += into c when accumulate is set
void matmul_serial(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);
void matmul_omp(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);
void matmul(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);

// c[m x k] = a[m x n] * b[k x n]^T
void matmul_nt_serial(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate = false);
void matmul_nt_omp(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate = false);
void matmul_nt(const double* a, const double* b, double* c, int m, int n, int k, bool accumulate = false);

// c[k x n] = a[m x k]^T * b[m x n]
void matmul_tn_serial(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);
void matmul_tn_omp(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate = false);

// row-wise softmax with max subtraction
void softmax_rows_serial(const double* x, double* y, int rows, int cols);
void softmax_rows_omp(const double* x, double* y, int rows, int cols);
void softmax_rows(const double* x, double* y, int rows, int cols);

// dx[r] += y[r] o (dy[r] - <dy[r], y[r]>), the softmax adjoint per row
void softmax_grad_rows_serial(const double* y, const double* dy, double* dx, int rows, int cols);
void softmax_grad_rows_omp(const double* y, const double* dy, double* dx, int rows, int cols);
void softmax_grad_rows(const double* y, const double* dy, double* dx, int rows, int cols);

// serial by construction: the accumulation order is part of the result
double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy_serial(double alpha, const double* x, double* y, std::size_t n);
void axpy_omp(double alpha, const double* x, double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

// elementwise zips
void vadd(const double* a, const double* b, double* y, std::size_t n);
void vsub(const double* a, const double* b, double* y, std::size_t n);
void vdiv(const double* a, const double* b, double* y, std::size_t n);
void vmul_serial(const double* a, const double* b, double* y, std::size_t n);
void vmul_omp(const double* a, const double* b, double* y, std::size_t n);
void vmul(const double* a, const double* b, double* y, std::size_t n);

// elementwise maps
void vscale(double alpha, const double* x, double* y, std::size_t n);
void vshift(double c, const double* x, double* y, std::size_t n);
void vrelu(const double* x, double* y, std::size_t n);
void vsigmoid(const double* x, double* y, std::size_t n);
void vsqrt(const double* x, double* y, std::size_t n);
void vtanh_serial(const double* x, double* y, std::size_t n);
void vtanh_omp(const double* x, double* y, std::size_t n);
void vtanh(const double* x, double* y, std::size_t n);

// fused adjoint zips, all accumulate into g
void relu_grad(const double* y, const double* dy, double* g, std::size_t n);     // g += dy * [y > 0]
void tanh_grad(const double* y, const double* dy, double* g, std::size_t n);     // g += dy * (1 - y^2)
void sigmoid_grad(const double* y, const double* dy, double* g, std::size_t n);  // g += dy * y * (1 - y)
void sqrt_grad(const double* y, const double* dy, double* g, std::size_t n);     // g += dy / (2y); 0 where y == 0
void accum_mul(const double* a, const double* b, double* g, std::size_t n);      // g += a o b
void div_grad_den(const double* a, const double* b, const double* dy, double* g, std::size_t n);  // g += -dy * a / b^2
void accum_const(double c, double* g, std::size_t n);                             // g += c

}  // namespace racap::kernels
