// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>

// Low-level dense kernels. Every kernel has a serial reference implementation
// and an OpenMP one; the two are bit-identical because parallel loops only
// split work across independent output elements and every reduction runs in a
// fixed order (8-lane strided partial sums, fixed-size chunks). Results do not
// depend on thread count.
namespace rfm::kernels {

enum class Backend { serial, openmp };

Backend active_backend();
void set_backend(Backend b);
int thread_count();

enum class BinOp : uint8_t { add, sub, mul, div };
enum class UnOp : uint8_t { neg, exp, log, sqrt, silu, square };

// exp accurate to ~2e-11 relative; branch-free so hot activation loops vectorize
double fast_exp(double x);
double apply_bin(BinOp op, double a, double b);
double apply_un(UnOp op, double x);

// fixed-order 8-lane dot product; shared by both backends
double dot(const double* a, const double* b, int n);

// ---- matmul family (row-major) -------------------------------------------
// c[m,n] = a[m,k] * b[k,n]
void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc);
// c[m,n] = a[m,k] * b[n,k]^T
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc);
// c[m,n] = a[k,m]^T * b[k,n]
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc);

// ---- elementwise ----------------------------------------------------------
void binary_same(BinOp op, const double* a, const double* b, double* out, size_t n);
// strided broadcast: out flat index decomposed against out_dims; stride 0 on
// broadcast axes
void binary_bcast(BinOp op, const double* a, const double* b, double* out,
                  const int* out_dims, const int* a_strides, const int* b_strides,
                  int rank, size_t n);
// dx_acc[j] += sum of dy over the axes where x was broadcast; x_strides has 0
// on broadcast axes and x's own strides elsewhere
void reduce_bcast_acc(const double* dy, double* dx_acc, const int* y_dims,
                      const int* x_strides, int rank);
void unary(UnOp op, const double* a, double* out, size_t n);
void silu_backward_acc(const double* x, const double* dy, double* dx_acc, size_t n);
void fma_acc(const double* a, const double* b, double* acc, size_t n);  // acc += a*b
void axpy(double alpha, const double* x, double* y, size_t n);          // y += alpha*x
void scale(double alpha, const double* x, double* y, size_t n);         // y = alpha*x
void fill(double v, double* x, size_t n);

// ---- reductions -----------------------------------------------------------
double sum_all(const double* x, size_t n);  // fixed 4096-element chunks
void reduce_rows_sum(const double* x, double* out, int rows, int cols, bool acc);
bool all_finite(const double* x, size_t n);

// ---- row-structured ops ---------------------------------------------------
// x viewed as [outer, axis_len, inner]; softmax over the middle axis
void softmax_axis(const double* x, double* y, int outer, int axis_len, int inner);
void softmax_axis_backward_acc(const double* y, const double* dy, double* dx_acc,
                               int outer, int axis_len, int inner);
void logsumexp_rows(const double* x, double* out, int rows, int cols);
void logsumexp_rows_backward_acc(const double* x, const double* lse, const double* dout,
                                 double* dx_acc, int rows, int cols);
// y = gain .* (x-mu)/sqrt(var+eps) + bias per row; caches xhat and inv_sigma
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_sigma,
                     int rows, int cols, double eps);
void layer_norm_rows_backward_acc(const double* dy, const double* xhat,
                                  const double* inv_sigma, const double* gain,
                                  double* dx_acc, double* dgain_acc, double* dbias_acc,
                                  int rows, int cols);

// ---- grid ops (activations stored [B*T*F, C], position-major) -------------
// 3x3 patches, zero padding 1, stride 1 or 2; out [B*To*Fo, 9*C]
void im2col_k3(const double* x, double* out, int B, int T, int F, int C, int stride);
void col2im_k3_acc(const double* dcol, double* dx_acc, int B, int T, int F, int C, int stride);
void upsample2x(const double* x, double* y, int B, int T, int F, int C);
void upsample2x_backward_acc(const double* dy, double* dx_acc, int B, int T, int F, int C);

// ---- misc -----------------------------------------------------------------
void gather_rows(const double* table, const int* ids, double* out, int n_ids, int cols);
void scatter_rows_acc(const double* dy, const int* ids, double* dtable_acc, int n_ids, int cols);
void slice_cols(const double* x, double* y, int rows, int cols, int c0, int cn);
void slice_cols_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int c0, int cn);
void repeat_rows(const double* x, double* y, int rows, int cols, int times);
void repeat_rows_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int times);
void adam_update(double* p, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2);

}  // namespace rfm::kernels
