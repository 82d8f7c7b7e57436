// SPDX-License-Identifier: Apache-2.0
//
// Backend dispatch plus the scalar helpers shared by both backends.

#include "rfm/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kernels_backends.hpp"
#include "kernels_impl.hpp"

namespace rfm::kernels {

namespace {
std::atomic<Backend> g_backend{
#ifdef _OPENMP
    Backend::openmp
#else
    Backend::serial
#endif
};
}  // namespace

Backend active_backend() { return g_backend.load(std::memory_order_relaxed); }

void set_backend(Backend b) {
#ifndef _OPENMP
    b = Backend::serial;
#endif
    g_backend.store(b, std::memory_order_relaxed);
}

int thread_count() {
#ifdef _OPENMP
    return active_backend() == Backend::openmp ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

double fast_exp(double x) {
    // 2^k * exp(r) with |r| <= ln2/2; Taylor degree 11 keeps the relative
    // error near 2e-13, well inside what the f64 training math needs.
    if (x < -708.0) return 0.0;
    if (x > 708.0) return std::numeric_limits<double>::infinity();
    const double inv_ln2 = 1.4426950408889634074;
    const double ln2_hi = 6.93147180369123816490e-01;
    const double ln2_lo = 1.90821492927058770002e-10;
    double kd = std::floor(x * inv_ln2 + 0.5);
    double r = (x - kd * ln2_hi) - kd * ln2_lo;
    double p = 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    uint64_t bits = static_cast<uint64_t>(static_cast<int64_t>(kd) + 1023) << 52;
    double scale;
    std::memcpy(&scale, &bits, sizeof scale);
    return p * scale;
}

double apply_bin(BinOp op, double a, double b) { return detail::bin(op, a, b); }
double apply_un(UnOp op, double x) { return detail::un(op, x); }

double dot(const double* a, const double* b, int n) {
    // 8 independent lanes so the loop vectorizes without reassociation; the
    // combine order is fixed, so the result is identical on every backend.
    double lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    int i = 0;
    for (; i + 8 <= n; i += 8)
        for (int l = 0; l < 8; ++l) lanes[l] += a[i + l] * b[i + l];
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
           ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7])) + tail;
}

#define RFM_DISPATCH(fn, ...)                          \
    do {                                               \
        if (active_backend() == Backend::openmp)       \
            return omp_impl::fn(__VA_ARGS__);          \
        return serial_impl::fn(__VA_ARGS__);           \
    } while (0)

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    RFM_DISPATCH(matmul_nn, a, b, c, m, k, n, acc);
}
void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    RFM_DISPATCH(matmul_nt, a, b, c, m, k, n, acc);
}
void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    RFM_DISPATCH(matmul_tn, a, b, c, m, k, n, acc);
}
void binary_same(BinOp op, const double* a, const double* b, double* out, size_t n) {
    RFM_DISPATCH(binary_same, op, a, b, out, n);
}
void binary_bcast(BinOp op, const double* a, const double* b, double* out,
                  const int* out_dims, const int* a_strides, const int* b_strides,
                  int rank, size_t n) {
    RFM_DISPATCH(binary_bcast, op, a, b, out, out_dims, a_strides, b_strides, rank, n);
}
void reduce_bcast_acc(const double* dy, double* dx_acc, const int* y_dims,
                      const int* x_strides, int rank) {
    RFM_DISPATCH(reduce_bcast_acc, dy, dx_acc, y_dims, x_strides, rank);
}
void unary(UnOp op, const double* a, double* out, size_t n) {
    RFM_DISPATCH(unary, op, a, out, n);
}
void silu_backward_acc(const double* x, const double* dy, double* dx_acc, size_t n) {
    RFM_DISPATCH(silu_backward_acc, x, dy, dx_acc, n);
}
void fma_acc(const double* a, const double* b, double* acc, size_t n) {
    RFM_DISPATCH(fma_acc, a, b, acc, n);
}
void axpy(double alpha, const double* x, double* y, size_t n) {
    RFM_DISPATCH(axpy, alpha, x, y, n);
}
void scale(double alpha, const double* x, double* y, size_t n) {
    RFM_DISPATCH(scale, alpha, x, y, n);
}
void fill(double v, double* x, size_t n) { RFM_DISPATCH(fill, v, x, n); }
double sum_all(const double* x, size_t n) { RFM_DISPATCH(sum_all, x, n); }
void reduce_rows_sum(const double* x, double* out, int rows, int cols, bool acc) {
    RFM_DISPATCH(reduce_rows_sum, x, out, rows, cols, acc);
}
bool all_finite(const double* x, size_t n) { RFM_DISPATCH(all_finite, x, n); }
void softmax_axis(const double* x, double* y, int outer, int axis_len, int inner) {
    RFM_DISPATCH(softmax_axis, x, y, outer, axis_len, inner);
}
void softmax_axis_backward_acc(const double* y, const double* dy, double* dx_acc,
                               int outer, int axis_len, int inner) {
    RFM_DISPATCH(softmax_axis_backward_acc, y, dy, dx_acc, outer, axis_len, inner);
}
void logsumexp_rows(const double* x, double* out, int rows, int cols) {
    RFM_DISPATCH(logsumexp_rows, x, out, rows, cols);
}
void logsumexp_rows_backward_acc(const double* x, const double* lse, const double* dout,
                                 double* dx_acc, int rows, int cols) {
    RFM_DISPATCH(logsumexp_rows_backward_acc, x, lse, dout, dx_acc, rows, cols);
}
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_sigma,
                     int rows, int cols, double eps) {
    RFM_DISPATCH(layer_norm_rows, x, gain, bias, y, xhat, inv_sigma, rows, cols, eps);
}
void layer_norm_rows_backward_acc(const double* dy, const double* xhat,
                                  const double* inv_sigma, const double* gain,
                                  double* dx_acc, double* dgain_acc, double* dbias_acc,
                                  int rows, int cols) {
    RFM_DISPATCH(layer_norm_rows_backward_acc, dy, xhat, inv_sigma, gain, dx_acc, dgain_acc,
                 dbias_acc, rows, cols);
}
void im2col_k3(const double* x, double* out, int B, int T, int F, int C, int stride) {
    RFM_DISPATCH(im2col_k3, x, out, B, T, F, C, stride);
}
void col2im_k3_acc(const double* dcol, double* dx_acc, int B, int T, int F, int C, int stride) {
    RFM_DISPATCH(col2im_k3_acc, dcol, dx_acc, B, T, F, C, stride);
}
void upsample2x(const double* x, double* y, int B, int T, int F, int C) {
    RFM_DISPATCH(upsample2x, x, y, B, T, F, C);
}
void upsample2x_backward_acc(const double* dy, double* dx_acc, int B, int T, int F, int C) {
    RFM_DISPATCH(upsample2x_backward_acc, dy, dx_acc, B, T, F, C);
}
void gather_rows(const double* table, const int* ids, double* out, int n_ids, int cols) {
    RFM_DISPATCH(gather_rows, table, ids, out, n_ids, cols);
}
void scatter_rows_acc(const double* dy, const int* ids, double* dtable_acc, int n_ids, int cols) {
    RFM_DISPATCH(scatter_rows_acc, dy, ids, dtable_acc, n_ids, cols);
}
void slice_cols(const double* x, double* y, int rows, int cols, int c0, int cn) {
    RFM_DISPATCH(slice_cols, x, y, rows, cols, c0, cn);
}
void slice_cols_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int c0, int cn) {
    RFM_DISPATCH(slice_cols_backward_acc, dy, dx_acc, rows, cols, c0, cn);
}
void repeat_rows(const double* x, double* y, int rows, int cols, int times) {
    RFM_DISPATCH(repeat_rows, x, y, rows, cols, times);
}
void repeat_rows_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int times) {
    RFM_DISPATCH(repeat_rows_backward_acc, dy, dx_acc, rows, cols, times);
}
void adam_update(double* p, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2) {
    RFM_DISPATCH(adam_update, p, g, m, v, n, lr, beta1, beta2, eps, bias_corr1, bias_corr2);
}

#undef RFM_DISPATCH

}  // namespace rfm::kernels
