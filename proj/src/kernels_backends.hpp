// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rfm/kernels.hpp"

// Both backends implement this exact set; kernels.cpp dispatches.
#define RFM_DECLARE_KERNEL_BACKEND(ns)                                                        \
    namespace rfm::kernels::ns {                                                              \
    void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc);\
    void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc);\
    void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc);\
    void binary_same(BinOp op, const double* a, const double* b, double* out, size_t n);       \
    void binary_bcast(BinOp op, const double* a, const double* b, double* out,                 \
                      const int* out_dims, const int* a_strides, const int* b_strides,         \
                      int rank, size_t n);                                                     \
    void reduce_bcast_acc(const double* dy, double* dx_acc, const int* y_dims,                 \
                          const int* x_strides, int rank);                                     \
    void unary(UnOp op, const double* a, double* out, size_t n);                               \
    void silu_backward_acc(const double* x, const double* dy, double* dx_acc, size_t n);       \
    void fma_acc(const double* a, const double* b, double* acc, size_t n);                     \
    void axpy(double alpha, const double* x, double* y, size_t n);                             \
    void scale(double alpha, const double* x, double* y, size_t n);                            \
    void fill(double v, double* x, size_t n);                                                  \
    double sum_all(const double* x, size_t n);                                                 \
    void reduce_rows_sum(const double* x, double* out, int rows, int cols, bool acc);          \
    bool all_finite(const double* x, size_t n);                                                \
    void softmax_axis(const double* x, double* y, int outer, int axis_len, int inner);         \
    void softmax_axis_backward_acc(const double* y, const double* dy, double* dx_acc,          \
                                   int outer, int axis_len, int inner);                        \
    void logsumexp_rows(const double* x, double* out, int rows, int cols);                     \
    void logsumexp_rows_backward_acc(const double* x, const double* lse, const double* dout,   \
                                     double* dx_acc, int rows, int cols);                      \
    void layer_norm_rows(const double* x, const double* gain, const double* bias,              \
                         double* y, double* xhat, double* inv_sigma,                           \
                         int rows, int cols, double eps);                                      \
    void layer_norm_rows_backward_acc(const double* dy, const double* xhat,                    \
                                      const double* inv_sigma, const double* gain,             \
                                      double* dx_acc, double* dgain_acc, double* dbias_acc,    \
                                      int rows, int cols);                                     \
    void im2col_k3(const double* x, double* out, int B, int T, int F, int C, int stride);      \
    void col2im_k3_acc(const double* dcol, double* dx_acc, int B, int T, int F, int C,         \
                       int stride);                                                            \
    void upsample2x(const double* x, double* y, int B, int T, int F, int C);                   \
    void upsample2x_backward_acc(const double* dy, double* dx_acc, int B, int T, int F, int C);\
    void gather_rows(const double* table, const int* ids, double* out, int n_ids, int cols);   \
    void scatter_rows_acc(const double* dy, const int* ids, double* dtable_acc, int n_ids,     \
                          int cols);                                                           \
    void slice_cols(const double* x, double* y, int rows, int cols, int c0, int cn);           \
    void slice_cols_backward_acc(const double* dy, double* dx_acc, int rows, int cols,         \
                                 int c0, int cn);                                              \
    void repeat_rows(const double* x, double* y, int rows, int cols, int times);               \
    void repeat_rows_backward_acc(const double* dy, double* dx_acc, int rows, int cols,        \
                                  int times);                                                  \
    void adam_update(double* p, const double* g, double* m, double* v, size_t n,               \
                     double lr, double beta1, double beta2, double eps,                        \
                     double bias_corr1, double bias_corr2);                                    \
    }

RFM_DECLARE_KERNEL_BACKEND(serial_impl)
RFM_DECLARE_KERNEL_BACKEND(omp_impl)
