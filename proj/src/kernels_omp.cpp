// SPDX-License-Identifier: Apache-2.0
//
// OpenMP kernels. Work is only ever split across independent output elements
// or rows, and every reduction keeps the serial backend's fixed order, so the
// output is bit-identical to kernels_serial.cpp for any thread count.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "kernels_backends.hpp"
#include "kernels_impl.hpp"

namespace rfm::kernels::omp_impl {

using namespace rfm::kernels::detail;

namespace {
constexpr size_t kEwChunk = 1 << 15;
using ssize = long long;  // OpenMP-friendly signed loop index
}  // namespace

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    std::vector<double> bt(static_cast<size_t>(n) * k);
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (int r = 0; r < k; ++r) transpose_block(b, bt.data(), k, n, r, r + 1);
#pragma omp for schedule(static)
        for (int i = 0; i < m; ++i) {
            const double* arow = a + static_cast<size_t>(i) * k;
            for (int j = 0; j < n; ++j) {
                double v = dot(arow, bt.data() + static_cast<size_t>(j) * k, k);
                double* out = c + static_cast<size_t>(i) * n + j;
                *out = acc ? *out + v : v;
            }
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            double v = dot(arow, b + static_cast<size_t>(j) * k, k);
            double* out = c + static_cast<size_t>(i) * n + j;
            *out = acc ? *out + v : v;
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    std::vector<double> at(static_cast<size_t>(m) * k);
    std::vector<double> bt(static_cast<size_t>(n) * k);
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (int r = 0; r < k; ++r) {
            transpose_block(a, at.data(), k, m, r, r + 1);
            transpose_block(b, bt.data(), k, n, r, r + 1);
        }
#pragma omp for schedule(static)
        for (int i = 0; i < m; ++i) {
            const double* arow = at.data() + static_cast<size_t>(i) * k;
            for (int j = 0; j < n; ++j) {
                double v = dot(arow, bt.data() + static_cast<size_t>(j) * k, k);
                double* out = c + static_cast<size_t>(i) * n + j;
                *out = acc ? *out + v : v;
            }
        }
    }
}

void binary_same(BinOp op, const double* a, const double* b, double* out, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i)
        out[i] = bin(op, a[i], b[i]);
}

void binary_bcast(BinOp op, const double* a, const double* b, double* out,
                  const int* out_dims, const int* a_strides, const int* b_strides,
                  int rank, size_t n) {
    ssize nchunks = static_cast<ssize>((n + kEwChunk - 1) / kEwChunk);
#pragma omp parallel for schedule(static)
    for (ssize ci = 0; ci < nchunks; ++ci) {
        size_t begin = static_cast<size_t>(ci) * kEwChunk;
        size_t end = std::min(n, begin + kEwChunk);
        binary_bcast_range(op, a, b, out, out_dims, a_strides, b_strides, rank, begin, end);
    }
}

void reduce_bcast_acc(const double* dy, double* dx_acc, const int* y_dims,
                      const int* x_strides, int rank) {
    size_t y_strides[8];
    size_t s = 1;
    for (int d = rank - 1; d >= 0; --d) {
        y_strides[d] = s;
        s *= static_cast<size_t>(y_dims[d]);
    }
    size_t nx = 1;
    for (int d = 0; d < rank; ++d)
        if (x_strides[d] != 0) nx *= static_cast<size_t>(y_dims[d]);
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(nx); ++i)
        dx_acc[i] += reduce_bcast_one(dy, y_dims, x_strides, y_strides, rank,
                                      static_cast<size_t>(i));
}

void unary(UnOp op, const double* a, double* out, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) out[i] = un(op, a[i]);
}

void silu_backward_acc(const double* x, const double* dy, double* dx_acc, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) dx_acc[i] += dy[i] * silu_grad(x[i]);
}

void fma_acc(const double* a, const double* b, double* acc, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) acc[i] += a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) y[i] += alpha * x[i];
}

void scale(double alpha, const double* x, double* y, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) y[i] = alpha * x[i];
}

void fill(double v, double* x, size_t n) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i) x[i] = v;
}

namespace {
double chunk_sum(const double* x, size_t begin, size_t end) {
    double lanes[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    size_t i = begin;
    for (; i + 8 <= end; i += 8)
        for (int l = 0; l < 8; ++l) lanes[l] += x[i + l];
    double tail = 0.0;
    for (; i < end; ++i) tail += x[i];
    return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) +
           ((lanes[4] + lanes[5]) + (lanes[6] + lanes[7])) + tail;
}
}  // namespace

double sum_all(const double* x, size_t n) {
    size_t nchunks = (n + kSumChunk - 1) / kSumChunk;
    std::vector<double> partial(nchunks);
#pragma omp parallel for schedule(static)
    for (ssize ci = 0; ci < static_cast<ssize>(nchunks); ++ci)
        partial[ci] = chunk_sum(x, static_cast<size_t>(ci) * kSumChunk,
                                std::min(n, (static_cast<size_t>(ci) + 1) * kSumChunk));
    double total = 0.0;
    for (size_t ci = 0; ci < nchunks; ++ci) total += partial[ci];
    return total;
}

void reduce_rows_sum(const double* x, double* out, int rows, int cols, bool acc) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        double s = chunk_sum(x + static_cast<size_t>(r) * cols, 0, static_cast<size_t>(cols));
        out[r] = acc ? out[r] + s : s;
    }
}

bool all_finite(const double* x, size_t n) {
    bool ok = true;
    ssize nchunks = static_cast<ssize>((n + kEwChunk - 1) / kEwChunk);
#pragma omp parallel for schedule(static)
    for (ssize ci = 0; ci < nchunks; ++ci) {
        size_t begin = static_cast<size_t>(ci) * kEwChunk;
        size_t end = std::min(n, begin + kEwChunk);
        bool local = true;
        for (size_t i = begin; i < end; ++i)
            if (!std::isfinite(x[i])) { local = false; break; }
        if (!local) {
#pragma omp atomic write
            ok = false;
        }
    }
    return ok;
}

void softmax_axis(const double* x, double* y, int outer, int axis_len, int inner) {
    ssize rows = static_cast<ssize>(outer) * inner;
#pragma omp parallel for schedule(static)
    for (ssize r = 0; r < rows; ++r) {
        int o = static_cast<int>(r / inner);
        int i = static_cast<int>(r % inner);
        size_t base = static_cast<size_t>(o) * axis_len * inner + i;
        softmax_row(x + base, y + base, axis_len, inner);
    }
}

void softmax_axis_backward_acc(const double* y, const double* dy, double* dx_acc,
                               int outer, int axis_len, int inner) {
    ssize rows = static_cast<ssize>(outer) * inner;
#pragma omp parallel for schedule(static)
    for (ssize r = 0; r < rows; ++r) {
        int o = static_cast<int>(r / inner);
        int i = static_cast<int>(r % inner);
        size_t base = static_cast<size_t>(o) * axis_len * inner + i;
        softmax_row_backward(y + base, dy + base, dx_acc + base, axis_len, inner);
    }
}

void logsumexp_rows(const double* x, double* out, int rows, int cols) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r)
        logsumexp_row(x + static_cast<size_t>(r) * cols, out + r, cols);
}

void logsumexp_rows_backward_acc(const double* x, const double* lse, const double* dout,
                                 double* dx_acc, int rows, int cols) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        size_t base = static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c)
            dx_acc[base + c] += dout[r] * fast_exp(x[base + c] - lse[r]);
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_sigma,
                     int rows, int cols, double eps) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        size_t base = static_cast<size_t>(r) * cols;
        layer_norm_row(x + base, gain, bias, y + base, xhat + base, inv_sigma + r, cols, eps);
    }
}

void layer_norm_rows_backward_acc(const double* dy, const double* xhat,
                                  const double* inv_sigma, const double* gain,
                                  double* dx_acc, double* dgain_acc, double* dbias_acc,
                                  int rows, int cols) {
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (int r = 0; r < rows; ++r) {
            size_t base = static_cast<size_t>(r) * cols;
            layer_norm_row_backward(dy + base, xhat + base, inv_sigma[r], gain,
                                    dx_acc + base, cols);
        }
#pragma omp for schedule(static)
        for (int c = 0; c < cols; ++c) {
            double dg = 0.0, db = 0.0;
            for (int r = 0; r < rows; ++r) {
                size_t o = static_cast<size_t>(r) * cols + c;
                dg += dy[o] * xhat[o];
                db += dy[o];
            }
            dgain_acc[c] += dg;
            dbias_acc[c] += db;
        }
    }
}

void im2col_k3(const double* x, double* out, int B, int T, int F, int C, int stride) {
    int To = T / stride, Fo = F / stride;
    ssize rows = static_cast<ssize>(B) * To * Fo;
#pragma omp parallel for schedule(static)
    for (ssize r = 0; r < rows; ++r) {
        int fo = static_cast<int>(r % Fo);
        int to = static_cast<int>((r / Fo) % To);
        int b = static_cast<int>(r / (static_cast<ssize>(To) * Fo));
        im2col_row(x, out + static_cast<size_t>(r) * 9 * C, b, to, fo, T, F, C, stride);
    }
}

void col2im_k3_acc(const double* dcol, double* dx_acc, int B, int T, int F, int C, int stride) {
    ssize cells = static_cast<ssize>(B) * T * F;
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < cells; ++i) {
        int f = static_cast<int>(i % F);
        int t = static_cast<int>((i / F) % T);
        int b = static_cast<int>(i / (static_cast<ssize>(T) * F));
        col2im_cell(dcol, dx_acc, b, t, f, T, F, C, stride);
    }
}

void upsample2x(const double* x, double* y, int B, int T, int F, int C) {
    int T2 = 2 * T, F2 = 2 * F;
    ssize rows = static_cast<ssize>(B) * T2 * F2;
#pragma omp parallel for schedule(static)
    for (ssize r = 0; r < rows; ++r) {
        int fy = static_cast<int>(r % F2);
        int ty = static_cast<int>((r / F2) % T2);
        int b = static_cast<int>(r / (static_cast<ssize>(T2) * F2));
        const double* src = x + ((static_cast<size_t>(b) * T + ty / 2) * F + fy / 2) * C;
        std::memcpy(y + static_cast<size_t>(r) * C, src, sizeof(double) * static_cast<size_t>(C));
    }
}

void upsample2x_backward_acc(const double* dy, double* dx_acc, int B, int T, int F, int C) {
    ssize cells = static_cast<ssize>(B) * T * F;
    int T2 = 2 * T, F2 = 2 * F;
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < cells; ++i) {
        int f = static_cast<int>(i % F);
        int t = static_cast<int>((i / F) % T);
        int b = static_cast<int>(i / (static_cast<ssize>(T) * F));
        double* dst = dx_acc + static_cast<size_t>(i) * C;
        for (int dt = 0; dt < 2; ++dt)
            for (int df = 0; df < 2; ++df) {
                const double* src =
                    dy + ((static_cast<size_t>(b) * T2 + 2 * t + dt) * F2 + 2 * f + df) * C;
                for (int c = 0; c < C; ++c) dst[c] += src[c];
            }
    }
}

void gather_rows(const double* table, const int* ids, double* out, int n_ids, int cols) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n_ids; ++i)
        std::memcpy(out + static_cast<size_t>(i) * cols,
                    table + static_cast<size_t>(ids[i]) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void scatter_rows_acc(const double* dy, const int* ids, double* dtable_acc, int n_ids, int cols) {
    // ids may repeat; stays serial to keep accumulation order fixed
    for (int i = 0; i < n_ids; ++i) {
        double* dst = dtable_acc + static_cast<size_t>(ids[i]) * cols;
        const double* src = dy + static_cast<size_t>(i) * cols;
        for (int c = 0; c < cols; ++c) dst[c] += src[c];
    }
}

void slice_cols(const double* x, double* y, int rows, int cols, int c0, int cn) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r)
        std::memcpy(y + static_cast<size_t>(r) * cn,
                    x + static_cast<size_t>(r) * cols + c0,
                    sizeof(double) * static_cast<size_t>(cn));
}

void slice_cols_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int c0, int cn) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        double* dst = dx_acc + static_cast<size_t>(r) * cols + c0;
        const double* src = dy + static_cast<size_t>(r) * cn;
        for (int c = 0; c < cn; ++c) dst[c] += src[c];
    }
}

void repeat_rows(const double* x, double* y, int rows, int cols, int times) {
    ssize yrows = static_cast<ssize>(rows) * times;
#pragma omp parallel for schedule(static)
    for (ssize r = 0; r < yrows; ++r)
        std::memcpy(y + static_cast<size_t>(r) * cols,
                    x + (static_cast<size_t>(r) / times) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void repeat_rows_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int times) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) {
        double* dst = dx_acc + static_cast<size_t>(r) * cols;
        for (int t = 0; t < times; ++t) {
            const double* src = dy + (static_cast<size_t>(r) * times + t) * cols;
            for (int c = 0; c < cols; ++c) dst[c] += src[c];
        }
    }
}

void adam_update(double* p, const double* g, double* m, double* v, size_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2) {
#pragma omp parallel for schedule(static)
    for (ssize i = 0; i < static_cast<ssize>(n); ++i)
        adam_one(p, g, m, v, static_cast<size_t>(i), lr, beta1, beta2, eps,
                 bias_corr1, bias_corr2);
}

}  // namespace rfm::kernels::omp_impl
