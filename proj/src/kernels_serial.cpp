// SPDX-License-Identifier: Apache-2.0
//
// Serial reference kernels. Kept deliberately plain; the OpenMP backend must
// reproduce these bit for bit (see test_kernels).

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "kernels_backends.hpp"
#include "kernels_impl.hpp"

namespace rfm::kernels::serial_impl {

using namespace rfm::kernels::detail;

void matmul_nn(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
    std::vector<double> bt(static_cast<size_t>(n) * k);
    transpose_block(b, bt.data(), k, n, 0, k);
    for (int i = 0; i < m; ++i) {
        const double* arow = a + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            double v = dot(arow, bt.data() + static_cast<size_t>(j) * k, k);
            double* out = c + static_cast<size_t>(i) * n + j;
            *out = acc ? *out + v : v;
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, int m, int k, int n, bool acc) {
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
    transpose_block(a, at.data(), k, m, 0, k);
    transpose_block(b, bt.data(), k, n, 0, k);
    for (int i = 0; i < m; ++i) {
        const double* arow = at.data() + static_cast<size_t>(i) * k;
        for (int j = 0; j < n; ++j) {
            double v = dot(arow, bt.data() + static_cast<size_t>(j) * k, k);
            double* out = c + static_cast<size_t>(i) * n + j;
            *out = acc ? *out + v : v;
        }
    }
}

void binary_same(BinOp op, const double* a, const double* b, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = bin(op, a[i], b[i]);
}

void binary_bcast(BinOp op, const double* a, const double* b, double* out,
                  const int* out_dims, const int* a_strides, const int* b_strides,
                  int rank, size_t n) {
    binary_bcast_range(op, a, b, out, out_dims, a_strides, b_strides, rank, 0, n);
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
    for (size_t i = 0; i < nx; ++i)
        dx_acc[i] += reduce_bcast_one(dy, y_dims, x_strides, y_strides, rank, i);
}

void unary(UnOp op, const double* a, double* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = un(op, a[i]);
}

void silu_backward_acc(const double* x, const double* dy, double* dx_acc, size_t n) {
    for (size_t i = 0; i < n; ++i) dx_acc[i] += dy[i] * silu_grad(x[i]);
}

void fma_acc(const double* a, const double* b, double* acc, size_t n) {
    for (size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void axpy(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, const double* x, double* y, size_t n) {
    for (size_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}

void fill(double v, double* x, size_t n) {
    for (size_t i = 0; i < n; ++i) x[i] = v;
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
    // fixed-size chunks combined in chunk order, so the OpenMP backend can
    // compute partials concurrently and still match
    size_t nchunks = (n + kSumChunk - 1) / kSumChunk;
    double total = 0.0;
    for (size_t ci = 0; ci < nchunks; ++ci)
        total += chunk_sum(x, ci * kSumChunk, std::min(n, (ci + 1) * kSumChunk));
    return total;
}

void reduce_rows_sum(const double* x, double* out, int rows, int cols, bool acc) {
    for (int r = 0; r < rows; ++r) {
        double s = chunk_sum(x + static_cast<size_t>(r) * cols, 0, static_cast<size_t>(cols));
        out[r] = acc ? out[r] + s : s;
    }
}

bool all_finite(const double* x, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i])) return false;
    return true;
}

void softmax_axis(const double* x, double* y, int outer, int axis_len, int inner) {
    for (int o = 0; o < outer; ++o)
        for (int i = 0; i < inner; ++i) {
            size_t base = static_cast<size_t>(o) * axis_len * inner + i;
            softmax_row(x + base, y + base, axis_len, inner);
        }
}

void softmax_axis_backward_acc(const double* y, const double* dy, double* dx_acc,
                               int outer, int axis_len, int inner) {
    for (int o = 0; o < outer; ++o)
        for (int i = 0; i < inner; ++i) {
            size_t base = static_cast<size_t>(o) * axis_len * inner + i;
            softmax_row_backward(y + base, dy + base, dx_acc + base, axis_len, inner);
        }
}

void logsumexp_rows(const double* x, double* out, int rows, int cols) {
    for (int r = 0; r < rows; ++r)
        logsumexp_row(x + static_cast<size_t>(r) * cols, out + r, cols);
}

void logsumexp_rows_backward_acc(const double* x, const double* lse, const double* dout,
                                 double* dx_acc, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        size_t base = static_cast<size_t>(r) * cols;
        for (int c = 0; c < cols; ++c)
            dx_acc[base + c] += dout[r] * fast_exp(x[base + c] - lse[r]);
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_sigma,
                     int rows, int cols, double eps) {
    for (int r = 0; r < rows; ++r) {
        size_t base = static_cast<size_t>(r) * cols;
        layer_norm_row(x + base, gain, bias, y + base, xhat + base, inv_sigma + r, cols, eps);
    }
}

void layer_norm_rows_backward_acc(const double* dy, const double* xhat,
                                  const double* inv_sigma, const double* gain,
                                  double* dx_acc, double* dgain_acc, double* dbias_acc,
                                  int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        size_t base = static_cast<size_t>(r) * cols;
        layer_norm_row_backward(dy + base, xhat + base, inv_sigma[r], gain, dx_acc + base, cols);
    }
    // parameter grads: one column per pass, rows accumulated in ascending order
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

void im2col_k3(const double* x, double* out, int B, int T, int F, int C, int stride) {
    int To = T / stride, Fo = F / stride;
    size_t rows = static_cast<size_t>(B) * To * Fo;
    for (size_t r = 0; r < rows; ++r) {
        int fo = static_cast<int>(r % Fo);
        int to = static_cast<int>((r / Fo) % To);
        int b = static_cast<int>(r / (static_cast<size_t>(To) * Fo));
        im2col_row(x, out + r * 9 * C, b, to, fo, T, F, C, stride);
    }
}

void col2im_k3_acc(const double* dcol, double* dx_acc, int B, int T, int F, int C, int stride) {
    size_t cells = static_cast<size_t>(B) * T * F;
    for (size_t i = 0; i < cells; ++i) {
        int f = static_cast<int>(i % F);
        int t = static_cast<int>((i / F) % T);
        int b = static_cast<int>(i / (static_cast<size_t>(T) * F));
        col2im_cell(dcol, dx_acc, b, t, f, T, F, C, stride);
    }
}

void upsample2x(const double* x, double* y, int B, int T, int F, int C) {
    int T2 = 2 * T, F2 = 2 * F;
    size_t rows = static_cast<size_t>(B) * T2 * F2;
    for (size_t r = 0; r < rows; ++r) {
        int fy = static_cast<int>(r % F2);
        int ty = static_cast<int>((r / F2) % T2);
        int b = static_cast<int>(r / (static_cast<size_t>(T2) * F2));
        const double* src = x + ((static_cast<size_t>(b) * T + ty / 2) * F + fy / 2) * C;
        std::memcpy(y + r * C, src, sizeof(double) * static_cast<size_t>(C));
    }
}

void upsample2x_backward_acc(const double* dy, double* dx_acc, int B, int T, int F, int C) {
    size_t cells = static_cast<size_t>(B) * T * F;
    int T2 = 2 * T, F2 = 2 * F;
    for (size_t i = 0; i < cells; ++i) {
        int f = static_cast<int>(i % F);
        int t = static_cast<int>((i / F) % T);
        int b = static_cast<int>(i / (static_cast<size_t>(T) * F));
        double* dst = dx_acc + i * C;
        for (int dt = 0; dt < 2; ++dt)
            for (int df = 0; df < 2; ++df) {
                const double* src =
                    dy + ((static_cast<size_t>(b) * T2 + 2 * t + dt) * F2 + 2 * f + df) * C;
                for (int c = 0; c < C; ++c) dst[c] += src[c];
            }
    }
}

void gather_rows(const double* table, const int* ids, double* out, int n_ids, int cols) {
    for (int i = 0; i < n_ids; ++i)
        std::memcpy(out + static_cast<size_t>(i) * cols,
                    table + static_cast<size_t>(ids[i]) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void scatter_rows_acc(const double* dy, const int* ids, double* dtable_acc, int n_ids, int cols) {
    // serial in both backends: ids may repeat
    for (int i = 0; i < n_ids; ++i) {
        double* dst = dtable_acc + static_cast<size_t>(ids[i]) * cols;
        const double* src = dy + static_cast<size_t>(i) * cols;
        for (int c = 0; c < cols; ++c) dst[c] += src[c];
    }
}

void slice_cols(const double* x, double* y, int rows, int cols, int c0, int cn) {
    for (int r = 0; r < rows; ++r)
        std::memcpy(y + static_cast<size_t>(r) * cn,
                    x + static_cast<size_t>(r) * cols + c0,
                    sizeof(double) * static_cast<size_t>(cn));
}

void slice_cols_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int c0, int cn) {
    for (int r = 0; r < rows; ++r) {
        double* dst = dx_acc + static_cast<size_t>(r) * cols + c0;
        const double* src = dy + static_cast<size_t>(r) * cn;
        for (int c = 0; c < cn; ++c) dst[c] += src[c];
    }
}

void repeat_rows(const double* x, double* y, int rows, int cols, int times) {
    size_t yrows = static_cast<size_t>(rows) * times;
    for (size_t r = 0; r < yrows; ++r)
        std::memcpy(y + r * cols, x + (r / times) * cols,
                    sizeof(double) * static_cast<size_t>(cols));
}

void repeat_rows_backward_acc(const double* dy, double* dx_acc, int rows, int cols, int times) {
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
    for (size_t i = 0; i < n; ++i)
        adam_one(p, g, m, v, i, lr, beta1, beta2, eps, bias_corr1, bias_corr2);
}

}  // namespace rfm::kernels::serial_impl
