// SPDX-License-Identifier: Apache-2.0
//
// Shared per-element / per-row bodies for the kernel backends. Both backends
// call these so serial and OpenMP results are bit-identical: parallelism only
// ever splits independent output elements or rows.
#pragma once

#include "rfm/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <vector>

namespace rfm::kernels::detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + fast_exp(-x)); }

inline double silu(double x) { return x * sigmoid(x); }

inline double silu_grad(double x) {
    double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

inline double un(UnOp op, double x) {
    switch (op) {
        case UnOp::neg: return -x;
        case UnOp::exp: return fast_exp(x);
        case UnOp::log: return std::log(x);
        case UnOp::sqrt: return std::sqrt(x);
        case UnOp::silu: return silu(x);
        case UnOp::square: return x * x;
    }
    return 0.0;
}

inline double bin(BinOp op, double a, double b) {
    switch (op) {
        case BinOp::add: return a + b;
        case BinOp::sub: return a - b;
        case BinOp::mul: return a * b;
        case BinOp::div: return a / b;
    }
    return 0.0;
}

// ---- broadcast index walking ----------------------------------------------

struct BcastCursor {
    int rank;
    const int* dims;
    const int* a_strides;
    const int* b_strides;
    int coord[8];
    size_t a_off = 0, b_off = 0;

    void seek(size_t flat) {
        a_off = b_off = 0;
        for (int d = rank - 1; d >= 0; --d) {
            coord[d] = static_cast<int>(flat % static_cast<size_t>(dims[d]));
            flat /= static_cast<size_t>(dims[d]);
            a_off += static_cast<size_t>(coord[d]) * a_strides[d];
            b_off += static_cast<size_t>(coord[d]) * b_strides[d];
        }
    }

    void advance() {
        for (int d = rank - 1; d >= 0; --d) {
            ++coord[d];
            a_off += a_strides[d];
            b_off += b_strides[d];
            if (coord[d] < dims[d]) return;
            coord[d] = 0;
            a_off -= static_cast<size_t>(dims[d]) * a_strides[d];
            b_off -= static_cast<size_t>(dims[d]) * b_strides[d];
        }
    }
};

inline void binary_bcast_range(BinOp op, const double* a, const double* b, double* out,
                               const int* dims, const int* as, const int* bs, int rank,
                               size_t begin, size_t end) {
    BcastCursor cur{rank, dims, as, bs, {}, 0, 0};
    cur.seek(begin);
    for (size_t i = begin; i < end; ++i) {
        out[i] = bin(op, a[cur.a_off], b[cur.b_off]);
        cur.advance();
    }
}

// one x element of a broadcast input: serial sum of dy over the broadcast axes
inline double reduce_bcast_one(const double* dy, const int* y_dims, const int* x_strides,
                               const size_t* y_strides, int rank, size_t x_flat) {
    // decompose x_flat over the non-broadcast axes
    int coord[8] = {0};
    size_t rem = x_flat;
    for (int d = rank - 1; d >= 0; --d) {
        if (x_strides[d] != 0) {
            int xd = y_dims[d];
            coord[d] = static_cast<int>(rem % static_cast<size_t>(xd));
            rem /= static_cast<size_t>(xd);
        }
    }
    size_t base = 0;
    for (int d = 0; d < rank; ++d) base += static_cast<size_t>(coord[d]) * y_strides[d];

    // odometer over broadcast axes
    double s = 0.0;
    int bc[8] = {0};
    size_t off = base;
    for (;;) {
        s += dy[off];
        int d = rank - 1;
        for (; d >= 0; --d) {
            if (x_strides[d] != 0) continue;
            ++bc[d];
            off += y_strides[d];
            if (bc[d] < y_dims[d]) break;
            bc[d] = 0;
            off -= static_cast<size_t>(y_dims[d]) * y_strides[d];
        }
        if (d < 0) break;
    }
    return s;
}

// ---- row bodies -------------------------------------------------------------

inline void softmax_row(const double* x, double* y, int len, int stride) {
    double m = x[0];
    for (int l = 1; l < len; ++l) m = std::max(m, x[l * static_cast<size_t>(stride)]);
    double s = 0.0;
    for (int l = 0; l < len; ++l) {
        double e = fast_exp(x[l * static_cast<size_t>(stride)] - m);
        y[l * static_cast<size_t>(stride)] = e;
        s += e;
    }
    double inv = 1.0 / s;
    for (int l = 0; l < len; ++l) y[l * static_cast<size_t>(stride)] *= inv;
}

inline void softmax_row_backward(const double* y, const double* dy, double* dx_acc,
                                 int len, int stride) {
    double dot_dy_y = 0.0;
    for (int l = 0; l < len; ++l) {
        size_t o = l * static_cast<size_t>(stride);
        dot_dy_y += dy[o] * y[o];
    }
    for (int l = 0; l < len; ++l) {
        size_t o = l * static_cast<size_t>(stride);
        dx_acc[o] += (dy[o] - dot_dy_y) * y[o];
    }
}

inline void layer_norm_row(const double* x, const double* gain, const double* bias,
                           double* y, double* xhat, double* inv_sigma_out,
                           int cols, double eps) {
    double mu = 0.0;
    for (int c = 0; c < cols; ++c) mu += x[c];
    mu /= cols;
    double var = 0.0;
    for (int c = 0; c < cols; ++c) {
        double d = x[c] - mu;
        var += d * d;
    }
    var /= cols;
    double inv_sigma = 1.0 / std::sqrt(var + eps);
    *inv_sigma_out = inv_sigma;
    for (int c = 0; c < cols; ++c) {
        double h = (x[c] - mu) * inv_sigma;
        xhat[c] = h;
        y[c] = gain[c] * h + bias[c];
    }
}

inline void layer_norm_row_backward(const double* dy, const double* xhat, double inv_sigma,
                                    const double* gain, double* dx_acc, int cols) {
    double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
    for (int c = 0; c < cols; ++c) {
        double dxh = dy[c] * gain[c];
        mean_dxhat += dxh;
        mean_dxhat_xhat += dxh * xhat[c];
    }
    mean_dxhat /= cols;
    mean_dxhat_xhat /= cols;
    for (int c = 0; c < cols; ++c) {
        double dxh = dy[c] * gain[c];
        dx_acc[c] += inv_sigma * (dxh - mean_dxhat - xhat[c] * mean_dxhat_xhat);
    }
}

inline void logsumexp_row(const double* x, double* out, int cols) {
    double m = x[0];
    for (int c = 1; c < cols; ++c) m = std::max(m, x[c]);
    double s = 0.0;
    for (int c = 0; c < cols; ++c) s += fast_exp(x[c] - m);
    *out = m + std::log(s);
}

// one output row of im2col: 3x3 patch around (to, fo), zero padded
inline void im2col_row(const double* x, double* out, int b, int to, int fo,
                       int T, int F, int C, int stride) {
    for (int dt = 0; dt < 3; ++dt) {
        int t = to * stride + dt - 1;
        for (int df = 0; df < 3; ++df) {
            int f = fo * stride + df - 1;
            double* dst = out + (static_cast<size_t>(dt) * 3 + df) * C;
            if (t < 0 || t >= T || f < 0 || f >= F) {
                std::memset(dst, 0, sizeof(double) * static_cast<size_t>(C));
            } else {
                const double* src = x + ((static_cast<size_t>(b) * T + t) * F + f) * C;
                std::memcpy(dst, src, sizeof(double) * static_cast<size_t>(C));
            }
        }
    }
}

// gradient of im2col for one input cell (b,t,f): gather from the <=9 patch
// slots that read it, in fixed (dt, df) order
inline void col2im_cell(const double* dcol, double* dx_acc, int b, int t, int f,
                        int T, int F, int C, int stride) {
    int To = (stride == 1) ? T : T / stride;
    int Fo = (stride == 1) ? F : F / stride;
    double* dst = dx_acc + ((static_cast<size_t>(b) * T + t) * F + f) * C;
    for (int dt = 0; dt < 3; ++dt) {
        int num_t = t + 1 - dt;
        if (num_t < 0 || num_t % stride != 0) continue;
        int to = num_t / stride;
        if (to >= To) continue;
        for (int df = 0; df < 3; ++df) {
            int num_f = f + 1 - df;
            if (num_f < 0 || num_f % stride != 0) continue;
            int fo = num_f / stride;
            if (fo >= Fo) continue;
            const double* src = dcol + (((static_cast<size_t>(b) * To + to) * Fo + fo) * 9 +
                                        static_cast<size_t>(dt) * 3 + df) * C;
            for (int c = 0; c < C; ++c) dst[c] += src[c];
        }
    }
}

// transpose src[r, c] (r < rows, c < cols) into dst[c, r]
inline void transpose_block(const double* src, double* dst, int rows, int cols,
                            int r0, int r1) {
    for (int r = r0; r < r1; ++r)
        for (int c = 0; c < cols; ++c)
            dst[static_cast<size_t>(c) * rows + r] = src[static_cast<size_t>(r) * cols + c];
}

inline void adam_one(double* p, const double* g, double* m, double* v, size_t i,
                     double lr, double b1, double b2, double eps, double bc1, double bc2) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    double mhat = m[i] / bc1;
    double vhat = v[i] / bc2;
    p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
}

constexpr size_t kSumChunk = 4096;

}  // namespace rfm::kernels::detail
