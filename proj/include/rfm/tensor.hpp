// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rfm/check.hpp"
#include "rfm/rng.hpp"

namespace rfm {

using Shape = std::vector<int>;

size_t shape_size(const Shape& s);

namespace autodiff {

// One tape node: the op's output buffer, its gradient, and a closure that
// pushes the gradient into the parents. backward() replays nodes in reverse
// topological order exactly once per call.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // allocated lazily
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward_fn;
    const char* op = "leaf";

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
    bool is_leaf() const { return parents.empty(); }
};

// Ops executed inside a NoGradGuard scope record nothing on the tape.
struct NoGradGuard {
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;

private:
    bool prev_;
};

bool grad_enabled();

}  // namespace autodiff

/// Dense f64 tensor with reverse-mode autodiff. Copies are shallow (shared
/// node); use clone() for a deep copy. All stored values are kept finite:
/// an op producing NaN/Inf throws instead of propagating it.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor ones(Shape shape);
    static Tensor full(Shape shape, double v);
    static Tensor scalar(double v);
    static Tensor from_data(Shape shape, std::vector<double> data);
    static Tensor param(Shape shape, std::vector<double> data);  // requires_grad
    static Tensor gaussian(Shape shape, Rng& rng);
    static Tensor uniform(Shape shape, Rng& rng, double lo, double hi);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return n_->shape; }
    int rank() const { return static_cast<int>(n_->shape.size()); }
    size_t size() const { return n_->value.size(); }
    int dim(int i) const { return n_->shape[static_cast<size_t>(i)]; }

    const std::vector<double>& data() const { return n_->value; }
    std::vector<double>& mutable_data() { return n_->value; }
    double operator[](size_t i) const { return n_->value[i]; }
    double value() const;  // scalar accessor

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool b) { n_->requires_grad = b; }
    bool has_grad() const { return !n_->grad.empty(); }
    const std::vector<double>& grad() const;
    void zero_grad() { n_->grad.clear(); }

    Tensor detach() const;  // deep copy, no tape link, no grad
    Tensor clone() const { return detach(); }

    std::shared_ptr<autodiff::Node> node() const { return n_; }
    explicit Tensor(std::shared_ptr<autodiff::Node> n) : n_(std::move(n)) {}

private:
    std::shared_ptr<autodiff::Node> n_;
};

/// Accumulates d(loss)/d(leaf) into every requires_grad leaf. `loss` must be
/// scalar and on the tape. A second call without zero_grad adds again.
void backward(const Tensor& loss);

// ---- elementwise (trailing-dimension broadcasting) ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor log_op(const Tensor& a);
Tensor sqrt_op(const Tensor& a);
Tensor square(const Tensor& a);
Tensor silu(const Tensor& a);  // the smooth nonlinearity used everywhere: x*sigmoid(x)

// ---- matmul (rank-2) ----
Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k]x[k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // [m,k]x[n,k]^T
Tensor matmul_tn(const Tensor& a, const Tensor& b);  // [k,m]^T x [k,n]

// ---- reductions ----
Tensor sum_all(const Tensor& a);   // -> [1]
Tensor mean_all(const Tensor& a);  // -> [1]
Tensor sum_rows(const Tensor& a);  // [N,C] -> [N,1]

// ---- structured ----
Tensor softmax(const Tensor& a, int axis);
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);
Tensor logsumexp_rows(const Tensor& x);  // [N,C] -> [N,1]

// ---- grid ops: x is [B*T*F, C] position-major ----
Tensor im2col3x3(const Tensor& x, int B, int T, int F, int stride);
Tensor upsample2x_op(const Tensor& x, int B, int T, int F);

// ---- reshaping / assembly ----
Tensor reshape(const Tensor& x, Shape new_shape);  // same element count
Tensor slice_rows(const Tensor& x, int r0, int count);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, int c0, int count);          // rank-2
Tensor concat_cols(const std::vector<Tensor>& parts);           // rank-2
Tensor repeat_rows_op(const Tensor& x, int times);              // rank-2
Tensor gather_rows_op(const Tensor& table, std::vector<int> ids);

}  // namespace rfm
