#pragma once

// Dense 2-D tensors with tape-free reverse-mode differentiation.
//
// Every operation on a Var that depends on a parameter records a node holding
// its forward value and a backward rule. The backward rules are themselves
// written with Var operations, so calling grad(..., create_graph=true) yields
// gradients that can be differentiated again (reverse-over-reverse). This is
// what the meta-gradient through an inner gradient step needs.

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "metaco/graph.hpp"

namespace metaco::ad {

/// Row-major matrix of doubles. Scalars are 1x1.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);
    static Tensor scalar(double v) { return Tensor(1, 1, v); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    std::array<std::size_t, 2> shape() const { return {rows_, cols_}; }
    bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& vector() const { return data_; }

    /// Value of a 1x1 tensor; throws otherwise.
    double item() const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

class Var;

namespace detail {
struct Node {
    Tensor value;
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> inputs;
    // Maps the gradient w.r.t. this node's output to gradients w.r.t. each
    // input (an empty Var where the input needs none).
    std::function<std::vector<Var>(const Var&)> backward;
};
}  // namespace detail

class Var {
public:
    Var() = default;
    static Var constant(Tensor value);
    static Var parameter(Tensor value);

    const Tensor& value() const { return node_->value; }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    bool requires_grad() const { return node_ && node_->requires_grad; }
    bool defined() const { return static_cast<bool>(node_); }
    double item() const { return node_->value.item(); }

    /// Same value, cut from the recorded graph.
    Var detach() const { return constant(value()); }

private:
    explicit Var(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
    friend Var make_var(Tensor, std::vector<Var>, std::function<std::vector<Var>(const Var&)>);
    friend std::vector<Var> grad(const Var&, std::span<const Var>, bool);

    std::shared_ptr<detail::Node> node_;
};

/// Records an op node when gradient recording is on and some input requires
/// a gradient; otherwise returns a constant.
Var make_var(Tensor value, std::vector<Var> inputs, std::function<std::vector<Var>(const Var&)> backward);

bool grad_enabled();

/// Disables recording for its lifetime.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

// C = op(A) * op(B), op = optional transpose.
Var matmul(const Var& a, const Var& b, bool transpose_a = false, bool transpose_b = false);
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator-(const Var& a);
/// Elementwise product of equal shapes.
Var operator*(const Var& a, const Var& b);
Var operator*(double c, const Var& a);
Var add_scalar(const Var& a, double c);
/// a (n x m) + row (1 x m) added to every row.
Var add_row(const Var& a, const Var& row);
/// Column sums, n x m -> 1 x m.
Var column_sum(const Var& a);
/// 1 x m -> n x m by repeating the row.
Var broadcast_rows(const Var& row, std::size_t n);
/// Sum of all entries, -> 1x1.
Var sum(const Var& a);
/// 1x1 -> rows x cols filled with the scalar.
Var fill(const Var& scalar, std::size_t rows, std::size_t cols);
Var relu(const Var& a);
/// Elementwise product with a constant 0/1 mask.
Var mask_mul(const Var& a, const Tensor& mask);
Var sigmoid(const Var& a);
/// Row v of the result is the sum of rows u over neighbors u of v.
Var neighbor_sum(const Graph& g, const Var& h);

/// Reverse-mode gradients of a 1x1 `output` w.r.t. each of `wrt`. Parameters
/// the output does not depend on get a zero tensor of matching shape. With
/// create_graph the returned gradients are themselves recorded and can be
/// differentiated again.
std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph = false);

/// Gradient of a scalar that was built from recorded gradients (for example
/// a loss evaluated at theta - alpha * grad(l(theta))). Identical to grad();
/// the name marks call sites that rely on second-order terms.
inline std::vector<Var> grad_of_grad(const Var& meta_output, std::span<const Var> wrt) {
    return grad(meta_output, wrt, false);
}

std::vector<Tensor> values(std::span<const Var> vars);

/// theta - lr * g, elementwise.
std::vector<Tensor> sgd_step(std::span<const Tensor> params, std::span<const Tensor> grads, double lr);
/// Differentiable variant used for the inner adaptation step.
std::vector<Var> sgd_step(std::span<const Var> params, std::span<const Var> grads, double lr);

struct AdamState {
    std::vector<Tensor> first_moment;
    std::vector<Tensor> second_moment;
    long long step = 0;

    static AdamState zeros_like(std::span<const Tensor> params);
};

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// Bias-corrected Adam update, in place on params and state.
void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads, const AdamHyper& hyper);

}  // namespace metaco::ad
