#include "metaco/autodiff.hpp"

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace metaco::ad {

namespace {

thread_local bool g_grad_enabled = true;

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Tensor& t) { return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())}; }
MutMap view(Tensor& t) { return {t.data().data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())}; }

std::string shape_str(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

void require_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a.value().same_shape(b.value())) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.value()) + " vs " +
                                    shape_str(b.value()));
    }
}

template <typename F>
Tensor map_values(const Tensor& a, F f) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

template <typename F>
Tensor zip_values(const Tensor& a, const Tensor& b, F f) {
    Tensor out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw std::invalid_argument("tensor data length does not match shape");
}

double Tensor::item() const {
    if (rows_ != 1 || cols_ != 1) throw std::invalid_argument("item() on non-scalar tensor " + shape_str(*this));
    return data_[0];
}

Var Var::constant(Tensor value) {
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

namespace {
class GradModeScope {
public:
    explicit GradModeScope(bool enabled) : previous_(g_grad_enabled) { g_grad_enabled = enabled; }
    ~GradModeScope() { g_grad_enabled = previous_; }
    GradModeScope(const GradModeScope&) = delete;
    GradModeScope& operator=(const GradModeScope&) = delete;

private:
    bool previous_;
};
}  // namespace

Var make_var(Tensor value, std::vector<Var> inputs, std::function<std::vector<Var>(const Var&)> backward) {
    bool needs = false;
    if (g_grad_enabled) {
        for (const auto& in : inputs) needs = needs || in.requires_grad();
    }
    if (!needs) return Var::constant(std::move(value));
    auto node = std::make_shared<detail::Node>();
    node->value = std::move(value);
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node_);
    node->backward = std::move(backward);
    return Var(std::move(node));
}

Var matmul(const Var& a, const Var& b, bool ta, bool tb) {
    const Tensor& A = a.value();
    const Tensor& B = b.value();
    const std::size_t m = ta ? A.cols() : A.rows();
    const std::size_t k = ta ? A.rows() : A.cols();
    const std::size_t k2 = tb ? B.cols() : B.rows();
    const std::size_t n = tb ? B.rows() : B.cols();
    if (k != k2) throw std::invalid_argument("matmul: inner dimensions differ (" + shape_str(A) + ", " + shape_str(B) + ")");
    Tensor out(m, n);
    auto C = view(out);
    if (!ta && !tb) C.noalias() = view(A) * view(B);
    else if (ta && !tb) C.noalias() = view(A).transpose() * view(B);
    else if (!ta && tb) C.noalias() = view(A) * view(B).transpose();
    else C.noalias() = view(A).transpose() * view(B).transpose();

    return make_var(std::move(out), {a, b}, [a, b, ta, tb](const Var& g) -> std::vector<Var> {
        Var da, db;
        if (!ta && !tb) {
            if (a.requires_grad()) da = matmul(g, b, false, true);
            if (b.requires_grad()) db = matmul(a, g, true, false);
        } else if (ta && !tb) {
            if (a.requires_grad()) da = matmul(b, g, false, true);
            if (b.requires_grad()) db = matmul(a, g, false, false);
        } else if (!ta && tb) {
            if (a.requires_grad()) da = matmul(g, b, false, false);
            if (b.requires_grad()) db = matmul(g, a, true, false);
        } else {
            if (a.requires_grad()) da = matmul(b, g, true, true);
            if (b.requires_grad()) db = matmul(g, a, true, true);
        }
        return {da, db};
    });
}

Var operator+(const Var& a, const Var& b) {
    require_same_shape(a, b, "add");
    return make_var(zip_values(a.value(), b.value(), [](double x, double y) { return x + y; }), {a, b},
                    [](const Var& g) -> std::vector<Var> { return {g, g}; });
}

Var operator-(const Var& a, const Var& b) {
    require_same_shape(a, b, "sub");
    return make_var(zip_values(a.value(), b.value(), [](double x, double y) { return x - y; }), {a, b},
                    [](const Var& g) -> std::vector<Var> { return {g, -g}; });
}

Var operator-(const Var& a) { return -1.0 * a; }

Var operator*(const Var& a, const Var& b) {
    require_same_shape(a, b, "mul");
    return make_var(zip_values(a.value(), b.value(), [](double x, double y) { return x * y; }), {a, b},
                    [a, b](const Var& g) -> std::vector<Var> {
                        Var da, db;
                        if (a.requires_grad()) da = g * b;
                        if (b.requires_grad()) db = g * a;
                        return {da, db};
                    });
}

Var operator*(double c, const Var& a) {
    return make_var(map_values(a.value(), [c](double x) { return c * x; }), {a},
                    [c](const Var& g) -> std::vector<Var> { return {c * g}; });
}

Var add_scalar(const Var& a, double c) {
    return make_var(map_values(a.value(), [c](double x) { return x + c; }), {a},
                    [](const Var& g) -> std::vector<Var> { return {g}; });
}

Var add_row(const Var& a, const Var& row) {
    const Tensor& A = a.value();
    const Tensor& R = row.value();
    if (R.rows() != 1 || R.cols() != A.cols()) {
        throw std::invalid_argument("add_row: expected 1x" + std::to_string(A.cols()) + " row, got " + shape_str(R));
    }
    Tensor out = A;
    view(out).rowwise() += view(R).row(0);
    return make_var(std::move(out), {a, row}, [row](const Var& g) -> std::vector<Var> {
        Var drow;
        if (row.requires_grad()) drow = column_sum(g);
        return {g, drow};
    });
}

Var column_sum(const Var& a) {
    const Tensor& A = a.value();
    Tensor out(1, A.cols());
    view(out).row(0) = view(A).colwise().sum();
    const std::size_t n = A.rows();
    return make_var(std::move(out), {a}, [n](const Var& g) -> std::vector<Var> { return {broadcast_rows(g, n)}; });
}

Var broadcast_rows(const Var& row, std::size_t n) {
    const Tensor& R = row.value();
    if (R.rows() != 1) throw std::invalid_argument("broadcast_rows: expected a single row, got " + shape_str(R));
    Tensor out(n, R.cols());
    view(out).rowwise() = view(R).row(0);
    return make_var(std::move(out), {row}, [](const Var& g) -> std::vector<Var> { return {column_sum(g)}; });
}

Var sum(const Var& a) {
    double s = 0.0;
    for (double v : a.value().data()) s += v;
    const std::size_t r = a.rows(), c = a.cols();
    return make_var(Tensor::scalar(s), {a}, [r, c](const Var& g) -> std::vector<Var> { return {fill(g, r, c)}; });
}

Var fill(const Var& scalar, std::size_t rows, std::size_t cols) {
    const double v = scalar.item();
    return make_var(Tensor(rows, cols, v), {scalar}, [](const Var& g) -> std::vector<Var> { return {sum(g)}; });
}

Var mask_mul(const Var& a, const Tensor& mask) {
    if (!a.value().same_shape(mask)) throw std::invalid_argument("mask_mul: shape mismatch");
    return make_var(zip_values(a.value(), mask, [](double x, double m) { return x * m; }), {a},
                    [mask](const Var& g) -> std::vector<Var> { return {mask_mul(g, mask)}; });
}

Var relu(const Var& a) {
    Tensor mask = map_values(a.value(), [](double x) { return x > 0.0 ? 1.0 : 0.0; });
    Tensor out = map_values(a.value(), [](double x) { return x > 0.0 ? x : 0.0; });
    return make_var(std::move(out), {a}, [mask = std::move(mask)](const Var& g) -> std::vector<Var> {
        return {mask_mul(g, mask)};
    });
}

namespace {
double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}
}  // namespace

Var sigmoid(const Var& a) {
    return make_var(map_values(a.value(), logistic), {a}, [a](const Var& g) -> std::vector<Var> {
        // s' = s (1 - s), with s recomputed from the input so that the rule
        // stays differentiable without a reference back to this node.
        Var s = sigmoid(a);
        return {g * (s * add_scalar(-s, 1.0))};
    });
}

Var neighbor_sum(const Graph& graph, const Var& h) {
    const Tensor& H = h.value();
    if (H.rows() != graph.num_nodes()) {
        throw std::invalid_argument("neighbor_sum: " + std::to_string(H.rows()) + " rows for a graph with " +
                                    std::to_string(graph.num_nodes()) + " nodes");
    }
    const std::size_t width = H.cols();
    Tensor out(H.rows(), width);
    const double* in = H.data().data();
    for (NodeId v = 0; v < graph.num_nodes(); ++v) {
        double* dst = out.data().data() + v * width;
        for (NodeId u : graph.neighbors(v)) {
            const double* src = in + u * width;
            for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
        }
    }
    // The aggregation matrix is symmetric, so the adjoint is the same op.
    return make_var(std::move(out), {h}, [graph](const Var& g) -> std::vector<Var> { return {neighbor_sum(graph, g)}; });
}

std::vector<Var> grad(const Var& output, std::span<const Var> wrt, bool create_graph) {
    if (!output.defined() || output.rows() != 1 || output.cols() != 1) {
        throw std::invalid_argument("grad: output must be a scalar");
    }
    using NodePtr = detail::Node*;
    std::unordered_map<NodePtr, Var> grads;
    std::vector<NodePtr> order;

    if (output.requires_grad()) {
        // Iterative post-order DFS; `order` ends up with inputs before consumers.
        std::unordered_map<NodePtr, bool> visited;
        std::vector<std::pair<NodePtr, std::size_t>> stack{{output.node_.get(), 0}};
        visited[output.node_.get()] = true;
        while (!stack.empty()) {
            auto& [node, next] = stack.back();
            if (next < node->inputs.size()) {
                NodePtr child = node->inputs[next++].get();
                if (child->requires_grad && !visited[child]) {
                    visited[child] = true;
                    stack.emplace_back(child, 0);
                }
            } else {
                order.push_back(node);
                stack.pop_back();
            }
        }

        GradModeScope scope(create_graph);
        grads[output.node_.get()] = Var::constant(Tensor::scalar(1.0));
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodePtr node = *it;
            auto found = grads.find(node);
            if (found == grads.end() || !node->backward) continue;
            const Var g = found->second;
            auto input_grads = node->backward(g);
            for (std::size_t k = 0; k < node->inputs.size(); ++k) {
                NodePtr child = node->inputs[k].get();
                if (!child->requires_grad || !input_grads[k].defined()) continue;
                auto [slot, inserted] = grads.try_emplace(child, input_grads[k]);
                if (!inserted) slot->second = slot->second + input_grads[k];
            }
        }
    }

    std::vector<Var> out;
    out.reserve(wrt.size());
    for (const auto& p : wrt) {
        auto found = p.defined() ? grads.find(p.node_.get()) : grads.end();
        if (found == grads.end()) {
            out.push_back(Var::constant(Tensor(p.rows(), p.cols())));
        } else {
            out.push_back(create_graph ? found->second : found->second.detach());
        }
    }
    return out;
}

std::vector<Tensor> values(std::span<const Var> vars) {
    std::vector<Tensor> out;
    out.reserve(vars.size());
    for (const auto& v : vars) out.push_back(v.value());
    return out;
}

std::vector<Tensor> sgd_step(std::span<const Tensor> params, std::span<const Tensor> grads, double lr) {
    if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: parameter/gradient count mismatch");
    std::vector<Tensor> out;
    out.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i])) throw std::invalid_argument("sgd_step: shape mismatch");
        out.push_back(zip_values(params[i], grads[i], [lr](double p, double g) { return p - lr * g; }));
    }
    return out;
}

std::vector<Var> sgd_step(std::span<const Var> params, std::span<const Var> grads, double lr) {
    if (params.size() != grads.size()) throw std::invalid_argument("sgd_step: parameter/gradient count mismatch");
    std::vector<Var> out;
    out.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        require_same_shape(params[i], grads[i], "sgd_step");
        out.push_back(params[i] - lr * grads[i]);
    }
    return out;
}

AdamState AdamState::zeros_like(std::span<const Tensor> params) {
    AdamState s;
    for (const auto& p : params) {
        s.first_moment.emplace_back(p.rows(), p.cols());
        s.second_moment.emplace_back(p.rows(), p.cols());
    }
    return s;
}

void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads, const AdamHyper& h) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient/state count mismatch");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        const Tensor& g = grads[i];
        Tensor& m = state.first_moment[i];
        Tensor& v = state.second_moment[i];
        if (!p.same_shape(g) || !p.same_shape(m) || !p.same_shape(v)) {
            throw std::invalid_argument("adam_step: shape mismatch");
        }
        for (std::size_t k = 0; k < p.size(); ++k) {
            m[k] = h.beta1 * m[k] + (1.0 - h.beta1) * g[k];
            v[k] = h.beta2 * v[k] + (1.0 - h.beta2) * g[k] * g[k];
            const double m_hat = m[k] / c1;
            const double v_hat = v[k] / c2;
            p[k] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
        }
    }
}

}  // namespace metaco::ad
