#include <doctest.h>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metaco/autodiff.hpp"

using namespace metaco;
using namespace metaco::ad;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Tensor t(r, c);
    for (auto& v : t.data()) v = rng.uniform(-scale, scale);
    return t;
}

std::vector<double> flatten(const std::vector<Tensor>& ts) {
    std::vector<double> out;
    for (const auto& t : ts) out.insert(out.end(), t.data().begin(), t.data().end());
    return out;
}

std::vector<Tensor> unflatten(const std::vector<double>& flat, const std::vector<Tensor>& like) {
    std::vector<Tensor> out;
    std::size_t p = 0;
    for (const auto& t : like) {
        Tensor u(t.rows(), t.cols());
        for (auto& v : u.data()) v = flat[p++];
        out.push_back(std::move(u));
    }
    return out;
}

using ScalarFn = std::function<Var(const std::vector<Var>&)>;

/// Reverse-mode gradient and its finite-difference counterpart.
double gradient_error(const ScalarFn& f, const std::vector<Tensor>& at) {
    std::vector<Var> vars;
    for (const auto& t : at) vars.push_back(Var::parameter(t));
    auto g = grad(f(vars), vars);
    std::vector<Tensor> gt;
    for (const auto& v : g) gt.push_back(v.value());
    auto fd = oracle::finite_diff(
        [&](const std::vector<double>& flat) {
            std::vector<Var> cs;
            for (auto& t : unflatten(flat, at)) cs.push_back(Var::constant(t));
            return f(cs).item();
        },
        flatten(at));
    return oracle::max_rel_err(flatten(gt), fd);
}

}  // namespace

TEST_CASE("scalar derivatives") {
    Var x = Var::parameter(Tensor::scalar(3.0));
    CHECK(grad(x * x, std::vector<Var>{x})[0].item() == doctest::Approx(6.0));

    Var y = Var::parameter(Tensor::scalar(2.0));
    std::vector<Var> wrt{y};
    auto g = grad(y * y * y, wrt, true);
    CHECK(g[0].item() == doctest::Approx(12.0));
    CHECK(grad_of_grad(g[0], wrt)[0].item() == doctest::Approx(12.0));
}

TEST_CASE("disconnected parameters get zero gradients") {
    Var a = Var::parameter(Tensor(2, 3, 1.0));
    Var b = Var::parameter(Tensor(4, 1, 1.0));
    auto g = grad(sum(a), std::vector<Var>{a, b});
    CHECK(g[1].value() == Tensor(4, 1, 0.0));
    CHECK(g[0].value() == Tensor(2, 3, 1.0));
}

TEST_CASE("grad needs a scalar output") {
    Var a = Var::parameter(Tensor(2, 2, 1.0));
    CHECK_THROWS_AS(grad(a * a, std::vector<Var>{a}), std::invalid_argument);
}

TEST_CASE("no-grad mode records nothing") {
    Var a = Var::parameter(Tensor(2, 2, 1.0));
    {
        NoGradGuard guard;
        CHECK_FALSE(grad_enabled());
        CHECK_FALSE((a * a).requires_grad());
    }
    CHECK(grad_enabled());
    CHECK((a * a).requires_grad());
}

TEST_CASE("each primitive matches finite differences") {
    Rng rng(41);
    auto g = gen_er(6, 0.5, 3);
    std::vector<ScalarFn> fns{
        [](const std::vector<Var>& v) { return sum(sigmoid(matmul(v[0], v[1]))); },
        [](const std::vector<Var>& v) { return sum(matmul(v[0], v[0], true, false) * matmul(v[0], v[0], true, false)); },
        [](const std::vector<Var>& v) { return sum(matmul(v[1], v[1], false, true)); },
        [](const std::vector<Var>& v) { return sum(sigmoid(add_row(v[0], column_sum(v[0])))); },
        [](const std::vector<Var>& v) { return sum(broadcast_rows(column_sum(v[0] * v[0]), 6) * v[0]); },
        [](const std::vector<Var>& v) { return sum(fill(sum(v[1]), 2, 2)) * sum(v[1]); },
        [](const std::vector<Var>& v) { return sum(relu(add_scalar(v[0], 0.1)) * v[0]); },
        [](const std::vector<Var>& v) { return sum((2.5 * v[0]) - (-v[0]) * v[0]); },
        [&g](const std::vector<Var>& v) { return sum(v[2] * neighbor_sum(g, sigmoid(v[2]))); },
    };
    for (std::size_t k = 0; k < fns.size(); ++k) {
        std::vector<Tensor> at{random_tensor(rng, 6, 3), random_tensor(rng, 3, 2), random_tensor(rng, 6, 2)};
        CAPTURE(k);
        CHECK(gradient_error(fns[k], at) < 1e-6);
    }
}

TEST_CASE("mask_mul passes gradients only through the mask") {
    Tensor mask(1, 3);
    mask[0] = 1;
    mask[2] = 1;
    Var a = Var::parameter(Tensor(1, 3, 2.0));
    auto g = grad(sum(mask_mul(a, mask)), std::vector<Var>{a});
    CHECK(g[0].value().vector() == std::vector<double>{1, 0, 1});
}

TEST_CASE("second-order gradients match finite differences of the gradient") {
    Rng rng(43);
    auto g = gen_er(7, 0.5, 9);
    for (int t = 0; t < 10; ++t) {
        std::vector<Tensor> at{random_tensor(rng, 7, 2), random_tensor(rng, 2, 1)};
        // phi(w) = || d/dw f(w) ||^2 with f a small graph network
        ScalarFn f = [&g](const std::vector<Var>& v) {
            return sum(sigmoid(matmul(neighbor_sum(g, v[0]), v[1])));
        };
        ScalarFn phi = [&f](const std::vector<Var>& v) {
            auto gr = grad(f(v), v, true);
            return sum(gr[0] * gr[0]) + sum(gr[1] * gr[1]);
        };
        // The FD path runs phi on constants, so record parameters there too.
        std::vector<Var> vars;
        for (const auto& x : at) vars.push_back(Var::parameter(x));
        auto got = grad(phi(vars), vars);
        std::vector<Tensor> gt{got[0].value(), got[1].value()};
        auto fd = oracle::finite_diff(
            [&](const std::vector<double>& flat) {
                std::vector<Var> ps;
                for (auto& x : unflatten(flat, at)) ps.push_back(Var::parameter(x));
                return phi(ps).item();
            },
            flatten(at));
        CHECK(oracle::max_rel_err(flatten(gt), fd) < 1e-6);
    }
}

TEST_CASE("gradient is linear in the output") {
    Rng rng(47);
    Var w = Var::parameter(random_tensor(rng, 4, 3));
    Var u = Var::parameter(random_tensor(rng, 3, 1));
    std::vector<Var> wrt{w, u};
    auto f = [&] { return sum(sigmoid(matmul(w, u))); };
    auto h = [&] { return sum(relu(w) * w); };
    const double a = 0.7, b = -1.3;
    auto gf = grad(f(), wrt), gh = grad(h(), wrt), gc = grad(a * f() + b * h(), wrt);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < gc[k].value().size(); ++i)
            CHECK(std::abs(gc[k].value()[i] - (a * gf[k].value()[i] + b * gh[k].value()[i])) < 1e-12);
}

TEST_CASE("sgd step") {
    std::vector<Tensor> p{Tensor::scalar(1.0)}, g{Tensor::scalar(2.0)};
    CHECK(sgd_step(p, g, 0.1)[0].item() == doctest::Approx(0.8));
    CHECK(sgd_step(p, g, 0.0)[0] == p[0]);
    std::vector<Tensor> pv{Tensor(1, 2, std::vector<double>{1.0, -3.0})}, gv{Tensor(1, 2, std::vector<double>{2.0, 4.0})};
    auto out = sgd_step(pv, gv, 0.1)[0];
    CHECK(out[0] == doctest::Approx(0.8));
    CHECK(out[1] == doctest::Approx(-3.4));
    std::vector<Tensor> wrong{Tensor(2, 2)};
    CHECK_THROWS(sgd_step(p, wrong, 0.1));
}

TEST_CASE("adam step") {
    std::vector<Tensor> p{Tensor::scalar(0.5), Tensor::scalar(2.0)};
    auto st = AdamState::zeros_like(p);
    std::vector<Tensor> g{Tensor::scalar(1.0), Tensor::scalar(0.0)};
    adam_step(st, p, g, AdamHyper{});
    CHECK(p[0].item() - 0.5 == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(p[1].item() == 2.0);

    std::vector<Tensor> q{Tensor(2, 2, 1.5)};
    auto sq = AdamState::zeros_like(q);
    std::vector<Tensor> zero{Tensor(2, 2, 0.0)};
    for (int i = 0; i < 5; ++i) adam_step(sq, q, zero, AdamHyper{});
    CHECK(q[0] == Tensor(2, 2, 1.5));

    std::vector<Tensor> wrong{Tensor(3, 3)};
    CHECK_THROWS(adam_step(sq, q, wrong, AdamHyper{}));
}
