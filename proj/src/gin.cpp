#include "metaco/gin.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "metaco/rng.hpp"

namespace metaco {

GinConfig GinConfig::for_problem(ProblemKind kind) {
    GinConfig cfg;
    cfg.layers = kind == ProblemKind::MaxIndependentSet ? 6 : 4;
    return cfg;
}

void GinConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("GIN needs at least one layer");
    if (hidden_dim < 1) throw std::invalid_argument("GIN hidden_dim must be >= 1");
    if (mlp_depth < 1) throw std::invalid_argument("GIN mlp_depth must be >= 1");
    if (input_dim < 1) throw std::invalid_argument("GIN input_dim must be >= 1");
}

std::uint64_t GinConfig::fingerprint() const {
    // FNV-1a over the architecture fields
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    };
    mix(layers);
    mix(hidden_dim);
    mix(mlp_depth);
    mix(input_dim);
    std::uint64_t eps_bits;
    std::memcpy(&eps_bits, &epsilon, sizeof eps_bits);
    mix(eps_bits);
    mix(normalize ? 1 : 0);
    mix(residual ? 1 : 0);
    return h;
}

namespace {

struct Shape {
    std::size_t rows, cols;
};

std::vector<Shape> expected_shapes(const GinConfig& cfg) {
    std::vector<Shape> shapes;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        for (std::size_t k = 0; k < cfg.mlp_depth; ++k) {
            const std::size_t fan_in = (l == 0 && k == 0) ? cfg.input_dim : cfg.hidden_dim;
            shapes.push_back({fan_in, cfg.hidden_dim});
            shapes.push_back({1, cfg.hidden_dim});
        }
    }
    shapes.push_back({cfg.hidden_dim, 1});
    shapes.push_back({1, 1});
    return shapes;
}

double aggregation_scale(const Graph& g) {
    if (g.num_nodes() == 0) return 1.0;
    const double mean_degree = 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
    return 1.0 / (1.0 + mean_degree);
}

}  // namespace

std::vector<std::string> ModelParams::names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < config.layers; ++l) {
        for (std::size_t k = 0; k < config.mlp_depth; ++k) {
            const std::string prefix = "layer" + std::to_string(l) + ".mlp" + std::to_string(k);
            out.push_back(prefix + ".weight");
            out.push_back(prefix + ".bias");
        }
    }
    out.push_back("head.weight");
    out.push_back("head.bias");
    return out;
}

void ModelParams::check_consistent() const {
    config.validate();
    if (fingerprint != config.fingerprint()) {
        throw std::invalid_argument("model fingerprint does not match its architecture");
    }
    const auto shapes = expected_shapes(config);
    if (shapes.size() != tensors.size()) {
        throw std::invalid_argument("model has " + std::to_string(tensors.size()) + " tensors, architecture expects " +
                                    std::to_string(shapes.size()));
    }
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        if (tensors[i].rows() != shapes[i].rows || tensors[i].cols() != shapes[i].cols) {
            throw std::invalid_argument("tensor " + names()[i] + " has the wrong shape");
        }
    }
}

std::size_t ModelParams::parameter_count() const {
    std::size_t total = 0;
    for (const auto& t : tensors) total += t.size();
    return total;
}

ModelParams init_params(const GinConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ModelParams params;
    params.config = cfg;
    params.fingerprint = cfg.fingerprint();
    Rng rng(seed);
    const auto shapes = expected_shapes(cfg);
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        ad::Tensor t(shapes[i].rows, shapes[i].cols);
        if (i % 2 == 0) {
            const double limit = std::sqrt(6.0 / static_cast<double>(shapes[i].rows + shapes[i].cols));
            for (auto& v : t.data()) v = rng.uniform(-limit, limit);
        }
        params.tensors.push_back(std::move(t));
    }
    return params;
}

ad::Tensor make_features(const Graph& g, const FeatureInit& scheme, std::size_t input_dim) {
    const std::size_t n = g.num_nodes();
    std::vector<double> indicator(n, 0.0);
    if (const auto* seed = std::get_if<features::SingleNodeSeed>(&scheme)) {
        if (seed->node >= n) throw std::out_of_range("seed node out of range");
        indicator[seed->node] = 1.0;
    } else if (const auto* greedy = std::get_if<features::GreedySolution>(&scheme)) {
        if (greedy->solution.size() != n) throw std::invalid_argument("greedy solution length does not match graph");
        for (std::size_t i = 0; i < n; ++i) indicator[i] = greedy->solution[i] ? 1.0 : 0.0;
    } else {
        std::fill(indicator.begin(), indicator.end(), 1.0);
    }
    ad::Tensor out(n, input_dim);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < input_dim; ++c) out(i, c) = indicator[i];
    }
    return out;
}

GinOutput forward_vars(const GinConfig& cfg, std::span<const ad::Var> params, const Graph& g,
                       const ad::Tensor& features) {
    const auto shapes = expected_shapes(cfg);
    if (params.size() != shapes.size()) throw std::invalid_argument("parameter count does not match architecture");
    if (features.rows() != g.num_nodes() || features.cols() != cfg.input_dim) {
        throw std::invalid_argument("feature matrix must be n x input_dim");
    }
    ad::Var h = ad::Var::constant(features);
    std::size_t p = 0;
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        ad::Var self = cfg.epsilon == 0.0 ? h : (1.0 + cfg.epsilon) * h;
        ad::Var neighbors = ad::neighbor_sum(g, h);
        if (cfg.normalize) neighbors = aggregation_scale(g) * neighbors;
        ad::Var z = self + neighbors;
        for (std::size_t k = 0; k < cfg.mlp_depth; ++k) {
            z = ad::relu(ad::add_row(ad::matmul(z, params[p]), params[p + 1]));
            p += 2;
        }
        // the first layer changes width, so it has no skip path
        h = cfg.residual && l > 0 ? h + z : z;
    }
    ad::Var logits = ad::add_row(ad::matmul(h, params[p]), params[p + 1]);
    return {h, ad::sigmoid(logits)};
}

std::vector<ad::Var> as_parameters(const ModelParams& params) {
    std::vector<ad::Var> out;
    for (const auto& t : params.tensors) out.push_back(ad::Var::parameter(t));
    return out;
}

std::vector<ad::Var> as_constants(const ModelParams& params) {
    std::vector<ad::Var> out;
    for (const auto& t : params.tensors) out.push_back(ad::Var::constant(t));
    return out;
}

SoftAssignment forward(const ModelParams& params, const Graph& g, const ad::Tensor& features) {
    params.check_consistent();
    ad::NoGradGuard no_grad;
    const auto vars = as_constants(params);
    auto out = forward_vars(params.config, vars, g, features);
    const auto& x = out.assignment.value().vector();
    return SoftAssignment(std::vector<double>(x.begin(), x.end()));
}

SoftAssignment forward(const ModelParams& params, const Graph& g, const FeatureInit& feat) {
    return forward(params, g, make_features(g, feat, params.config.input_dim));
}

}  // namespace metaco
