#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "metaco/autodiff.hpp"
#include "metaco/graph.hpp"
#include "metaco/problems.hpp"

namespace metaco {

struct GinConfig {
    std::size_t layers = 4;
    std::size_t hidden_dim = 64;
    std::size_t mlp_depth = 2;
    std::size_t input_dim = 1;
    double epsilon = 0.0;
    /// Divide each layer's neighbor sum by 1 + mean degree of the graph.
    /// Plain sum aggregation grows activations roughly (degree + 1)-fold per
    /// layer and saturates the head on dense graphs. Leaving the self term
    /// unscaled also keeps "selected" distinguishable from "one selected
    /// neighbor" under indicator features.
    bool normalize = true;
    /// h <- h + MLP(aggregate) from the second layer on. Keeps the input
    /// features one MLP away from the head at any depth.
    bool residual = true;

    /// 4 layers for MC/MVC, 6 for MIS.
    static GinConfig for_problem(ProblemKind kind);

    void validate() const;
    std::uint64_t fingerprint() const;

    friend bool operator==(const GinConfig&, const GinConfig&) = default;
};

/// GIN weights. Tensors are ordered layer by layer (weight, bias per MLP
/// stage), followed by the output head weight and bias.
struct ModelParams {
    GinConfig config;
    std::uint64_t fingerprint = 0;
    std::vector<ad::Tensor> tensors;

    std::vector<std::string> names() const;
    /// Checks the fingerprint and every tensor shape against `config`.
    void check_consistent() const;
    std::size_t parameter_count() const;
};

/// Glorot-uniform weights, zero biases.
ModelParams init_params(const GinConfig& cfg, std::uint64_t seed);

namespace features {
struct SingleNodeSeed {
    NodeId node;
};
struct GreedySolution {
    DiscreteSolution solution;
};
struct Constant {};
}  // namespace features

using FeatureInit = std::variant<features::SingleNodeSeed, features::GreedySolution, features::Constant>;

/// n x input_dim feature matrix. Every column carries the same indicator.
ad::Tensor make_features(const Graph& g, const FeatureInit& scheme, std::size_t input_dim = 1);

struct GinOutput {
    ad::Var hidden;       // n x hidden_dim, before the output head
    ad::Var assignment;   // n x 1, in (0, 1)
};

/// Differentiable forward pass with explicit parameter Vars (laid out as in
/// ModelParams::tensors). Used for training and meta-gradients.
GinOutput forward_vars(const GinConfig& cfg, std::span<const ad::Var> params, const Graph& g,
                       const ad::Tensor& features);

/// Inference: deterministic soft assignment.
SoftAssignment forward(const ModelParams& params, const Graph& g, const FeatureInit& feat);
SoftAssignment forward(const ModelParams& params, const Graph& g, const ad::Tensor& features);

std::vector<ad::Var> as_parameters(const ModelParams& params);
std::vector<ad::Var> as_constants(const ModelParams& params);

}  // namespace metaco
