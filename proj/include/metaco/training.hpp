#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metaco/autodiff.hpp"
#include "metaco/gin.hpp"
#include "metaco/graph.hpp"
#include "metaco/problems.hpp"
#include "metaco/rng.hpp"

namespace metaco {

enum class OptimizerKind { Sgd, Adam };
enum class MetaMode { Exact, FirstOrder };

/// How node features are drawn for an instance.
enum class FeatureKind {
    SingleNodeSeed,  // one random node set to 1; redrawn every visit in training
    GreedyDga,       // indicator of the degree-based greedy independent set
    GreedyRga,       // indicator of a random greedy independent set
    Constant,
};

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);

struct TrainConfig {
    ProblemSpec spec = ProblemSpec::defaults(ProblemKind::MaxIndependentSet);
    GinConfig model = GinConfig::for_problem(ProblemKind::MaxIndependentSet);
    FeatureKind features = FeatureKind::GreedyDga;

    double inner_lr = 5e-5;   // alpha; always a plain gradient step
    double outer_lr = 1e-4;   // gamma
    std::size_t batch_size = 32;
    std::size_t max_iters = 100;  // optimizer steps
    OptimizerKind optimizer = OptimizerKind::Adam;
    MetaMode meta_mode = MetaMode::Exact;
    std::size_t eval_every = 10;
    std::uint64_t seed = 0;

    /// Defaults per problem: outer lr 1e-3 and 4-layer GIN for MC/MVC,
    /// 1e-4 and 6 layers for MIS; greedy features for MIS, node seeds otherwise.
    static TrainConfig for_problem(ProblemKind kind);
    void validate() const;
};

struct Instance {
    std::string id;
    Graph graph;
    std::optional<double> reference;  // optimum or bound for ApR, when known
    std::string reference_kind;       // "exact", "bound", ... ; empty when absent
};

/// Per-instance feature source. Greedy solutions are computed once.
class FeatureSource {
public:
    FeatureSource(FeatureKind kind, std::span<const Instance> instances, std::uint64_t seed);

    /// Features for a training visit; node seeds are freshly drawn from `rng`.
    ad::Tensor training(std::size_t index, Rng& rng, std::size_t input_dim) const;
    /// Fixed features used for validation and evaluation.
    ad::Tensor fixed(std::size_t index, std::size_t input_dim) const;
    FeatureInit fixed_init(std::size_t index) const;
    const std::optional<DiscreteSolution>& greedy(std::size_t index) const { return greedy_[index]; }

private:
    FeatureKind kind_;
    std::span<const Instance> instances_;
    std::uint64_t seed_;
    std::vector<std::optional<DiscreteSolution>> greedy_;
};

/// The relaxed loss of `spec` at forward(params), recorded for differentiation.
ad::Var relaxed_loss_var(const ProblemSpec& spec, const Graph& g, const ad::Var& x);

struct InstanceLoss {
    ad::Var loss;
    ad::Var assignment;
};

InstanceLoss instance_loss(const GinConfig& cfg, std::span<const ad::Var> params, const Graph& g,
                           const ad::Tensor& features, const ProblemSpec& spec);
double instance_loss_value(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                           const ProblemSpec& spec);

/// Gradient of l(theta; G) w.r.t. theta.
std::vector<ad::Tensor> loss_gradient(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                                      const ProblemSpec& spec);

using LossFn = std::function<ad::Var(std::span<const ad::Var>)>;

struct MetaGradient {
    double adapted_loss = 0.0;   // l(theta - alpha grad l(theta))
    double initial_loss = 0.0;   // l(theta)
    std::vector<ad::Tensor> gradient;
};

/// Gradient of theta -> l(theta - alpha * grad l(theta)). Exact mode
/// differentiates through the inner gradient; first-order mode treats it as
/// a constant.
MetaGradient meta_gradient(const LossFn& loss, std::span<const ad::Tensor> theta, double alpha, MetaMode mode);

struct BatchGradient {
    double mean_loss = 0.0;          // at theta
    double mean_adapted_loss = 0.0;  // at the adapted parameters (meta only)
    std::vector<ad::Tensor> gradient;
};

/// Mean over the batch of grad l(theta; G_i).
BatchGradient egn_batch_gradient(const ModelParams& params, std::span<const Graph> graphs,
                                 std::span<const ad::Tensor> features, const ProblemSpec& spec);
/// Mean over the batch of the meta-gradient with inner step `alpha`.
BatchGradient meta_batch_gradient(const ModelParams& params, std::span<const Graph> graphs,
                                  std::span<const ad::Tensor> features, const ProblemSpec& spec, double alpha,
                                  MetaMode mode);

struct DynamicsRow {
    std::size_t iteration = 0;
    double train_loss_pre_adapt = 0.0;
    std::optional<double> train_loss_post_adapt;
    std::optional<double> val_loss;
    std::optional<double> val_apr;
};

struct TrainState {
    ModelParams params;       // best-validation snapshot
    ModelParams last;         // final iterate
    ad::AdamState optimizer;
    std::size_t iteration = 0;
    std::size_t best_iteration = 0;
    double best_score = 0.0;  // larger is better
    std::vector<double> train_losses;  // batch loss per iteration
    std::vector<DynamicsRow> dynamics;
};

struct ValidationResult {
    double mean_loss = 0.0;
    std::optional<double> mean_apr;
};

/// Mean relaxed loss and, when every instance carries a reference, mean ApR
/// of the rounded solutions.
ValidationResult validate(const ModelParams& params, std::span<const Instance> val, const FeatureSource& feats,
                          const ProblemSpec& spec);

/// Mini-batch training of the mean instance loss; every epoch sweeps all
/// batches in a seeded shuffled order.
TrainState train_egn(std::span<const Instance> train, std::span<const Instance> val, const TrainConfig& cfg);

/// Meta-training: each iteration samples one batch, adapts per instance with
/// a plain gradient step of size inner_lr and updates theta with the gradient
/// of the mean adapted loss.
TrainState train_meta_egn(std::span<const Instance> train, std::span<const Instance> val, const TrainConfig& cfg);

/// theta - alpha * grad l(theta; G). `params` is not modified.
ModelParams finetune_one_step(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                              const ProblemSpec& spec, double alpha);
/// k repeated plain gradient steps.
ModelParams finetune_k_steps(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                             const ProblemSpec& spec, double alpha, std::size_t k,
                             std::vector<double>* loss_trace = nullptr);

}  // namespace metaco
