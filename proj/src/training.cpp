#include "metaco/training.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "metaco/heuristics.hpp"
#include "metaco/metrics.hpp"

namespace metaco {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::SingleNodeSeed: return "seed";
        case FeatureKind::GreedyDga: return "dga";
        case FeatureKind::GreedyRga: return "rga";
        case FeatureKind::Constant: return "constant";
    }
    return "?";
}

FeatureKind parse_feature_kind(std::string_view name) {
    if (name == "seed") return FeatureKind::SingleNodeSeed;
    if (name == "dga" || name == "greedy") return FeatureKind::GreedyDga;
    if (name == "rga") return FeatureKind::GreedyRga;
    if (name == "constant") return FeatureKind::Constant;
    throw std::invalid_argument("unknown feature scheme '" + std::string(name) + "' (expected seed, dga, rga, constant)");
}

TrainConfig TrainConfig::for_problem(ProblemKind kind) {
    TrainConfig cfg;
    cfg.spec = ProblemSpec::defaults(kind);
    cfg.model = GinConfig::for_problem(kind);
    if (kind == ProblemKind::MaxIndependentSet) {
        cfg.outer_lr = 1e-4;
        cfg.features = FeatureKind::GreedyDga;
    } else {
        cfg.outer_lr = 1e-3;
        cfg.features = FeatureKind::SingleNodeSeed;
    }
    return cfg;
}

void TrainConfig::validate() const {
    model.validate();
    if (!(inner_lr > 0.0)) throw std::invalid_argument("inner learning rate must be positive");
    if (!(outer_lr > 0.0)) throw std::invalid_argument("outer learning rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (!(spec.beta > 0.0)) throw std::invalid_argument("penalty beta must be positive");
}

FeatureSource::FeatureSource(FeatureKind kind, std::span<const Instance> instances, std::uint64_t seed)
    : kind_(kind), instances_(instances), seed_(seed), greedy_(instances.size()) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (kind == FeatureKind::GreedyDga) greedy_[i] = dga_mis(instances[i].graph);
        if (kind == FeatureKind::GreedyRga) greedy_[i] = rga_mis(instances[i].graph, Rng::derive(seed, i));
    }
}

FeatureInit FeatureSource::fixed_init(std::size_t index) const {
    const Graph& g = instances_[index].graph;
    switch (kind_) {
        case FeatureKind::SingleNodeSeed: {
            const auto n = std::max<std::size_t>(g.num_nodes(), 1);
            return features::SingleNodeSeed{static_cast<NodeId>(Rng::derive(seed_, index, 0x5eed) % n)};
        }
        case FeatureKind::GreedyDga:
        case FeatureKind::GreedyRga: return features::GreedySolution{*greedy_[index]};
        case FeatureKind::Constant: return features::Constant{};
    }
    return features::Constant{};
}

ad::Tensor FeatureSource::fixed(std::size_t index, std::size_t input_dim) const {
    return make_features(instances_[index].graph, fixed_init(index), input_dim);
}

ad::Tensor FeatureSource::training(std::size_t index, Rng& rng, std::size_t input_dim) const {
    const Graph& g = instances_[index].graph;
    if (kind_ == FeatureKind::SingleNodeSeed && g.num_nodes() > 0) {
        return make_features(g, features::SingleNodeSeed{static_cast<NodeId>(rng.below(g.num_nodes()))}, input_dim);
    }
    return fixed(index, input_dim);
}

ad::Var relaxed_loss_var(const ProblemSpec& spec, const Graph& g, const ad::Var& x) {
    const double beta = spec.beta;
    // Each edge appears twice in sum(x * neighbor_sum(x)).
    switch (spec.kind) {
        case ProblemKind::MaxIndependentSet:
            return -ad::sum(x) + (0.5 * beta) * ad::sum(x * ad::neighbor_sum(g, x));
        case ProblemKind::MinVertexCover: {
            ad::Var c = ad::add_scalar(-x, 1.0);
            return ad::sum(x) + (0.5 * beta) * ad::sum(c * ad::neighbor_sum(g, c));
        }
        case ProblemKind::MaxClique: {
            ad::Var s = ad::sum(x);
            ad::Var inside = ad::sum(x * ad::neighbor_sum(g, x));
            ad::Var ordered_pairs = s * s - ad::sum(x * x);
            return (-0.5 * (beta + 1.0)) * inside + (0.5 * beta) * ordered_pairs;
        }
    }
    throw std::logic_error("unknown problem kind");
}

InstanceLoss instance_loss(const GinConfig& cfg, std::span<const ad::Var> params, const Graph& g,
                           const ad::Tensor& features, const ProblemSpec& spec) {
    auto out = forward_vars(cfg, params, g, features);
    return {relaxed_loss_var(spec, g, out.assignment), out.assignment};
}

double instance_loss_value(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                           const ProblemSpec& spec) {
    params.check_consistent();
    ad::NoGradGuard no_grad;
    const auto vars = as_constants(params);
    return instance_loss(params.config, vars, g, features, spec).loss.item();
}

std::vector<ad::Tensor> loss_gradient(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                                      const ProblemSpec& spec) {
    params.check_consistent();
    const auto vars = as_parameters(params);
    auto loss = instance_loss(params.config, vars, g, features, spec).loss;
    return ad::values(ad::grad(loss, vars));
}

MetaGradient meta_gradient(const LossFn& loss, std::span<const ad::Tensor> theta, double alpha, MetaMode mode) {
    std::vector<ad::Var> params;
    params.reserve(theta.size());
    for (const auto& t : theta) params.push_back(ad::Var::parameter(t));

    ad::Var inner = loss(params);
    auto inner_grad = ad::grad(inner, params, mode == MetaMode::Exact);
    auto adapted = ad::sgd_step(params, inner_grad, alpha);
    ad::Var outer = loss(adapted);

    MetaGradient out;
    out.initial_loss = inner.item();
    out.adapted_loss = outer.item();
    out.gradient = ad::values(ad::grad_of_grad(outer, params));
    return out;
}

namespace {

void check_batch(std::span<const Graph> graphs, std::span<const ad::Tensor> features) {
    if (graphs.empty()) throw std::invalid_argument("empty batch");
    if (graphs.size() != features.size()) throw std::invalid_argument("batch graphs/features count mismatch");
}

void accumulate(std::vector<ad::Tensor>& into, const std::vector<ad::Tensor>& g, double weight) {
    if (into.empty()) {
        for (const auto& t : g) into.emplace_back(t.rows(), t.cols());
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t k = 0; k < g[i].size(); ++k) into[i][k] += weight * g[i][k];
    }
}

}  // namespace

BatchGradient egn_batch_gradient(const ModelParams& params, std::span<const Graph> graphs,
                                 std::span<const ad::Tensor> features, const ProblemSpec& spec) {
    check_batch(graphs, features);
    params.check_consistent();
    const double w = 1.0 / static_cast<double>(graphs.size());
    BatchGradient out;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto vars = as_parameters(params);
        auto loss = instance_loss(params.config, vars, graphs[i], features[i], spec).loss;
        accumulate(out.gradient, ad::values(ad::grad(loss, vars)), w);
        out.mean_loss += w * loss.item();
    }
    out.mean_adapted_loss = out.mean_loss;
    return out;
}

BatchGradient meta_batch_gradient(const ModelParams& params, std::span<const Graph> graphs,
                                  std::span<const ad::Tensor> features, const ProblemSpec& spec, double alpha,
                                  MetaMode mode) {
    check_batch(graphs, features);
    params.check_consistent();
    const double w = 1.0 / static_cast<double>(graphs.size());
    BatchGradient out;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const Graph& g = graphs[i];
        const ad::Tensor& f = features[i];
        auto loss = [&](std::span<const ad::Var> p) { return instance_loss(params.config, p, g, f, spec).loss; };
        auto mg = meta_gradient(loss, params.tensors, alpha, mode);
        accumulate(out.gradient, mg.gradient, w);
        out.mean_loss += w * mg.initial_loss;
        out.mean_adapted_loss += w * mg.adapted_loss;
    }
    return out;
}

ValidationResult validate(const ModelParams& params, std::span<const Instance> val, const FeatureSource& feats,
                          const ProblemSpec& spec) {
    ValidationResult out;
    if (val.empty()) return out;
    bool all_referenced = true;
    std::vector<double> aprs;
    for (std::size_t i = 0; i < val.size(); ++i) {
        const auto f = feats.fixed(i, params.config.input_dim);
        auto x = forward(params, val[i].graph, f);
        out.mean_loss += relaxed_loss(spec, val[i].graph, x);
        if (!val[i].reference) {
            all_referenced = false;
            continue;
        }
        auto X = round(spec, val[i].graph, x);
        auto obj = discrete_objective(spec, val[i].graph, X);
        if (obj.feasible) aprs.push_back(apr(obj.value, *val[i].reference, spec.sense()));
    }
    out.mean_loss /= static_cast<double>(val.size());
    if (all_referenced && !aprs.empty()) out.mean_apr = mean_std(aprs).mean;
    return out;
}

namespace {

double score_of(const ValidationResult& v, Sense sense) {
    if (v.mean_apr) return sense == Sense::Maximize ? *v.mean_apr : -*v.mean_apr;
    return -v.mean_loss;
}

void apply_update(ModelParams& params, ad::AdamState& state, const std::vector<ad::Tensor>& grads,
                  const TrainConfig& cfg) {
    if (cfg.optimizer == OptimizerKind::Adam) {
        ad::AdamHyper h;
        h.lr = cfg.outer_lr;
        ad::adam_step(state, params.tensors, grads, h);
    } else {
        params.tensors = ad::sgd_step(params.tensors, grads, cfg.outer_lr);
    }
}

TrainState run_training(std::span<const Instance> train, std::span<const Instance> val, const TrainConfig& cfg,
                        bool meta) {
    cfg.validate();
    if (train.empty()) throw std::invalid_argument("training set is empty");

    FeatureSource train_feats(cfg.features, train, Rng::derive(cfg.seed, 11));
    FeatureSource val_feats(cfg.features, val, Rng::derive(cfg.seed, 12));
    Rng rng(Rng::derive(cfg.seed, 13));

    TrainState state;
    state.last = init_params(cfg.model, Rng::derive(cfg.seed, 10));
    state.params = state.last;
    state.optimizer = ad::AdamState::zeros_like(state.last.tensors);
    state.best_score = -std::numeric_limits<double>::infinity();
    if (cfg.max_iters == 0) return state;

    if (!val.empty()) {
        state.best_score = score_of(validate(state.last, val, val_feats, cfg.spec), cfg.spec.sense());
    }

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t cursor = order.size();
    const std::size_t batch = std::min(cfg.batch_size, train.size());

    std::vector<Graph> graphs;
    std::vector<ad::Tensor> feats;
    std::vector<std::size_t> picked;
    for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
        picked.clear();
        if (meta) {
            // one fresh batch drawn without replacement
            std::vector<std::size_t> pool(train.size());
            std::iota(pool.begin(), pool.end(), std::size_t{0});
            for (std::size_t k = 0; k < batch; ++k) {
                const std::size_t j = k + rng.below(pool.size() - k);
                std::swap(pool[k], pool[j]);
                picked.push_back(pool[k]);
            }
        } else {
            if (cursor >= order.size()) {
                shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            const std::size_t end = std::min(order.size(), cursor + batch);
            picked.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                          order.begin() + static_cast<std::ptrdiff_t>(end));
            cursor = end;
        }

        graphs.clear();
        feats.clear();
        for (std::size_t idx : picked) {
            graphs.push_back(train[idx].graph);
            feats.push_back(train_feats.training(idx, rng, cfg.model.input_dim));
        }

        BatchGradient bg = meta ? meta_batch_gradient(state.last, graphs, feats, cfg.spec, cfg.inner_lr, cfg.meta_mode)
                                : egn_batch_gradient(state.last, graphs, feats, cfg.spec);
        apply_update(state.last, state.optimizer, bg.gradient, cfg);
        state.iteration = it;
        state.train_losses.push_back(bg.mean_loss);

        DynamicsRow row;
        row.iteration = it;
        row.train_loss_pre_adapt = bg.mean_loss;
        if (meta) row.train_loss_post_adapt = bg.mean_adapted_loss;

        const bool eval_now = !val.empty() && (cfg.eval_every > 0 ? it % cfg.eval_every == 0 : false);
        if (eval_now || (!val.empty() && it == cfg.max_iters)) {
            auto v = validate(state.last, val, val_feats, cfg.spec);
            row.val_loss = v.mean_loss;
            row.val_apr = v.mean_apr;
            const double score = score_of(v, cfg.spec.sense());
            if (score > state.best_score) {
                state.best_score = score;
                state.best_iteration = it;
                state.params = state.last;
            }
        }
        state.dynamics.push_back(row);
    }
    if (val.empty()) {
        state.params = state.last;
        state.best_iteration = state.iteration;
    }
    return state;
}

}  // namespace

TrainState train_egn(std::span<const Instance> train, std::span<const Instance> val, const TrainConfig& cfg) {
    return run_training(train, val, cfg, false);
}

TrainState train_meta_egn(std::span<const Instance> train, std::span<const Instance> val, const TrainConfig& cfg) {
    return run_training(train, val, cfg, true);
}

ModelParams finetune_one_step(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                              const ProblemSpec& spec, double alpha) {
    ModelParams out = params;
    out.tensors = ad::sgd_step(params.tensors, loss_gradient(params, g, features, spec), alpha);
    return out;
}

ModelParams finetune_k_steps(const ModelParams& params, const Graph& g, const ad::Tensor& features,
                             const ProblemSpec& spec, double alpha, std::size_t k, std::vector<double>* loss_trace) {
    if (k < 1) throw std::invalid_argument("fine-tuning needs k >= 1");
    ModelParams current = params;
    if (loss_trace) loss_trace->push_back(instance_loss_value(current, g, features, spec));
    for (std::size_t step = 0; step < k; ++step) {
        current = finetune_one_step(current, g, features, spec, alpha);
        if (loss_trace) loss_trace->push_back(instance_loss_value(current, g, features, spec));
    }
    return current;
}

}  // namespace metaco
