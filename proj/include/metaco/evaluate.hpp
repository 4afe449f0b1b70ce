#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metaco/gin.hpp"
#include "metaco/metrics.hpp"
#include "metaco/problems.hpp"
#include "metaco/training.hpp"

namespace metaco {

/// fast/medium/accurate run 1/4/8 feature trials and keep the best; finetune
/// runs 8 trials and then one gradient step on the best trial's features.
enum class Protocol { Fast, Medium, Accurate, Finetune };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view name);
std::size_t protocol_trials(Protocol p);

struct EvalOptions {
    ProblemSpec spec = ProblemSpec::defaults(ProblemKind::MaxIndependentSet);
    Protocol protocol = Protocol::Fast;
    FeatureKind features = FeatureKind::SingleNodeSeed;
    std::uint64_t seed = 0;
    double finetune_lr = 5e-5;
    /// MIS with greedy features: report the greedy solution when the model's
    /// rounded solution is worse.
    bool greedy_fallback = true;
    /// Throw when an instance has no reference instead of leaving ApR empty.
    bool require_reference = false;
    std::string method = "model";
    /// 0: read METACO_THREADS, defaulting to 1.
    std::size_t threads = 0;
};

struct RunRecord {
    std::string instance_id;
    std::size_t n = 0;
    std::size_t m = 0;
    ProblemKind problem = ProblemKind::MaxIndependentSet;
    std::string method;
    std::size_t trials = 0;
    std::optional<double> apr;
    std::string ref_kind;
    std::optional<double> reference;
    double objective = 0.0;
    bool feasible = false;
    std::optional<double> loss_before;
    std::optional<double> loss_after;
    double time_ms_forward = 0.0;
    double time_ms_round = 0.0;
    double time_ms_finetune = 0.0;
    // Model runs with greedy features keep both sides of the fallback rule.
    std::optional<double> model_objective;
    std::optional<double> greedy_objective;

    double time_ms_total() const { return time_ms_forward + time_ms_round + time_ms_finetune; }
};

/// Features of trial `trial` for the instance at position `index`. Trial
/// sets are nested: the first k trials of any protocol coincide.
FeatureInit trial_features(FeatureKind kind, const Graph& g, std::uint64_t seed, std::size_t index,
                           std::size_t trial);

/// Evaluation never modifies `params`; fine-tuned weights are per instance.
std::vector<RunRecord> evaluate(const ModelParams& params, std::span<const Instance> instances,
                                const EvalOptions& opts);

enum class Baseline { Rga, Dga, GreedyMvc, Toenshoff };

std::string_view to_string(Baseline b);
Baseline parse_baseline(std::string_view name);
/// The problem a baseline solves.
ProblemKind baseline_problem(Baseline b);

/// `trials` > 1 only matters for RGA (best of independently seeded runs).
std::vector<RunRecord> run_baseline(std::span<const Instance> instances, Baseline b, std::uint64_t seed,
                                    std::size_t trials = 1, std::size_t threads = 0);

/// For instances without an exact or bound reference, uses the best feasible
/// objective found by any record set as a "best-found" reference and
/// recomputes ApR everywhere.
void assign_best_found(std::span<std::vector<RunRecord>*> runs);

/// Recomputes `apr` from `reference` and `objective`.
void refresh_apr(RunRecord& r);

struct EvalSummary {
    MeanStd apr;                     // over feasible records with a reference
    MeanStd seconds_per_graph;
    std::size_t infeasible = 0;      // excluded from the ApR aggregate
    std::size_t unreferenced = 0;
};

EvalSummary summarize(std::span<const RunRecord> records);

void write_csv_header(std::ostream& out);
void write_csv(std::ostream& out, std::span<const RunRecord> records, bool header = true);

/// iteration,train_loss_pre_adapt,train_loss_post_adapt,val_loss,val_apr
void write_dynamics_csv(std::ostream& out, std::span<const DynamicsRow> rows);

/// METACO_THREADS, or 1 when unset or invalid.
std::size_t default_threads();

}  // namespace metaco
