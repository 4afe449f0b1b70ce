#include "metaco/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "metaco/heuristics.hpp"
#include "metaco/rng.hpp"

namespace metaco {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

/// Runs body(i) for i in [0, count) on `threads` workers. The first
/// exception is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mu);
                    if (!error) error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

bool better(double a, double b, Sense sense) { return sense == Sense::Maximize ? a > b : a < b; }

RunRecord base_record(const Instance& inst, ProblemKind problem, const std::string& method, std::size_t trials) {
    RunRecord r;
    r.instance_id = inst.id;
    r.n = inst.graph.num_nodes();
    r.m = inst.graph.num_edges();
    r.problem = problem;
    r.method = method;
    r.trials = trials;
    r.reference = inst.reference;
    r.ref_kind = inst.reference ? (inst.reference_kind.empty() ? "exact" : inst.reference_kind) : "";
    return r;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_ms(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::string_view to_string(Protocol p) {
    switch (p) {
        case Protocol::Fast: return "fast";
        case Protocol::Medium: return "medium";
        case Protocol::Accurate: return "accurate";
        case Protocol::Finetune: return "finetune";
    }
    return "?";
}

Protocol parse_protocol(std::string_view name) {
    if (name == "fast") return Protocol::Fast;
    if (name == "medium") return Protocol::Medium;
    if (name == "accurate") return Protocol::Accurate;
    if (name == "finetune") return Protocol::Finetune;
    throw std::invalid_argument("unknown protocol '" + std::string(name) +
                                "' (expected fast, medium, accurate or finetune)");
}

std::size_t protocol_trials(Protocol p) {
    switch (p) {
        case Protocol::Fast: return 1;
        case Protocol::Medium: return 4;
        case Protocol::Accurate:
        case Protocol::Finetune: return 8;
    }
    return 1;
}

std::size_t default_threads() {
    const char* env = std::getenv("METACO_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) return 1;
    return static_cast<std::size_t>(v);
}

FeatureInit trial_features(FeatureKind kind, const Graph& g, std::uint64_t seed, std::size_t index,
                           std::size_t trial) {
    switch (kind) {
        case FeatureKind::SingleNodeSeed: {
            const auto n = std::max<std::size_t>(g.num_nodes(), 1);
            return features::SingleNodeSeed{static_cast<NodeId>(Rng::derive(seed, index, trial) % n)};
        }
        case FeatureKind::GreedyDga:
            // DGA is deterministic; later trials perturb it with random greedy runs.
            if (trial == 0) return features::GreedySolution{dga_mis(g)};
            return features::GreedySolution{rga_mis(g, Rng::derive(seed, index, trial))};
        case FeatureKind::GreedyRga:
            return features::GreedySolution{rga_mis(g, Rng::derive(seed, index, trial))};
        case FeatureKind::Constant: return features::Constant{};
    }
    return features::Constant{};
}

std::vector<RunRecord> evaluate(const ModelParams& params, std::span<const Instance> instances,
                                const EvalOptions& opts) {
    params.check_consistent();
    const auto& spec = opts.spec;
    const Sense sense = spec.sense();
    const std::size_t trials = protocol_trials(opts.protocol);
    const bool greedy_feats = opts.features == FeatureKind::GreedyDga || opts.features == FeatureKind::GreedyRga;
    const bool fallback = opts.greedy_fallback && greedy_feats && spec.kind == ProblemKind::MaxIndependentSet;

    if (opts.require_reference)
        for (const auto& inst : instances)
            if (!inst.reference) throw std::invalid_argument("instance '" + inst.id + "' has no reference optimum");

    std::vector<RunRecord> out(instances.size());
    parallel_for(instances.size(), opts.threads ? opts.threads : default_threads(), [&](std::size_t idx) {
        const Instance& inst = instances[idx];
        const Graph& g = inst.graph;
        RunRecord rec = base_record(inst, spec.kind, opts.method, trials);

        struct Trial {
            ad::Tensor features;
            SoftAssignment x;
            DiscreteSolution X;
            ObjectiveValue obj;
        };
        std::optional<Trial> best;
        std::optional<Trial> first;
        std::optional<double> greedy_best;

        for (std::size_t t = 0; t < trials; ++t) {
            FeatureInit init = trial_features(opts.features, g, opts.seed, idx, t);
            if (const auto* gs = std::get_if<features::GreedySolution>(&init)) {
                auto gobj = discrete_objective(spec, g, gs->solution);
                if (gobj.feasible && (!greedy_best || better(gobj.value, *greedy_best, sense)))
                    greedy_best = gobj.value;
            }
            Trial tr;
            tr.features = make_features(g, init, params.config.input_dim);
            auto t0 = Clock::now();
            tr.x = forward(params, g, tr.features);
            rec.time_ms_forward += ms_since(t0);
            t0 = Clock::now();
            tr.X = round(spec, g, tr.x);
            rec.time_ms_round += ms_since(t0);
            tr.obj = discrete_objective(spec, g, tr.X);
            if (tr.obj.feasible && (!best || better(tr.obj.value, best->obj.value, sense))) best = tr;
            if (!first) first = std::move(tr);
        }

        const Trial& chosen = best ? *best : *first;
        rec.objective = chosen.obj.value;
        rec.feasible = chosen.obj.feasible;
        rec.loss_before = relaxed_loss(spec, g, chosen.x);

        if (opts.protocol == Protocol::Finetune) {
            auto t0 = Clock::now();
            ModelParams tuned = finetune_one_step(params, g, chosen.features, spec, opts.finetune_lr);
            auto x = forward(tuned, g, chosen.features);
            auto X = round(spec, g, x);
            rec.time_ms_finetune = ms_since(t0);
            rec.loss_after = relaxed_loss(spec, g, x);
            auto obj = discrete_objective(spec, g, X);
            rec.objective = obj.value;
            rec.feasible = obj.feasible;
        }

        if (greedy_feats) {
            rec.model_objective = rec.feasible ? std::optional<double>(rec.objective) : std::nullopt;
            rec.greedy_objective = greedy_best;
        }
        if (fallback && greedy_best && (!rec.feasible || better(*greedy_best, rec.objective, sense))) {
            rec.objective = *greedy_best;
            rec.feasible = true;
        }
        refresh_apr(rec);
        out[idx] = std::move(rec);
    });
    return out;
}

std::string_view to_string(Baseline b) {
    switch (b) {
        case Baseline::Rga: return "rga";
        case Baseline::Dga: return "dga";
        case Baseline::GreedyMvc: return "greedy-mvc";
        case Baseline::Toenshoff: return "toenshoff";
    }
    return "?";
}

Baseline parse_baseline(std::string_view name) {
    if (name == "rga") return Baseline::Rga;
    if (name == "dga") return Baseline::Dga;
    if (name == "greedy-mvc") return Baseline::GreedyMvc;
    if (name == "toenshoff") return Baseline::Toenshoff;
    throw std::invalid_argument("unknown baseline '" + std::string(name) +
                                "' (expected rga, dga, greedy-mvc or toenshoff)");
}

ProblemKind baseline_problem(Baseline b) {
    switch (b) {
        case Baseline::Rga:
        case Baseline::Dga: return ProblemKind::MaxIndependentSet;
        case Baseline::GreedyMvc: return ProblemKind::MinVertexCover;
        case Baseline::Toenshoff: return ProblemKind::MaxClique;
    }
    return ProblemKind::MaxIndependentSet;
}

std::vector<RunRecord> run_baseline(std::span<const Instance> instances, Baseline b, std::uint64_t seed,
                                    std::size_t trials, std::size_t threads) {
    if (b != Baseline::Rga) trials = 1;
    trials = std::max<std::size_t>(trials, 1);
    const ProblemSpec spec = ProblemSpec::defaults(baseline_problem(b));
    std::vector<RunRecord> out(instances.size());
    parallel_for(instances.size(), threads ? threads : default_threads(), [&](std::size_t idx) {
        const Instance& inst = instances[idx];
        RunRecord rec = base_record(inst, spec.kind, std::string(to_string(b)), trials);
        std::optional<ObjectiveValue> best;
        auto t0 = Clock::now();
        for (std::size_t t = 0; t < trials; ++t) {
            DiscreteSolution X;
            switch (b) {
                case Baseline::Rga: X = rga_mis(inst.graph, Rng::derive(seed, idx, t)); break;
                case Baseline::Dga: X = dga_mis(inst.graph); break;
                case Baseline::GreedyMvc: X = greedy_mvc(inst.graph); break;
                case Baseline::Toenshoff: X = toenshoff_greedy_mc(inst.graph); break;
            }
            auto obj = discrete_objective(spec, inst.graph, X);
            if (!best || (obj.feasible && (!best->feasible || better(obj.value, best->value, spec.sense()))))
                best = obj;
        }
        // Heuristics have a single phase; its time is reported as forward time.
        rec.time_ms_forward = ms_since(t0);
        rec.objective = best->value;
        rec.feasible = best->feasible;
        refresh_apr(rec);
        out[idx] = std::move(rec);
    });
    return out;
}

void refresh_apr(RunRecord& r) {
    r.apr.reset();
    if (!r.feasible || !r.reference || !(*r.reference > 0.0)) return;
    r.apr = apr(r.objective, *r.reference, ProblemSpec::defaults(r.problem).sense());
}

void assign_best_found(std::span<std::vector<RunRecord>*> runs) {
    std::map<std::string, double> best;
    auto consider = [&](const RunRecord& r, std::optional<double> v) {
        if (!v) return;
        const Sense sense = ProblemSpec::defaults(r.problem).sense();
        auto [it, inserted] = best.try_emplace(r.instance_id, *v);
        if (!inserted && better(*v, it->second, sense)) it->second = *v;
    };
    auto needs_ref = [](const RunRecord& r) { return r.ref_kind.empty() || r.ref_kind == "best-found"; };
    for (auto* run : runs)
        for (const auto& r : *run) {
            if (!needs_ref(r)) continue;
            if (r.feasible) consider(r, r.objective);
            consider(r, r.model_objective);
            consider(r, r.greedy_objective);
        }
    for (auto* run : runs)
        for (auto& r : *run) {
            if (!needs_ref(r)) continue;
            auto it = best.find(r.instance_id);
            if (it == best.end()) continue;
            r.reference = it->second;
            r.ref_kind = "best-found";
            refresh_apr(r);
        }
}

EvalSummary summarize(std::span<const RunRecord> records) {
    EvalSummary s;
    std::vector<double> aprs, secs;
    for (const auto& r : records) {
        secs.push_back(r.time_ms_total() / 1000.0);
        if (!r.feasible) {
            ++s.infeasible;
            continue;
        }
        if (!r.apr) {
            ++s.unreferenced;
            continue;
        }
        aprs.push_back(*r.apr);
    }
    s.apr = mean_std(aprs);
    s.seconds_per_graph = mean_std(secs);
    return s;
}

void write_csv_header(std::ostream& out) {
    out << "instance_id,n,m,problem,method,trials,apr,ref_kind,objective,feasible,loss_before,loss_after,"
           "time_ms_forward,time_ms_round,time_ms_finetune\n";
}

void write_csv(std::ostream& out, std::span<const RunRecord> records, bool header) {
    if (header) write_csv_header(out);
    for (const auto& r : records) {
        out << r.instance_id << ',' << r.n << ',' << r.m << ',' << to_string(r.problem) << ',' << r.method << ','
            << r.trials << ',' << opt(r.apr) << ',' << r.ref_kind << ',' << fmt(r.objective) << ','
            << (r.feasible ? 1 : 0) << ',' << opt(r.loss_before) << ',' << opt(r.loss_after) << ','
            << fmt_ms(r.time_ms_forward) << ',' << fmt_ms(r.time_ms_round) << ',' << fmt_ms(r.time_ms_finetune)
            << '\n';
    }
}

void write_dynamics_csv(std::ostream& out, std::span<const DynamicsRow> rows) {
    out << "iteration,train_loss_pre_adapt,train_loss_post_adapt,val_loss,val_apr\n";
    for (const auto& r : rows)
        out << r.iteration << ',' << fmt(r.train_loss_pre_adapt) << ',' << opt(r.train_loss_post_adapt) << ','
            << opt(r.val_loss) << ',' << opt(r.val_apr) << '\n';
}

}  // namespace metaco
