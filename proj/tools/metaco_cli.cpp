// metaco: command-line front end.
//
//   metaco generate --family rrg --n 100 --degree 3 --count 50 --seed 7 --out d/
//   metaco oracle   --dataset d/ --problem mis
//   metaco train    --dataset d/ --problem mis --method meta-egn --out m.ckpt
//   metaco evaluate --model m.ckpt --protocol accurate --dataset d/ --problem mis --csv out.csv
//   metaco baseline --dataset d/ --heuristic dga --csv dga.csv
//   metaco finetune --model m.ckpt --graph g.graph --problem mis --steps 5
//   metaco dynamics --dataset d/ --problem mis --csv dyn.csv

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaco/evaluate.hpp"
#include "metaco/gin.hpp"
#include "metaco/heuristics.hpp"
#include "metaco/instance_gen.hpp"
#include "metaco/io.hpp"
#include "metaco/metrics.hpp"
#include "metaco/problems.hpp"
#include "metaco/rng.hpp"
#include "metaco/training.hpp"

namespace fs = std::filesystem;
using namespace metaco;

namespace {

struct SplitPlan {
    std::vector<std::pair<std::string, std::size_t>> parts;  // name, count

    const std::string& split_of(std::size_t i) const {
        for (const auto& [name, count] : parts) {
            if (i < count) return name;
            i -= count;
        }
        return parts.back().first;
    }
};

// "test" puts everything in one split; "8:1:1" divides into train/val/test.
SplitPlan plan_splits(const std::string& spec, std::size_t count) {
    SplitPlan plan;
    if (spec.find(':') == std::string::npos) {
        if (spec != "train" && spec != "val" && spec != "test")
            throw CLI::ValidationError("--split", "expected train, val, test or a ratio like 8:1:1");
        plan.parts.emplace_back(spec, count);
        return plan;
    }
    std::vector<double> w;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ':')) w.push_back(std::stod(part));
    if (w.size() != 3 || w[0] < 0 || w[1] < 0 || w[2] < 0 || w[0] + w[1] + w[2] <= 0)
        throw CLI::ValidationError("--split", "ratio must have three non-negative parts");
    const double total = w[0] + w[1] + w[2];
    auto train = static_cast<std::size_t>(static_cast<double>(count) * w[0] / total);
    auto val = static_cast<std::size_t>(static_cast<double>(count) * w[1] / total);
    plan.parts = {{"train", train}, {"val", val}, {"test", count - train - val}};
    return plan;
}

std::string run_name(const std::string& family, std::size_t i, std::size_t count) {
    const int width = static_cast<int>(std::to_string(std::max<std::size_t>(count, 1) - 1).size());
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", std::max(width, 4), i);
    return family + "_" + buf + ".graph";
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void print_summary(const std::string& method, const std::vector<RunRecord>& rows) {
    auto s = summarize(rows);
    std::cout << method << ": ApR " << format_mean_std(s.apr) << "  (" << format_mean_std(s.seconds_per_graph, 4)
              << " s/g)  n=" << rows.size();
    if (s.infeasible) std::cout << "  infeasible=" << s.infeasible << " (excluded)";
    if (s.unreferenced) std::cout << "  no-reference=" << s.unreferenced;
    std::cout << "\n";
}

struct TrainFlags {
    std::string dataset;
    std::string problem = "mis";
    std::string method = "meta-egn";
    std::string features;
    std::string optimizer = "adam";
    std::string meta_mode = "exact";
    std::size_t iters = 100;
    std::size_t batch = 32;
    std::size_t layers = 0;
    std::size_t hidden = 64;
    std::size_t eval_every = 10;
    double inner_lr = 5e-5;
    double outer_lr = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;

    void add_to(CLI::App* app) {
        app->add_option("--dataset", dataset, "Dataset directory")->required();
        app->add_option("--problem", problem, "mc, mvc or mis")->capture_default_str();
        app->add_option("--method", method, "egn or meta-egn")->capture_default_str();
        app->add_option("--features", features, "seed, dga, rga or constant (default per problem)");
        app->add_option("--optimizer", optimizer, "adam or sgd")->capture_default_str();
        app->add_option("--meta-mode", meta_mode, "exact or first-order")->capture_default_str();
        app->add_option("--iters", iters, "Optimizer steps")->capture_default_str();
        app->add_option("--batch", batch, "Batch size")->capture_default_str();
        app->add_option("--layers", layers, "GIN layers (default per problem)");
        app->add_option("--hidden", hidden, "Hidden width")->capture_default_str();
        app->add_option("--eval-every", eval_every, "Validation interval")->capture_default_str();
        app->add_option("--inner-lr", inner_lr, "Inner step size alpha")->capture_default_str();
        app->add_option("--outer-lr", outer_lr, "Outer learning rate (default per problem)");
        app->add_option("--beta", beta, "Penalty coefficient (default per problem)");
        app->add_option("--seed", seed, "Seed")->capture_default_str();
    }

    TrainConfig config() const {
        const ProblemKind kind = parse_problem(problem);
        TrainConfig cfg = TrainConfig::for_problem(kind);
        if (beta > 0) cfg.spec.beta = beta;
        if (!features.empty()) cfg.features = parse_feature_kind(features);
        if (optimizer == "sgd")
            cfg.optimizer = OptimizerKind::Sgd;
        else if (optimizer != "adam")
            throw CLI::ValidationError("--optimizer", "expected adam or sgd");
        if (meta_mode == "first-order")
            cfg.meta_mode = MetaMode::FirstOrder;
        else if (meta_mode != "exact")
            throw CLI::ValidationError("--meta-mode", "expected exact or first-order");
        if (layers) cfg.model.layers = layers;
        cfg.model.hidden_dim = hidden;
        cfg.max_iters = iters;
        cfg.batch_size = batch;
        cfg.eval_every = eval_every;
        cfg.inner_lr = inner_lr;
        if (outer_lr > 0) cfg.outer_lr = outer_lr;
        cfg.seed = seed;
        if (method != "egn" && method != "meta-egn") throw CLI::ValidationError("--method", "expected egn or meta-egn");
        return cfg;
    }

    TrainState run() const {
        const TrainConfig cfg = config();
        const Dataset d = Dataset::load(dataset);
        auto train = d.instances("train", cfg.spec.kind);
        auto val = d.instances("val", cfg.spec.kind);
        std::cerr << "training " << method << " on " << train.size() << " graphs (" << val.size()
                  << " validation), " << cfg.max_iters << " steps\n";
        return method == "egn" ? train_egn(train, val, cfg) : train_meta_egn(train, val, cfg);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learned unsupervised GNN solvers for combinatorial optimization"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate a dataset directory");
    std::string family = "rrg", out_dir, split = "8:1:1";
    std::size_t n = 100, count = 10, groups = 20, group_size = 10;
    std::vector<std::size_t> degrees{3};
    double rho = 0.25, p_edge = 0.3;
    std::uint64_t seed = 0;
    gen->add_option("--family", family, "rrg, rb or er")->capture_default_str();
    gen->add_option("--n", n, "Nodes (rrg, er)")->capture_default_str();
    gen->add_option("--degree,--degrees", degrees, "Degree, or comma list sampled per graph (rrg)")
        ->delimiter(',')
        ->capture_default_str();
    gen->add_option("--groups", groups, "Cliques (rb)")->capture_default_str();
    gen->add_option("--group-size", group_size, "Clique size (rb)")->capture_default_str();
    gen->add_option("--rho", rho, "Tightness (rb)")->capture_default_str();
    gen->add_option("--p", p_edge, "Edge probability (er)")->capture_default_str();
    gen->add_option("--count", count, "Number of graphs")->capture_default_str();
    gen->add_option("--seed", seed, "Seed")->capture_default_str();
    gen->add_option("--split", split, "Split name or train:val:test ratio")->capture_default_str();
    gen->add_option("--out", out_dir, "Output directory")->required();

    // oracle
    auto* orc = app.add_subcommand("oracle", "Annotate small instances with exact optima");
    std::string dataset, problem = "mis";
    std::size_t max_nodes = kExactMaxNodes;
    orc->add_option("--dataset", dataset, "Dataset directory")->required();
    orc->add_option("--problem", problem, "mc, mvc or mis")->capture_default_str();
    orc->add_option("--max-nodes", max_nodes, "Skip larger graphs")->capture_default_str();

    // train
    auto* tr = app.add_subcommand("train", "Train EGN or Meta-EGN and write a checkpoint");
    TrainFlags train_flags;
    std::string model_out;
    train_flags.add_to(tr);
    tr->add_option("--out", model_out, "Checkpoint path")->required();

    // dynamics
    auto* dyn = app.add_subcommand("dynamics", "Train and export the training-dynamics CSV");
    TrainFlags dyn_flags;
    std::string dyn_csv, dyn_model;
    dyn_flags.add_to(dyn);
    dyn->add_option("--csv", dyn_csv, "Output CSV")->required();
    dyn->add_option("--out", dyn_model, "Optional checkpoint path");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Evaluate checkpoints on a dataset split");
    std::vector<std::string> models;
    std::string protocol = "fast", eval_split = "test", csv, features, baselines;
    double finetune_lr = 5e-5, beta = 0.0;
    bool no_fallback = false, require_ref = false;
    ev->add_option("--model", models, "Checkpoint, optionally name=path; repeatable")->required();
    ev->add_option("--protocol", protocol, "fast, medium, accurate or finetune")->capture_default_str();
    ev->add_option("--dataset", dataset, "Dataset directory")->required();
    ev->add_option("--split", eval_split, "Split to evaluate")->capture_default_str();
    ev->add_option("--problem", problem, "mc, mvc or mis")->capture_default_str();
    ev->add_option("--features", features, "seed, dga, rga or constant (default per problem)");
    ev->add_option("--seed", seed, "Trial seed")->capture_default_str();
    ev->add_option("--finetune-lr", finetune_lr, "Fine-tune step size")->capture_default_str();
    ev->add_option("--beta", beta, "Penalty coefficient (default per problem)");
    ev->add_option("--baselines", baselines, "Comma list of heuristics to run alongside");
    ev->add_flag("--no-fallback", no_fallback, "Report the model solution even when greedy is better");
    ev->add_flag("--require-reference", require_ref, "Fail when an instance lacks a reference");
    ev->add_option("--csv", csv, "Output CSV");

    // baseline
    auto* bl = app.add_subcommand("baseline", "Run a classical heuristic");
    std::string heuristic = "dga";
    std::size_t trials = 1;
    bl->add_option("--dataset", dataset, "Dataset directory")->required();
    bl->add_option("--split", eval_split, "Split to evaluate")->capture_default_str();
    bl->add_option("--heuristic", heuristic, "rga, dga, greedy-mvc or toenshoff")->capture_default_str();
    bl->add_option("--trials", trials, "Independent RGA runs")->capture_default_str();
    bl->add_option("--seed", seed, "Seed")->capture_default_str();
    bl->add_option("--csv", csv, "Output CSV");

    // finetune
    auto* ft = app.add_subcommand("finetune", "Fine-tune a checkpoint on one graph");
    std::string model_path, graph_path, ft_out;
    std::size_t steps = 1;
    ft->add_option("--model", model_path, "Checkpoint")->required();
    ft->add_option("--graph", graph_path, "Graph file")->required();
    ft->add_option("--problem", problem, "mc, mvc or mis")->capture_default_str();
    ft->add_option("--features", features, "seed, dga, rga or constant (default per problem)");
    ft->add_option("--steps", steps, "Gradient steps")->capture_default_str();
    ft->add_option("--lr", finetune_lr, "Step size")->capture_default_str();
    ft->add_option("--seed", seed, "Seed for node-seed features")->capture_default_str();
    ft->add_option("--out", ft_out, "Write the fine-tuned checkpoint");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) {
            fs::create_directories(out_dir);
            const SplitPlan plan = plan_splits(split, count);
            Dataset d;
            d.dir = out_dir;
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint64_t s = Rng::derive(seed, i);
                Graph g;
                ManifestEntry e;
                if (family == "rrg") {
                    const std::size_t deg = degrees[Rng::derive(seed, i, 1) % degrees.size()];
                    g = gen_rrg({n, deg, s});
                } else if (family == "rb") {
                    g = gen_rb({groups, group_size, rho, s});
                    e.set({ProblemKind::MaxIndependentSet, "bound", static_cast<double>(groups)});
                    e.set({ProblemKind::MinVertexCover, "bound", static_cast<double>(g.num_nodes() - groups)});
                } else if (family == "er") {
                    g = gen_er(n, p_edge, s);
                } else {
                    throw CLI::ValidationError("--family", "expected rrg, rb or er");
                }
                e.file = run_name(family, i, count);
                e.split = plan.split_of(i);
                save_graph(d.dir / e.file, g);
                d.manifest.entries.push_back(std::move(e));
            }
            d.save_manifest();
            std::cout << "wrote " << count << " graphs to " << out_dir << "\n";
        } else if (*orc) {
            Dataset d = Dataset::load(dataset);
            const ProblemSpec spec = ProblemSpec::defaults(parse_problem(problem));
            std::size_t annotated = 0, skipped = 0;
            for (std::size_t i = 0; i < d.graphs.size(); ++i) {
                if (d.graphs[i].num_nodes() > max_nodes || d.graphs[i].num_nodes() > kExactMaxNodes) {
                    ++skipped;
                    continue;
                }
                auto opt = exact_optimum(spec, d.graphs[i]);
                d.manifest.entries[i].set({spec.kind, "exact", opt.value});
                ++annotated;
            }
            d.save_manifest();
            std::cout << "annotated " << annotated << " instances";
            if (skipped) std::cout << ", skipped " << skipped << " above " << max_nodes << " nodes";
            std::cout << "\n";
        } else if (*tr) {
            auto state = train_flags.run();
            save_checkpoint(fs::path(model_out), state.params);
            std::cout << "best iteration " << state.best_iteration << " of " << state.iteration << ", wrote "
                      << model_out << "\n";
        } else if (*dyn) {
            auto state = dyn_flags.run();
            auto out = open_csv(dyn_csv);
            write_dynamics_csv(out, state.dynamics);
            if (!dyn_model.empty()) save_checkpoint(fs::path(dyn_model), state.params);
            std::cout << "wrote " << state.dynamics.size() << " rows to " << dyn_csv << "\n";
        } else if (*ev) {
            const Dataset d = Dataset::load(dataset);
            const ProblemKind kind = parse_problem(problem);
            EvalOptions opts;
            opts.spec = beta > 0 ? ProblemSpec::with_beta(kind, beta) : ProblemSpec::defaults(kind);
            opts.protocol = parse_protocol(protocol);
            opts.features = features.empty() ? TrainConfig::for_problem(kind).features : parse_feature_kind(features);
            opts.seed = seed;
            opts.finetune_lr = finetune_lr;
            opts.greedy_fallback = !no_fallback;
            opts.require_reference = require_ref;
            auto instances = d.instances(eval_split, kind);
            if (instances.empty()) throw std::runtime_error("split '" + eval_split + "' is empty");

            std::vector<std::vector<RunRecord>> runs;
            for (const auto& m : models) {
                auto eq = m.find('=');
                opts.method = eq == std::string::npos ? fs::path(m).stem().string() : m.substr(0, eq);
                auto params = load_checkpoint(fs::path(eq == std::string::npos ? m : m.substr(eq + 1)));
                runs.push_back(evaluate(params, instances, opts));
            }
            std::stringstream bs(baselines);
            std::string name;
            while (std::getline(bs, name, ',')) {
                if (name.empty()) continue;
                Baseline b = parse_baseline(name);
                if (baseline_problem(b) != kind)
                    throw CLI::ValidationError("--baselines", name + " does not solve " + problem);
                runs.push_back(run_baseline(instances, b, seed));
            }
            std::vector<std::vector<RunRecord>*> ptrs;
            for (auto& r : runs) ptrs.push_back(&r);
            assign_best_found(ptrs);
            for (const auto& r : runs) print_summary(r.front().method, r);
            if (!csv.empty()) {
                auto out = open_csv(csv);
                write_csv_header(out);
                for (const auto& r : runs) write_csv(out, r, false);
            }
        } else if (*bl) {
            const Dataset d = Dataset::load(dataset);
            Baseline b = parse_baseline(heuristic);
            auto instances = d.instances(eval_split, baseline_problem(b));
            if (instances.empty()) throw std::runtime_error("split '" + eval_split + "' is empty");
            auto rows = run_baseline(instances, b, seed, trials);
            std::vector<std::vector<RunRecord>*> ptrs{&rows};
            assign_best_found(ptrs);
            print_summary(std::string(to_string(b)), rows);
            if (!csv.empty()) {
                auto out = open_csv(csv);
                write_csv(out, rows);
            }
        } else if (*ft) {
            const ProblemKind kind = parse_problem(problem);
            const ProblemSpec spec = ProblemSpec::defaults(kind);
            auto params = load_checkpoint(fs::path(model_path));
            const Graph g = load_graph(graph_path);
            const FeatureKind fk =
                features.empty() ? TrainConfig::for_problem(kind).features : parse_feature_kind(features);
            const ad::Tensor x0 = make_features(g, trial_features(fk, g, seed, 0, 0), params.config.input_dim);
            std::vector<double> trace;
            auto tuned = finetune_k_steps(params, g, x0, spec, finetune_lr, steps, &trace);
            for (std::size_t k = 0; k < trace.size(); ++k) std::printf("step %zu loss %.10g\n", k, trace[k]);
            auto X = round(spec, g, forward(tuned, g, x0));
            auto obj = discrete_objective(spec, g, X);
            std::printf("objective %.0f feasible %d\n", obj.value, obj.feasible ? 1 : 0);
            if (!ft_out.empty()) save_checkpoint(fs::path(ft_out), tuned);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
