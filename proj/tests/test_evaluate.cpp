#include <doctest.h>

#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "metaco/evaluate.hpp"
#include "metaco/heuristics.hpp"
#include "metaco/metrics.hpp"

using namespace metaco;

namespace {

std::vector<Instance> rrg_set(std::size_t count, std::uint64_t seed) {
    std::vector<Instance> out;
    for (std::size_t i = 0; i < count; ++i)
        out.push_back({"g" + std::to_string(i), gen_rrg({40, 3, Rng::derive(seed, i)}), std::nullopt, {}});
    return out;
}

ModelParams small_model(ProblemKind kind, std::uint64_t seed) {
    GinConfig c = GinConfig::for_problem(kind);
    c.hidden_dim = 8;
    c.layers = 2;
    return init_params(c, seed);
}

}  // namespace

TEST_CASE("approximation rate") {
    CHECK(apr(9, 10, Sense::Maximize) == doctest::Approx(0.9));
    CHECK(apr(11, 10, Sense::Minimize) == doctest::Approx(1.1));
    CHECK(apr(10, 10, Sense::Maximize) == 1.0);
    CHECK_THROWS(apr(1, 0, Sense::Maximize));
}

TEST_CASE("mean and population deviation formatting") {
    std::vector<double> v{0.928, 1.024};
    auto m = mean_std(v);
    CHECK(m.mean == doctest::Approx(0.976));
    CHECK(m.stddev == doctest::Approx(0.048));
    CHECK(format_mean_std(m) == "0.976 ± 0.048");
}

TEST_CASE("protocol parsing") {
    CHECK(protocol_trials(Protocol::Fast) == 1);
    CHECK(protocol_trials(Protocol::Medium) == 4);
    CHECK(protocol_trials(Protocol::Accurate) == 8);
    CHECK(parse_protocol("finetune") == Protocol::Finetune);
    CHECK_THROWS(parse_protocol("slow"));
}

TEST_CASE("more trials never hurt when seed sets are nested") {
    auto data = rrg_set(12, 1);
    for (auto kind : testutil::kAllKinds) {
        auto p = small_model(kind, 3);
        EvalOptions o;
        o.spec = ProblemSpec::defaults(kind);
        o.features = FeatureKind::SingleNodeSeed;
        o.seed = 9;
        o.protocol = Protocol::Fast;
        auto fast = evaluate(p, data, o);
        o.protocol = Protocol::Medium;
        auto medium = evaluate(p, data, o);
        o.protocol = Protocol::Accurate;
        auto acc = evaluate(p, data, o);
        const Sense s = o.spec.sense();
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!fast[i].feasible) continue;
            REQUIRE(medium[i].feasible);
            REQUIRE(acc[i].feasible);
            if (s == Sense::Maximize) {
                CHECK(acc[i].objective >= medium[i].objective);
                CHECK(medium[i].objective >= fast[i].objective);
            } else {
                CHECK(acc[i].objective <= medium[i].objective);
                CHECK(medium[i].objective <= fast[i].objective);
            }
        }
    }
}

TEST_CASE("greedy fallback never reports less than the greedy feature") {
    auto data = rrg_set(10, 2);
    auto p = small_model(ProblemKind::MaxIndependentSet, 5);
    EvalOptions o;
    o.features = FeatureKind::GreedyDga;
    auto rows = evaluate(p, data, o);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(rows[i].objective >= static_cast<double>(dga_mis(data[i].graph).count()));
        REQUIRE(rows[i].greedy_objective);
        CHECK(*rows[i].greedy_objective == static_cast<double>(dga_mis(data[i].graph).count()));
    }
    o.greedy_fallback = false;
    auto raw = evaluate(p, data, o);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(raw[i].objective == *rows[i].model_objective);
}

TEST_CASE("infeasible records are excluded from the aggregate") {
    RunRecord ok, bad;
    ok.feasible = true;
    ok.apr = 0.9;
    bad.feasible = false;
    std::vector<RunRecord> rows{ok, bad};
    auto s = summarize(rows);
    CHECK(s.infeasible == 1);
    CHECK(s.apr.count == 1);
    CHECK(s.apr.mean == doctest::Approx(0.9));
}

TEST_CASE("finetune protocol and model immutability") {
    auto data = rrg_set(6, 3);
    auto p = small_model(ProblemKind::MaxIndependentSet, 7);
    auto before = p.tensors;
    EvalOptions o;
    o.protocol = Protocol::Finetune;
    o.features = FeatureKind::SingleNodeSeed;
    auto rows = evaluate(p, data, o);
    CHECK(p.tensors == before);
    for (const auto& r : rows) {
        CHECK(r.loss_before);
        CHECK(r.loss_after);
        CHECK(r.trials == 8);
        CHECK(r.time_ms_finetune > 0.0);
    }
}

TEST_CASE("references: exact, missing and best-found") {
    auto data = rrg_set(5, 4);
    data[0].reference = 18;
    data[0].reference_kind = "exact";
    auto p = small_model(ProblemKind::MaxIndependentSet, 2);
    EvalOptions o;
    o.features = FeatureKind::GreedyDga;
    CHECK_THROWS(([&] {
        auto req = o;
        req.require_reference = true;
        evaluate(p, data, req);
    }()));
    auto model = evaluate(p, data, o);
    auto dga = run_baseline(data, Baseline::Dga, 0);
    auto rga = run_baseline(data, Baseline::Rga, 0, 4);
    CHECK(model[0].apr);
    CHECK_FALSE(model[1].apr);
    std::vector<std::vector<RunRecord>*> runs{&model, &dga, &rga};
    assign_best_found(runs);
    CHECK(model[0].ref_kind == "exact");
    for (std::size_t i = 1; i < data.size(); ++i) {
        CHECK(model[i].ref_kind == "best-found");
        CHECK(*model[i].apr <= 1.0);
        CHECK(*dga[i].apr <= 1.0);
        double best = std::max({model[i].objective, dga[i].objective, rga[i].objective});
        CHECK(*model[i].reference == best);
    }
}

TEST_CASE("baselines") {
    auto data = rrg_set(4, 5);
    CHECK(baseline_problem(parse_baseline("greedy-mvc")) == ProblemKind::MinVertexCover);
    CHECK_THROWS(parse_baseline("sa"));
    auto rows = run_baseline(data, Baseline::GreedyMvc, 0);
    for (const auto& r : rows) CHECK(r.feasible);
    auto mc = run_baseline(data, Baseline::Toenshoff, 0);
    for (const auto& r : mc) CHECK(r.feasible);
}

TEST_CASE("CSV layout") {
    auto data = rrg_set(3, 6);
    auto rows = run_baseline(data, Baseline::Dga, 0);
    std::ostringstream out;
    write_csv(out, rows);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header ==
          "instance_id,n,m,problem,method,trials,apr,ref_kind,objective,feasible,loss_before,loss_after,"
          "time_ms_forward,time_ms_round,time_ms_finetune");
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 14);
    }
    CHECK(lines == 3);
}

TEST_CASE("threaded evaluation gives the same records") {
    auto data = rrg_set(8, 7);
    auto p = small_model(ProblemKind::MaxIndependentSet, 1);
    EvalOptions o;
    o.protocol = Protocol::Medium;
    o.threads = 1;
    auto serial = evaluate(p, data, o);
    o.threads = 4;
    auto threaded = evaluate(p, data, o);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(serial[i].objective == threaded[i].objective);
        CHECK(serial[i].loss_before == threaded[i].loss_before);
    }
}
