#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metaco/problems.hpp"

using namespace metaco;
using testutil::complete;
using testutil::path;

namespace {
const ProblemSpec kMis = ProblemSpec::defaults(ProblemKind::MaxIndependentSet);
const ProblemSpec kMvc = ProblemSpec::defaults(ProblemKind::MinVertexCover);
const ProblemSpec kMc = ProblemSpec::defaults(ProblemKind::MaxClique);

DiscreteSolution pick(std::size_t n, std::vector<NodeId> s) { return DiscreteSolution::from_selected(n, s); }
}  // namespace

TEST_CASE("problem specs") {
    CHECK(kMis.beta == 2.0);
    CHECK(kMvc.beta == 5.0);
    CHECK(kMc.beta == 2.0);
    CHECK(kMvc.sense() == Sense::Minimize);
    CHECK(kMc.sense() == Sense::Maximize);
    CHECK(parse_problem("MIS") == ProblemKind::MaxIndependentSet);
    CHECK_THROWS_AS(parse_problem("tsp"), std::invalid_argument);
    CHECK_THROWS(ProblemSpec::with_beta(ProblemKind::MaxClique, 0.0));
    CHECK_THROWS(SoftAssignment({0.5, 1.5}));
}

TEST_CASE("relaxed loss hand values") {
    std::vector<double> ones2{1, 1}, zeros2{0, 0}, ones3{1, 1, 1};
    CHECK(relaxed_loss(kMis, path(2), ones2) == doctest::Approx(0.0));
    CHECK(relaxed_loss(kMc, complete(3), ones3) == doctest::Approx(-3.0));
    CHECK(relaxed_loss(ProblemSpec::with_beta(ProblemKind::MinVertexCover, 3.0), path(2), zeros2) ==
          doctest::Approx(3.0));
    std::vector<double> short_x{0.5};
    CHECK_THROWS_AS(relaxed_loss(kMis, path(2), short_x), std::invalid_argument);
}

TEST_CASE("relaxed loss matches the term-by-term oracle") {
    Rng rng(101);
    for (int t = 0; t < 300; ++t) {
        auto g = testutil::random_graph(rng, 20);
        auto x = testutil::random_x(rng, g.num_nodes());
        const double beta = rng.uniform(0.5, 6.0);
        for (auto k : testutil::kAllKinds) {
            auto spec = ProblemSpec::with_beta(k, beta);
            const double want = oracle::loss(testutil::kind_of(k), beta, static_cast<int>(g.num_nodes()),
                                             testutil::edges_of(g), x);
            CHECK(relaxed_loss(spec, g, x) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("relaxed loss is affine in each coordinate") {
    Rng rng(7);
    for (int t = 0; t < 100; ++t) {
        auto g = testutil::random_graph(rng, 15);
        auto x = testutil::random_x(rng, g.num_nodes());
        const NodeId i = static_cast<NodeId>(rng.below(g.num_nodes()));
        for (auto k : testutil::kAllKinds) {
            auto spec = ProblemSpec::defaults(k);
            auto at = [&](double v) {
                auto y = x;
                y[i] = v;
                return relaxed_loss(spec, g, y);
            };
            CHECK(at(0.5) == doctest::Approx(0.5 * (at(0.0) + at(1.0))).epsilon(1e-12));
        }
    }
}

TEST_CASE("discrete objective and feasibility") {
    auto mvc = discrete_objective(kMvc, path(3), pick(3, {1}));
    CHECK(mvc.value == 1.0);
    CHECK(mvc.feasible);
    auto mis = discrete_objective(kMis, path(2), pick(2, {0, 1}));
    CHECK(mis.value == 2.0);
    CHECK_FALSE(mis.feasible);
    auto mc = discrete_objective(kMc, path(3), pick(3, {0, 2}));
    CHECK(mc.value == 2.0);
    CHECK_FALSE(mc.feasible);
}

TEST_CASE("rounding hand traces") {
    std::vector<NodeId> order01{0, 1};
    auto a = round(kMis, path(2), SoftAssignment({0.9, 0.8}), order01);
    CHECK(a.selected() == std::vector<NodeId>{1});

    auto spec3 = ProblemSpec::with_beta(ProblemKind::MinVertexCover, 3.0);
    auto trace = round_with_trace(spec3, path(2), SoftAssignment({0.5, 0.5}), order01);
    CHECK(trace.solution.selected() == std::vector<NodeId>{0});
    CHECK(trace.step_losses[1] == doctest::Approx(1.5));
    CHECK(is_feasible(ProblemKind::MinVertexCover, path(2), trace.solution));

    std::vector<double> zeros(5, 0.0);
    auto empty = Graph::from_edge_list(5, std::vector<Edge>{});
    CHECK(round(kMis, empty, SoftAssignment(zeros)).count() == 5);

    std::vector<NodeId> bad{0, 0};
    CHECK_THROWS(round_with_trace(kMis, path(2), SoftAssignment({0.5, 0.5}), bad));
}

TEST_CASE("binary locally optimal solutions round to themselves") {
    // A maximal independent set, a minimal cover and a maximal clique are
    // fixed points of rounding.
    auto g = path(5);
    auto mis = pick(5, {0, 2, 4});
    CHECK(round(kMis, g, SoftAssignment(mis.as_doubles())) == mis);
    auto mvc = pick(5, {1, 3});
    CHECK(round(kMvc, g, SoftAssignment(mvc.as_doubles())) == mvc);
    auto mc = pick(5, {1, 2});
    CHECK(round(kMc, g, SoftAssignment(mc.as_doubles())) == mc);
}

TEST_CASE("rounding matches the full re-evaluation oracle") {
    Rng rng(19);
    for (int t = 0; t < 200; ++t) {
        auto g = testutil::random_graph(rng, 18);
        auto x = testutil::random_x(rng, g.num_nodes());
        for (auto k : testutil::kAllKinds) {
            auto spec = ProblemSpec::defaults(k);
            auto order = confidence_order(x);
            auto got = round_with_trace(spec, g, SoftAssignment(x), order);
            std::vector<int> ord(order.begin(), order.end());
            std::vector<double> trace;
            auto want = oracle::round_naive(testutil::kind_of(k), spec.beta, static_cast<int>(g.num_nodes()),
                                            testutil::edges_of(g), x, ord, &trace);
            CHECK(got.solution.as_doubles() == want);
            REQUIRE(got.step_losses.size() == trace.size());
            for (std::size_t s = 0; s < trace.size(); ++s)
                CHECK(got.step_losses[s] == doctest::Approx(trace[s]).epsilon(1e-9));
        }
    }
}

TEST_CASE("incremental candidate losses match full recomputation") {
    Rng rng(23);
    for (int t = 0; t < 100; ++t) {
        auto g = testutil::random_graph(rng, 20);
        auto x = testutil::random_x(rng, g.num_nodes());
        for (auto k : testutil::kAllKinds) {
            auto spec = ProblemSpec::defaults(k);
            RoundingState st(spec, g, x);
            // fix a random prefix first so the state mixes binary and soft entries
            auto y = x;
            for (NodeId v = 0; v < g.num_nodes(); ++v)
                if (rng.bernoulli(0.5)) y[v] = st.fix_best(v);
            const NodeId i = static_cast<NodeId>(rng.below(g.num_nodes()));
            auto c = st.candidate_losses(i);
            auto y0 = y, y1 = y;
            y0[i] = 0.0;
            y1[i] = 1.0;
            CHECK(std::abs(c.if_zero - relaxed_loss(spec, g, y0)) < 1e-9);
            CHECK(std::abs(c.if_one - relaxed_loss(spec, g, y1)) < 1e-9);
        }
    }
}

TEST_CASE("MIS candidate with all neighbors at zero gains exactly one") {
    auto g = path(3);
    std::vector<double> x{0.3, 0.0, 0.7};
    RoundingState st(kMis, g, x);
    auto c = st.candidate_losses(0);
    CHECK(c.if_zero - c.if_one == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exact optimum") {
    CHECK(exact_optimum(kMis, complete(4)).value == 1.0);
    CHECK(exact_optimum(kMvc, complete(4)).value == 3.0);
    auto p5 = exact_optimum(kMis, path(5));
    CHECK(p5.value == 3.0);
    CHECK(p5.witness.selected() == std::vector<NodeId>{0, 2, 4});
    CHECK_THROWS_AS(exact_optimum(kMis, Graph::from_edge_list(27, std::vector<Edge>{})), std::invalid_argument);
}

TEST_CASE("exact optimum agrees with brute-force enumeration") {
    Rng rng(29);
    for (int t = 0; t < 150; ++t) {
        auto g = testutil::random_graph(rng, 14, 0.7);
        for (auto k : testutil::kAllKinds) {
            auto opt = exact_optimum(ProblemSpec::defaults(k), g);
            const int want =
                oracle::brute_force(testutil::kind_of(k), static_cast<int>(g.num_nodes()), testutil::edges_of(g));
            CHECK(opt.value == static_cast<double>(want));
            CHECK(is_feasible(k, g, opt.witness));
            CHECK(static_cast<double>(opt.witness.count()) == opt.value);
        }
        CHECK(exact_optimum(kMis, g).value == exact_optimum(kMc, complement(g)).value);
    }
}

TEST_CASE("guarantee check") {
    auto X = round(kMis, path(2), SoftAssignment({1.0, 1.0}));
    auto rep = guarantee_check(kMis, path(2), 0.0, X);
    CHECK(rep.penalized == doctest::Approx(-1.0));
    CHECK(rep.bound_holds);
    CHECK(rep.feasible);
    CHECK(rep.feasibility_holds);
    // -n + beta = 0 here, so a zero loss certifies nothing
    CHECK_FALSE(rep.condition_met);

    auto one = round(kMis, path(2), SoftAssignment({0.9, 0.2}));
    auto strict = guarantee_check(kMis, path(2), relaxed_loss(kMis, path(2), std::vector<double>{0.9, 0.2}), one);
    CHECK(strict.condition_met);
    CHECK(strict.feasible);
    CHECK(objective_floor(ProblemKind::MaxClique, complete(4)) == -6.0);
    CHECK(objective_floor(ProblemKind::MinVertexCover, complete(4)) == 0.0);

    auto cover = pick(3, {1});
    auto loss = relaxed_loss(kMvc, path(3), cover.as_doubles());
    auto eq = guarantee_check(kMvc, path(3), loss, cover);
    CHECK(eq.penalized == doctest::Approx(loss));
    CHECK(eq.bound_holds);
}

TEST_CASE("rounding never increases the loss and respects the feasibility guarantee") {
    Rng rng(31);
    for (int t = 0; t < 200; ++t) {
        auto g = testutil::random_graph(rng, 40);
        auto x = testutil::random_x(rng, g.num_nodes());
        for (auto k : testutil::kAllKinds) {
            auto spec = ProblemSpec::defaults(k);
            auto order = confidence_order(x);
            auto tr = round_with_trace(spec, g, SoftAssignment(x), order);
            for (std::size_t s = 1; s < tr.step_losses.size(); ++s)
                CHECK(tr.step_losses[s] <= tr.step_losses[s - 1] + 1e-9);
            auto rep = guarantee_check(spec, g, tr.step_losses.front(), tr.solution);
            CHECK(rep.bound_holds);
            CHECK(rep.feasibility_holds);
        }
    }
}
