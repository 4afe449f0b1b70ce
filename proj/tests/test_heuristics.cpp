#include <doctest.h>

#include <vector>

#include "helpers.hpp"
#include "metaco/heuristics.hpp"
#include "metaco/problems.hpp"

using namespace metaco;
using testutil::complete;
using testutil::path;

namespace {

Graph star(std::size_t leaves) {
    std::vector<Edge> e;
    for (NodeId i = 1; i <= leaves; ++i) e.emplace_back(0, i);
    return Graph::from_edge_list(leaves + 1, e);
}

bool maximal_independent(const Graph& g, const DiscreteSolution& X) {
    if (!is_feasible(ProblemKind::MaxIndependentSet, g, X)) return false;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (X[v]) continue;
        bool blocked = false;
        for (NodeId u : g.neighbors(v)) blocked = blocked || X[u];
        if (!blocked) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("RGA") {
    auto empty = Graph::from_edge_list(5, std::vector<Edge>{});
    CHECK(rga_mis(empty, 1).count() == 5);
    CHECK(rga_mis(complete(4), 1).count() == 1);
    auto g = gen_rrg({60, 5, 2});
    CHECK(rga_mis(g, 3) == rga_mis(g, 3));
}

TEST_CASE("DGA") {
    CHECK(dga_mis(path(3)).selected() == std::vector<NodeId>{0, 2});
    CHECK(dga_mis(complete(4)).count() == 1);
    CHECK(dga_mis(star(4)).selected() == std::vector<NodeId>{1, 2, 3, 4});
}

TEST_CASE("greedy vertex cover") {
    CHECK(greedy_mvc(star(3)).selected() == std::vector<NodeId>{0});
    CHECK(greedy_mvc(Graph::from_edge_list(4, std::vector<Edge>{})).count() == 0);
    CHECK(greedy_mvc(path(2)).count() == 1);
}

TEST_CASE("Toenshoff clique greedy") {
    CHECK(toenshoff_greedy_mc(complete(3)).count() == 3);
    CHECK(toenshoff_greedy_mc(Graph::from_edge_list(3, std::vector<Edge>{})).count() == 1);
    auto p = toenshoff_greedy_mc(path(3));
    CHECK(p.count() == 2);
    CHECK(p[1]);
}

TEST_CASE("heuristic outputs are always valid") {
    Rng rng(83);
    for (int t = 0; t < 300; ++t) {
        auto g = testutil::random_graph(rng, 40);
        CHECK(maximal_independent(g, rga_mis(g, rng.next())));
        CHECK(maximal_independent(g, dga_mis(g)));
        CHECK(is_feasible(ProblemKind::MinVertexCover, g, greedy_mvc(g)));
        CHECK(is_feasible(ProblemKind::MaxClique, g, toenshoff_greedy_mc(g)));
    }
}

TEST_CASE("degree greedies match a rescanning reference") {
    auto check = [](const Graph& g) {
        const auto e = testutil::edges_of(g);
        const int n = static_cast<int>(g.num_nodes());
        std::vector<NodeId> dga, mvc;
        for (int v : oracle::greedy_by_scan(true, n, e)) dga.push_back(static_cast<NodeId>(v));
        for (int v : oracle::greedy_by_scan(false, n, e)) mvc.push_back(static_cast<NodeId>(v));
        CHECK(dga_mis(g).selected() == dga);
        CHECK(greedy_mvc(g).selected() == mvc);
    };
    Rng rng(84);
    SUBCASE("bitset buckets") {
        for (int t = 0; t < 200; ++t) {
            auto g = testutil::random_graph(rng, 60);
            REQUIRE(detail::use_bit_buckets(g));
            check(g);
        }
        for (std::uint64_t s = 0; s < 5; ++s) check(gen_rrg({500, 3 + s % 3, s}));
    }
    SUBCASE("heap buckets") {
        // a few hubs over a sparse graph push the max degree far above the mean
        for (int t = 0; t < 4; ++t) {
            const NodeId n = 3000;
            std::vector<Edge> e;
            for (NodeId hub : {NodeId{11}, NodeId{18}})
                for (NodeId v = 0; v < n; ++v) e.emplace_back(hub, v);
            for (NodeId k = 0; k < n; ++k) {
                const auto u = static_cast<NodeId>(rng.below(n));
                const auto v = static_cast<NodeId>(rng.below(n));
                if (u != v) e.emplace_back(u, v);
            }
            auto g = Graph::from_edge_list(n, e);
            REQUIRE_FALSE(detail::use_bit_buckets(g));
            check(g);
        }
    }
}

TEST_CASE("DGA is at least as good as RGA on random regular graphs") {
    double dga = 0, rga = 0;
    for (std::uint64_t i = 0; i < 60; ++i) {
        auto g = gen_rrg({100, 3 + 2 * (i % 3), i});
        dga += static_cast<double>(dga_mis(g).count());
        rga += static_cast<double>(rga_mis(g, i).count());
    }
    CHECK(dga >= rga);
}
