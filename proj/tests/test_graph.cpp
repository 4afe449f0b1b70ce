#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "helpers.hpp"
#include "metaco/graph.hpp"

using namespace metaco;
using testutil::complete;
using testutil::path;

TEST_CASE("from_edge_list normalizes pairs") {
    std::vector<Edge> e{{0, 1}, {1, 2}};
    auto g = Graph::from_edge_list(3, e);
    CHECK(g.num_edges() == 2);
    CHECK(g.degrees() == std::vector<std::size_t>{1, 2, 1});

    std::vector<Edge> dup{{0, 1}, {1, 0}, {2, 2}};
    auto h = Graph::from_edge_list(3, dup);
    CHECK(h.num_edges() == 1);
    CHECK(h.edges()[0] == Edge{0, 1});

    std::vector<Edge> bad{{0, 5}};
    CHECK_THROWS_AS(Graph::from_edge_list(2, bad), std::out_of_range);
}

TEST_CASE("adjacency agrees with the edge list") {
    Rng rng(3);
    for (int t = 0; t < 50; ++t) {
        auto g = testutil::random_graph(rng, 30);
        std::size_t total = 0;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            auto nb = g.neighbors(v);
            CHECK(nb.size() == g.degree(v));
            for (std::size_t k = 0; k < nb.size(); ++k) {
                CHECK(nb[k] != v);
                if (k) CHECK(nb[k - 1] < nb[k]);
                CHECK(g.has_edge(v, nb[k]));
            }
            total += nb.size();
        }
        CHECK(total == 2 * g.num_edges());
        for (auto [u, v] : g.edges()) CHECK(u < v);
    }
}

TEST_CASE("complement") {
    auto k3 = complete(3);
    CHECK(complement(k3).num_edges() == 0);
    CHECK(complement(Graph::from_edge_list(3, std::vector<Edge>{})) == k3);
    auto c = complement(path(3));
    REQUIRE(c.num_edges() == 1);
    CHECK(c.edges()[0] == Edge{0, 2});

    Rng rng(11);
    for (int t = 0; t < 50; ++t) {
        auto g = testutil::random_graph(rng, 25);
        CHECK(complement(complement(g)) == g);
        CHECK(complement(g).num_nodes() == g.num_nodes());
    }
}

TEST_CASE("induced_subgraph") {
    std::vector<NodeId> keep{0, 1};
    auto s = induced_subgraph(complete(3), keep);
    CHECK(s.graph.num_nodes() == 2);
    CHECK(s.graph.num_edges() == 1);

    std::vector<NodeId> ends{0, 2};
    auto p = induced_subgraph(path(3), ends);
    CHECK(p.graph.num_nodes() == 2);
    CHECK(p.graph.num_edges() == 0);
    CHECK(p.original == std::vector<NodeId>{0, 2});

    auto g = path(5);
    std::vector<NodeId> all{0, 1, 2, 3, 4};
    auto id = induced_subgraph(g, all);
    CHECK(id.graph == g);
    CHECK(id.original == all);
}

TEST_CASE("set predicates") {
    std::vector<NodeId> s012{0, 1, 2}, s01{0, 1}, s1{1};
    CHECK(is_clique(complete(3), s012));
    CHECK_FALSE(is_independent_set(path(2), s01));
    CHECK(is_vertex_cover(path(3), s1));
}

TEST_CASE("predicate dualities on random graphs") {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
        auto g = testutil::random_graph(rng, 12);
        std::vector<NodeId> s, rest;
        for (NodeId v = 0; v < g.num_nodes(); ++v) (rng.bernoulli(0.4) ? s : rest).push_back(v);
        CHECK(is_independent_set(g, s) == is_clique(complement(g), s));
        CHECK(is_vertex_cover(g, s) == is_independent_set(g, rest));
    }
}
