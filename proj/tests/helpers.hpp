#pragma once

#include <vector>

#include "metaco/graph.hpp"
#include "metaco/instance_gen.hpp"
#include "metaco/problems.hpp"
#include "metaco/rng.hpp"
#include "oracles.hpp"

namespace testutil {

inline oracle::EdgeList edges_of(const metaco::Graph& g) {
    oracle::EdgeList out;
    for (auto [u, v] : g.edges()) out.emplace_back(static_cast<int>(u), static_cast<int>(v));
    return out;
}

inline oracle::Kind kind_of(metaco::ProblemKind k) {
    switch (k) {
        case metaco::ProblemKind::MaxClique: return oracle::Kind::MC;
        case metaco::ProblemKind::MinVertexCover: return oracle::Kind::MVC;
        case metaco::ProblemKind::MaxIndependentSet: return oracle::Kind::MIS;
    }
    return oracle::Kind::MIS;
}

inline constexpr metaco::ProblemKind kAllKinds[] = {metaco::ProblemKind::MaxClique,
                                                    metaco::ProblemKind::MinVertexCover,
                                                    metaco::ProblemKind::MaxIndependentSet};

inline metaco::Graph path(std::size_t n) {
    std::vector<metaco::Edge> e;
    for (metaco::NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return metaco::Graph::from_edge_list(n, e);
}

inline metaco::Graph complete(std::size_t n) {
    std::vector<metaco::Edge> e;
    for (metaco::NodeId i = 0; i < n; ++i)
        for (metaco::NodeId j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return metaco::Graph::from_edge_list(n, e);
}

inline metaco::Graph random_graph(metaco::Rng& rng, std::size_t max_n, double max_p = 0.6) {
    const std::size_t n = 1 + rng.below(max_n);
    return metaco::gen_er(n, rng.uniform(0.0, max_p), rng.next());
}

inline std::vector<double> random_x(metaco::Rng& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform();
    return x;
}

}  // namespace testutil
