#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace metaco {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Immutable simple undirected graph on nodes 0..n-1.
///
/// Edges are stored once as (u, v) with u < v, sorted lexicographically.
/// Neighbor lists are sorted. Copies share the underlying storage.
class Graph {
public:
    Graph();

    /// Normalizes `pairs`: self-loops are dropped, duplicates merged and
    /// every pair ordered u < v. Throws std::out_of_range on ids >= n.
    static Graph from_edge_list(std::size_t n, std::span<const Edge> pairs);
    static Graph from_edge_list(std::size_t n, const std::vector<Edge>& pairs) {
        return from_edge_list(n, std::span<const Edge>(pairs));
    }

    std::size_t num_nodes() const { return data_->n; }
    std::size_t num_edges() const { return data_->edges.size(); }

    const std::vector<Edge>& edges() const { return data_->edges; }
    std::span<const NodeId> neighbors(NodeId v) const {
        const auto begin = data_->offsets[v];
        const auto end = data_->offsets[v + 1];
        return {data_->adjacency.data() + begin, end - begin};
    }
    std::size_t degree(NodeId v) const { return data_->offsets[v + 1] - data_->offsets[v]; }
    std::vector<std::size_t> degrees() const;

    bool has_edge(NodeId u, NodeId v) const;

    friend bool operator==(const Graph& a, const Graph& b) {
        return a.num_nodes() == b.num_nodes() && a.edges() == b.edges();
    }

private:
    struct Data {
        std::size_t n = 0;
        std::vector<Edge> edges;
        // CSR adjacency
        std::vector<std::size_t> offsets{0};
        std::vector<NodeId> adjacency;
    };
    explicit Graph(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

    std::shared_ptr<const Data> data_;
};

Graph complement(const Graph& g);

struct Subgraph {
    Graph graph;
    /// new id -> original id
    std::vector<NodeId> original;
};

/// Keeps the nodes in `keep` (any order, duplicates ignored) and relabels
/// them 0..k-1 in ascending original-id order.
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> keep);

bool is_clique(const Graph& g, std::span<const NodeId> nodes);
bool is_independent_set(const Graph& g, std::span<const NodeId> nodes);
bool is_vertex_cover(const Graph& g, std::span<const NodeId> nodes);

}  // namespace metaco
