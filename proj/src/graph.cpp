#include "metaco/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace metaco {

namespace {

std::vector<char> membership(std::size_t n, std::span<const NodeId> nodes) {
    std::vector<char> in(n, 0);
    for (NodeId v : nodes) {
        if (v >= n) throw std::out_of_range("node id " + std::to_string(v) + " out of range");
        in[v] = 1;
    }
    return in;
}

}  // namespace

Graph::Graph() : data_(std::make_shared<const Data>()) {}

Graph Graph::from_edge_list(std::size_t n, std::span<const Edge> pairs) {
    auto data = std::make_shared<Data>();
    data->n = n;
    data->edges.reserve(pairs.size());
    for (auto [u, v] : pairs) {
        if (u >= n || v >= n) {
            throw std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                                    ") has node id out of range for n=" + std::to_string(n));
        }
        if (u == v) continue;
        data->edges.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(data->edges.begin(), data->edges.end());
    data->edges.erase(std::unique(data->edges.begin(), data->edges.end()), data->edges.end());

    std::vector<std::size_t> deg(n, 0);
    for (auto [u, v] : data->edges) {
        ++deg[u];
        ++deg[v];
    }
    data->offsets.assign(n + 1, 0);
    for (std::size_t v = 0; v < n; ++v) data->offsets[v + 1] = data->offsets[v] + deg[v];
    data->adjacency.resize(data->offsets[n]);
    std::vector<std::size_t> fill(data->offsets.begin(), data->offsets.end() - 1);
    for (auto [u, v] : data->edges) data->adjacency[fill[v]++] = u;
    for (auto [u, v] : data->edges) data->adjacency[fill[u]++] = v;
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(data->adjacency.begin() + static_cast<std::ptrdiff_t>(data->offsets[v]),
                  data->adjacency.begin() + static_cast<std::ptrdiff_t>(data->offsets[v + 1]));
    }
    return Graph(std::move(data));
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> out(num_nodes());
    for (NodeId v = 0; v < out.size(); ++v) out[v] = degree(v);
    return out;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes() || v >= num_nodes() || u == v) return false;
    if (degree(u) > degree(v)) std::swap(u, v);
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

Graph complement(const Graph& g) {
    const std::size_t n = g.num_nodes();
    std::vector<Edge> pairs;
    pairs.reserve(n * (n - (n > 0 ? 1 : 0)) / 2 - g.num_edges());
    for (NodeId u = 0; u < n; ++u) {
        auto nb = g.neighbors(u);
        auto it = std::upper_bound(nb.begin(), nb.end(), u);
        for (NodeId v = u + 1; v < n; ++v) {
            if (it != nb.end() && *it == v) {
                ++it;
                continue;
            }
            pairs.emplace_back(u, v);
        }
    }
    return Graph::from_edge_list(n, pairs);
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> keep) {
    const std::size_t n = g.num_nodes();
    auto in = membership(n, keep);
    Subgraph out;
    std::vector<NodeId> relabel(n, 0);
    for (NodeId v = 0; v < n; ++v) {
        if (!in[v]) continue;
        relabel[v] = static_cast<NodeId>(out.original.size());
        out.original.push_back(v);
    }
    std::vector<Edge> pairs;
    for (auto [u, v] : g.edges()) {
        if (in[u] && in[v]) pairs.emplace_back(relabel[u], relabel[v]);
    }
    out.graph = Graph::from_edge_list(out.original.size(), pairs);
    return out;
}

bool is_clique(const Graph& g, std::span<const NodeId> nodes) {
    auto in = membership(g.num_nodes(), nodes);
    std::vector<NodeId> s;
    for (NodeId v = 0; v < in.size(); ++v) {
        if (in[v]) s.push_back(v);
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        // every member needs |s|-1 neighbors inside s
        std::size_t inside = 0;
        for (NodeId u : g.neighbors(s[i])) inside += in[u] ? 1 : 0;
        if (inside + 1 != s.size()) return false;
    }
    return true;
}

bool is_independent_set(const Graph& g, std::span<const NodeId> nodes) {
    auto in = membership(g.num_nodes(), nodes);
    for (auto [u, v] : g.edges()) {
        if (in[u] && in[v]) return false;
    }
    return true;
}

bool is_vertex_cover(const Graph& g, std::span<const NodeId> nodes) {
    auto in = membership(g.num_nodes(), nodes);
    for (auto [u, v] : g.edges()) {
        if (!in[u] && !in[v]) return false;
    }
    return true;
}

}  // namespace metaco
