#include "metaco/instance_gen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "metaco/rng.hpp"

namespace metaco {

RbParams rb200(double rho, std::uint64_t seed) { return {20, 10, rho, seed}; }
RbParams rb500(double rho, std::uint64_t seed) { return {25, 20, rho, seed}; }
RbParams rb1000(double rho, std::uint64_t seed) { return {40, 25, rho, seed}; }

Graph gen_rb(const RbParams& p) {
    if (p.groups < 2) throw std::invalid_argument("RB model needs groups >= 2");
    if (p.group_size < 2) throw std::invalid_argument("RB model needs group_size >= 2");
    if (!(p.rho > 0.0 && p.rho < 1.0)) throw std::invalid_argument("RB model needs 0 < rho < 1");

    const std::size_t k = p.group_size;
    const std::size_t n = p.groups * k;
    std::vector<Edge> edges;
    for (std::size_t g = 0; g < p.groups; ++g) {
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = a + 1; b < k; ++b) {
                edges.emplace_back(static_cast<NodeId>(g * k + a), static_cast<NodeId>(g * k + b));
            }
        }
    }

    const double groups = static_cast<double>(p.groups);
    const double alpha = std::log(static_cast<double>(k)) / std::log(groups);
    const double r = -alpha / std::log(1.0 - p.rho);
    const auto iterations = static_cast<std::size_t>(std::llround(r * groups * std::log(groups)));
    const auto per_iteration = static_cast<std::size_t>(std::llround(p.rho * static_cast<double>(k * k)));

    Rng rng(p.seed);
    std::set<std::pair<std::size_t, std::size_t>> picked;
    for (std::size_t it = 0; it < iterations; ++it) {
        const std::size_t g1 = rng.below(p.groups);
        std::size_t g2 = rng.below(p.groups - 1);
        if (g2 >= g1) ++g2;
        picked.clear();
        while (picked.size() < per_iteration) {
            const std::size_t a = rng.below(k);
            const std::size_t b = rng.below(k);
            if (!picked.emplace(a, b).second) continue;
            edges.emplace_back(static_cast<NodeId>(g1 * k + a), static_cast<NodeId>(g2 * k + b));
        }
    }
    return Graph::from_edge_list(n, edges);
}

namespace {

bool adjacent(const std::vector<std::vector<NodeId>>& adj, NodeId u, NodeId v) {
    const auto& a = adj[u].size() < adj[v].size() ? adj[u] : adj[v];
    const NodeId other = adj[u].size() < adj[v].size() ? v : u;
    return std::find(a.begin(), a.end(), other) != a.end();
}

// Pairing model with per-pair rejection: only the offending pair is
// redrawn; the whole pairing restarts when no admissible pair remains.
bool try_pairing(std::size_t n, std::size_t d, Rng& rng, std::vector<Edge>& out) {
    std::vector<NodeId> stubs;
    stubs.reserve(n * d);
    for (std::size_t v = 0; v < n; ++v) stubs.insert(stubs.end(), d, static_cast<NodeId>(v));
    std::vector<std::vector<NodeId>> adj(n);
    out.clear();

    auto take = [&](std::size_t i, std::size_t j) {
        const NodeId u = stubs[i];
        const NodeId v = stubs[j];
        adj[u].push_back(v);
        adj[v].push_back(u);
        out.emplace_back(u, v);
        if (i < j) std::swap(i, j);
        stubs[i] = stubs.back();
        stubs.pop_back();
        stubs[j] = stubs.back();
        stubs.pop_back();
    };

    constexpr int kAttempts = 64;
    while (!stubs.empty()) {
        bool placed = false;
        for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
            const std::size_t i = rng.below(stubs.size());
            const std::size_t j = rng.below(stubs.size());
            if (i == j || stubs[i] == stubs[j] || adjacent(adj, stubs[i], stubs[j])) continue;
            take(i, j);
            placed = true;
        }
        if (placed) continue;
        // Enumerate what is still admissible; this is only reached near the end.
        std::vector<std::pair<std::size_t, std::size_t>> admissible;
        for (std::size_t i = 0; i < stubs.size(); ++i) {
            for (std::size_t j = i + 1; j < stubs.size(); ++j) {
                if (stubs[i] != stubs[j] && !adjacent(adj, stubs[i], stubs[j])) admissible.emplace_back(i, j);
            }
        }
        if (admissible.empty()) return false;
        auto [i, j] = admissible[rng.below(admissible.size())];
        take(i, j);
    }
    return true;
}

}  // namespace

Graph gen_rrg(const RrgParams& p) {
    if ((p.n * p.degree) % 2 != 0) {
        throw std::invalid_argument("random regular graph needs n*d even (n=" + std::to_string(p.n) +
                                    ", d=" + std::to_string(p.degree) + ")");
    }
    if (p.degree >= p.n) throw std::invalid_argument("random regular graph needs d < n");
    Rng rng(p.seed);
    std::vector<Edge> edges;
    for (int attempt = 0; attempt < kRrgRetryBudget; ++attempt) {
        if (try_pairing(p.n, p.degree, rng, edges)) return Graph::from_edge_list(p.n, edges);
    }
    throw std::runtime_error("random regular graph generation failed after " +
                             std::to_string(kRrgRetryBudget) + " attempts");
}

Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("edge probability must be in [0, 1]");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = u + 1; v < n; ++v) {
            if (rng.uniform() < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }
    }
    return Graph::from_edge_list(n, edges);
}

}  // namespace metaco
