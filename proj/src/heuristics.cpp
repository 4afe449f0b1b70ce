#include "metaco/heuristics.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "metaco/rng.hpp"

namespace metaco {

namespace {

// Set of node indices with lowest-member lookup: a 64-ary bitset tree, so
// insert, erase and front each touch one word per level.
class IndexSet {
public:
    explicit IndexSet(std::size_t n) {
        std::size_t len = std::max<std::size_t>(n, 1);
        do {
            len = (len + 63) / 64;
            levels_.emplace_back(len, 0);
        } while (len > 1);
    }

    bool empty() const { return levels_.back()[0] == 0; }

    void insert(std::size_t i) {
        for (auto& level : levels_) {
            auto& w = level[i >> 6];
            const bool had_any = w != 0;
            w |= std::uint64_t{1} << (i & 63);
            if (had_any) return;
            i >>= 6;
        }
    }

    void erase(std::size_t i) {
        for (auto& level : levels_) {
            auto& w = level[i >> 6];
            w &= ~(std::uint64_t{1} << (i & 63));
            if (w != 0) return;
            i >>= 6;
        }
    }

    std::size_t front() const {
        std::size_t i = 0;
        for (std::size_t l = levels_.size(); l-- > 0;)
            i = (i << 6) | static_cast<std::size_t>(std::countr_zero(levels_[l][i]));
        return i;
    }

private:
    std::vector<std::vector<std::uint64_t>> levels_;
};

constexpr std::uint32_t kDead = ~std::uint32_t{0};

// Bucket queue over current degrees, ties to the lowest index. One IndexSet
// per degree keeps every operation O(1) for practical n, at
// (max degree + 1) * n / 64 words.
class BitBuckets {
public:
    explicit BitBuckets(const Graph& g, std::uint32_t max_degree) : state_(g.num_nodes()) {
        buckets_.assign(std::size_t{max_degree} + 1, IndexSet(g.num_nodes()));
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            state_[v] = static_cast<std::uint32_t>(g.degree(v));
            buckets_[state_[v]].insert(v);
        }
        remaining_ = g.num_nodes();
        high_ = max_degree;
    }

    bool empty() const { return remaining_ == 0; }
    bool alive(NodeId v) const { return state_[v] != kDead; }
    std::size_t degree(NodeId v) const { return state_[v]; }

    NodeId pop_min() {
        while (buckets_[low_].empty()) ++low_;
        return take(low_);
    }

    NodeId pop_max() {
        while (buckets_[high_].empty()) --high_;
        return take(high_);
    }

    void remove(NodeId v) {
        buckets_[state_[v]].erase(v);
        state_[v] = kDead;
        --remaining_;
    }

    void decrement(NodeId v) {
        buckets_[state_[v]].erase(v);
        const std::uint32_t d = --state_[v];
        buckets_[d].insert(v);
        low_ = std::min(low_, d);
    }

private:
    // pops leave the node alive; callers remove it
    NodeId take(std::uint32_t d) { return static_cast<NodeId>(buckets_[d].front()); }

    std::vector<std::uint32_t> state_;  // current degree, or kDead
    std::vector<IndexSet> buckets_;
    std::size_t remaining_ = 0;
    std::uint32_t low_ = 0;
    std::uint32_t high_ = 0;
};

// Same queue for graphs with a few very high degrees, where per-degree
// bitsets would dwarf the graph. Each bucket keeps its initial members as a
// sorted run read by a cursor plus a min-heap of later arrivals; stale
// entries are skipped lazily. O(log n) per operation.
class HeapBuckets {
public:
    explicit HeapBuckets(const Graph& g, std::uint32_t max_degree) : state_(g.num_nodes()) {
        buckets_.resize(std::size_t{max_degree} + 1);
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            state_[v] = static_cast<std::uint32_t>(g.degree(v));
            buckets_[state_[v]].initial.push_back(v);
        }
        remaining_ = g.num_nodes();
        high_ = max_degree;
    }

    bool empty() const { return remaining_ == 0; }
    bool alive(NodeId v) const { return state_[v] != kDead; }
    std::size_t degree(NodeId v) const { return state_[v]; }

    NodeId pop_min() {
        for (;; ++low_) {
            if (auto v = peek_valid(low_)) return *v;
        }
    }

    NodeId pop_max() {
        for (;; --high_) {
            if (auto v = peek_valid(high_)) return *v;
        }
    }

    void remove(NodeId v) {
        state_[v] = kDead;
        --remaining_;
    }

    void decrement(NodeId v) {
        const std::uint32_t d = --state_[v];
        auto& h = buckets_[d].pushed;
        h.push_back(v);
        std::push_heap(h.begin(), h.end(), std::greater<>());
        low_ = std::min(low_, d);
    }

private:
    struct Bucket {
        std::vector<NodeId> initial;  // ascending
        std::size_t cursor = 0;
        std::vector<NodeId> pushed;   // min-heap
    };

    // Drops stale entries and returns the lowest valid one without consuming
    // it; once the caller removes it, it becomes stale too.
    std::optional<NodeId> peek_valid(std::uint32_t d) {
        auto& b = buckets_[d];
        for (;;) {
            const bool has_initial = b.cursor < b.initial.size();
            const bool from_heap = !b.pushed.empty() && (!has_initial || b.pushed.front() < b.initial[b.cursor]);
            if (!from_heap && !has_initial) return std::nullopt;
            const NodeId v = from_heap ? b.pushed.front() : b.initial[b.cursor];
            if (state_[v] == d) return v;
            if (from_heap) {
                std::pop_heap(b.pushed.begin(), b.pushed.end(), std::greater<>());
                b.pushed.pop_back();
            } else {
                ++b.cursor;
            }
        }
    }

    std::vector<std::uint32_t> state_;
    std::vector<Bucket> buckets_;
    std::size_t remaining_ = 0;
    std::uint32_t low_ = 0;
    std::uint32_t high_ = 0;
};

// Deletes v's alive neighbors and updates the degrees around them.
template <class Queue>
void delete_neighborhood(const Graph& g, Queue& q, NodeId v) {
    for (NodeId u : g.neighbors(v)) {
        if (!q.alive(u)) continue;
        q.remove(u);
        for (NodeId w : g.neighbors(u)) {
            if (q.alive(w)) q.decrement(w);
        }
    }
}

template <class Queue>
DiscreteSolution dga_with(const Graph& g, Queue q) {
    std::vector<std::uint8_t> chosen(g.num_nodes(), 0);
    while (!q.empty()) {
        const NodeId v = q.pop_min();
        chosen[v] = 1;
        q.remove(v);
        delete_neighborhood(g, q, v);
    }
    return DiscreteSolution(std::move(chosen));
}

template <class Queue>
DiscreteSolution greedy_mvc_with(const Graph& g, Queue q) {
    std::vector<std::uint8_t> chosen(g.num_nodes(), 0);
    while (!q.empty()) {
        const NodeId v = q.pop_max();
        if (q.degree(v) == 0) break;
        chosen[v] = 1;
        q.remove(v);
        for (NodeId u : g.neighbors(v)) {
            if (q.alive(u)) q.decrement(u);
        }
    }
    return DiscreteSolution(std::move(chosen));
}

std::uint32_t max_degree(const Graph& g) {
    std::size_t d = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) d = std::max(d, g.degree(v));
    return static_cast<std::uint32_t>(d);
}

}  // namespace

namespace detail {

bool use_bit_buckets(const Graph& g) {
    // bitset words against the CSR footprint in words
    const std::size_t words_per_bucket = g.num_nodes() / 64 + 1;
    const std::size_t bitset_words = (std::size_t{max_degree(g)} + 1) * words_per_bucket;
    return bitset_words <= 4 * (g.num_nodes() + g.num_edges()) + 1024;
}

}  // namespace detail

DiscreteSolution rga_mis(const Graph& g, std::uint64_t seed) {
    const std::size_t n = g.num_nodes();
    Rng rng(seed);
    // alive nodes packed at the front of `pool`; `slot` is the inverse map
    std::vector<NodeId> pool(n);
    std::vector<std::size_t> slot(n);
    for (NodeId v = 0; v < n; ++v) {
        pool[v] = v;
        slot[v] = v;
    }
    std::size_t alive = n;
    auto kill = [&](NodeId v) {
        const std::size_t s = slot[v];
        if (s >= alive) return;
        const NodeId last = pool[--alive];
        pool[s] = last;
        slot[last] = s;
        pool[alive] = v;
        slot[v] = alive;
    };

    std::vector<std::uint8_t> chosen(n, 0);
    while (alive > 0) {
        const NodeId v = pool[rng.below(alive)];
        chosen[v] = 1;
        kill(v);
        for (NodeId u : g.neighbors(v)) kill(u);
    }
    return DiscreteSolution(std::move(chosen));
}

DiscreteSolution dga_mis(const Graph& g) {
    if (detail::use_bit_buckets(g)) return dga_with(g, BitBuckets(g, max_degree(g)));
    return dga_with(g, HeapBuckets(g, max_degree(g)));
}

DiscreteSolution greedy_mvc(const Graph& g) {
    if (g.num_edges() == 0) return DiscreteSolution(std::vector<std::uint8_t>(g.num_nodes(), 0));
    if (detail::use_bit_buckets(g)) return greedy_mvc_with(g, BitBuckets(g, max_degree(g)));
    return greedy_mvc_with(g, HeapBuckets(g, max_degree(g)));
}

DiscreteSolution toenshoff_greedy_mc(const Graph& g) { return dga_mis(complement(g)); }

}  // namespace metaco
