#pragma once

#include <cstdint>

#include "metaco/graph.hpp"
#include "metaco/problems.hpp"

namespace metaco {

/// Random greedy: repeatedly take a uniformly random alive node and delete it
/// together with its neighbors. Returns a maximal independent set.
DiscreteSolution rga_mis(const Graph& g, std::uint64_t seed);

/// Degree-based greedy: like rga_mis but always takes the alive node of
/// minimum current degree (lowest index on ties).
DiscreteSolution dga_mis(const Graph& g);

/// Repeatedly adds the node of maximum current degree (lowest index on ties)
/// to the cover and deletes its incident edges.
DiscreteSolution greedy_mvc(const Graph& g);

/// dga_mis on the complement graph; the result is a clique of g.
DiscreteSolution toenshoff_greedy_mc(const Graph& g);

namespace detail {
// True when the degree-bucket queue uses per-degree bitsets (linear time);
// graphs whose max degree would make those too large use heaps instead.
bool use_bit_buckets(const Graph& g);
}  // namespace detail

}  // namespace metaco
