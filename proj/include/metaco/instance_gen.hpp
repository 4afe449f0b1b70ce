#pragma once

#include <cstddef>
#include <cstdint>

#include "metaco/graph.hpp"

namespace metaco {

/// RB-model parameters: `groups` cliques of `group_size` nodes each, with
/// cross-group edges whose density is governed by `rho`.
struct RbParams {
    std::size_t groups = 20;
    std::size_t group_size = 10;
    double rho = 0.25;
    std::uint64_t seed = 0;
};

struct RrgParams {
    std::size_t n = 0;
    std::size_t degree = 3;
    std::uint64_t seed = 0;
};

/// Preset sizings for the RB benchmark families.
RbParams rb200(double rho, std::uint64_t seed);
RbParams rb500(double rho, std::uint64_t seed);
RbParams rb1000(double rho, std::uint64_t seed);

/// Any independent set of the result has at most `groups` nodes.
Graph gen_rb(const RbParams& p);

/// Simple d-regular graph. Throws std::invalid_argument on odd n*d or
/// d >= n, std::runtime_error when the retry budget is exhausted.
Graph gen_rrg(const RrgParams& p);

/// Erdos-Renyi G(n, p).
Graph gen_er(std::size_t n, double p, std::uint64_t seed);

inline constexpr int kRrgRetryBudget = 200;

}  // namespace metaco
