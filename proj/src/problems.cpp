#include "metaco/problems.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace metaco {

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::MaxClique: return "mc";
        case ProblemKind::MinVertexCover: return "mvc";
        case ProblemKind::MaxIndependentSet: return "mis";
    }
    return "?";
}

ProblemKind parse_problem(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "mc") return ProblemKind::MaxClique;
    if (lower == "mvc") return ProblemKind::MinVertexCover;
    if (lower == "mis") return ProblemKind::MaxIndependentSet;
    throw std::invalid_argument("unknown problem '" + std::string(name) + "' (expected mc, mvc or mis)");
}

ProblemSpec ProblemSpec::defaults(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::MaxClique: return {kind, 2.0};
        case ProblemKind::MinVertexCover: return {kind, 5.0};
        case ProblemKind::MaxIndependentSet: return {kind, 2.0};
    }
    return {kind, 2.0};
}

ProblemSpec ProblemSpec::with_beta(ProblemKind kind, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("penalty beta must be positive");
    return {kind, beta};
}

SoftAssignment::SoftAssignment(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("soft assignment entries must lie in [0, 1]");
    }
}

DiscreteSolution::DiscreteSolution(std::vector<std::uint8_t> values) : values_(std::move(values)) {
    for (auto& v : values_) {
        if (v > 1) throw std::invalid_argument("discrete solution entries must be 0 or 1");
    }
}

DiscreteSolution DiscreteSolution::from_selected(std::size_t n, std::span<const NodeId> selected) {
    std::vector<std::uint8_t> values(n, 0);
    for (NodeId v : selected) {
        if (v >= n) throw std::out_of_range("selected node out of range");
        values[v] = 1;
    }
    return DiscreteSolution(std::move(values));
}

std::vector<NodeId> DiscreteSolution::selected() const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < values_.size(); ++i) {
        if (values_[i]) out.push_back(i);
    }
    return out;
}

std::size_t DiscreteSolution::count() const {
    return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

std::vector<double> DiscreteSolution::as_doubles() const { return {values_.begin(), values_.end()}; }

double relaxed_loss(const ProblemSpec& spec, const Graph& g, std::span<const double> x) {
    if (x.size() != g.num_nodes()) {
        throw std::invalid_argument("assignment length " + std::to_string(x.size()) + " does not match n=" +
                                    std::to_string(g.num_nodes()));
    }
    const double beta = spec.beta;
    switch (spec.kind) {
        case ProblemKind::MaxIndependentSet: {
            double total = 0.0;
            for (double v : x) total += v;
            double conflicts = 0.0;
            for (auto [u, v] : g.edges()) conflicts += x[u] * x[v];
            return -total + beta * conflicts;
        }
        case ProblemKind::MinVertexCover: {
            double total = 0.0;
            for (double v : x) total += v;
            double uncovered = 0.0;
            for (auto [u, v] : g.edges()) uncovered += (1.0 - x[u]) * (1.0 - x[v]);
            return total + beta * uncovered;
        }
        case ProblemKind::MaxClique: {
            double inside = 0.0;
            for (auto [u, v] : g.edges()) inside += x[u] * x[v];
            double total = 0.0;
            double squares = 0.0;
            for (double v : x) {
                total += v;
                squares += v * v;
            }
            // sum over ordered pairs i != j
            const double all_pairs = total * total - squares;
            return -(beta + 1.0) * inside + 0.5 * beta * all_pairs;
        }
    }
    return 0.0;
}

double penalized_objective(const ProblemSpec& spec, const Graph& g, const DiscreteSolution& X) {
    return relaxed_loss(spec, g, X.as_doubles());
}

bool is_feasible(ProblemKind kind, const Graph& g, const DiscreteSolution& X) {
    const auto sel = X.selected();
    switch (kind) {
        case ProblemKind::MaxClique: return is_clique(g, sel);
        case ProblemKind::MinVertexCover: return is_vertex_cover(g, sel);
        case ProblemKind::MaxIndependentSet: return is_independent_set(g, sel);
    }
    return false;
}

ObjectiveValue discrete_objective(const ProblemSpec& spec, const Graph& g, const DiscreteSolution& X) {
    if (X.size() != g.num_nodes()) throw std::invalid_argument("solution length does not match graph");
    return {static_cast<double>(X.count()), is_feasible(spec.kind, g, X)};
}

std::vector<NodeId> confidence_order(std::span<const double> x) {
    std::vector<NodeId> order(x.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return x[a] > x[b]; });
    return order;
}

RoundingState::RoundingState(const ProblemSpec& spec, const Graph& g, std::span<const double> x)
    : spec_(spec),
      graph_(g),
      y_(x.begin(), x.end()),
      fixed_(x.size(), 0),
      nb_soft_(x.size(), 0.0),
      nb_ones_(x.size(), 0),
      nb_soft_left_(x.size(), 0),
      soft_left_(x.size()) {
    if (x.size() != g.num_nodes()) throw std::invalid_argument("assignment length does not match graph");
    loss_ = relaxed_loss(spec, g, x);
    const bool complemented = spec.kind == ProblemKind::MinVertexCover;
    for (NodeId v = 0; v < y_.size(); ++v) {
        total_soft_ += y_[v];
        double s = 0.0;
        for (NodeId u : g.neighbors(v)) s += complemented ? 1.0 - y_[u] : y_[u];
        nb_soft_[v] = s;
        nb_soft_left_[v] = g.degree(v);
    }
}

double RoundingState::neighbor_sum(NodeId i) const { return static_cast<double>(nb_ones_[i]) + nb_soft_[i]; }

// d loss / d y_i with every other entry held fixed (the loss is affine in y_i).
double RoundingState::slope(NodeId i) const {
    const double beta = spec_.beta;
    switch (spec_.kind) {
        case ProblemKind::MaxIndependentSet: return -1.0 + beta * neighbor_sum(i);
        case ProblemKind::MinVertexCover: return 1.0 - beta * neighbor_sum(i);
        case ProblemKind::MaxClique: {
            // sum of the other entries; exact whenever they are all fixed
            double others = 0.0;
            if (fixed_[i]) {
                others = static_cast<double>(total_ones_) - y_[i] + total_soft_;
            } else {
                others = static_cast<double>(total_ones_) + (soft_left_ == 1 ? 0.0 : total_soft_ - y_[i]);
            }
            return -(beta + 1.0) * neighbor_sum(i) + beta * others;
        }
    }
    return 0.0;
}

RoundingState::Candidates RoundingState::candidate_losses(NodeId i) const {
    const double s = slope(i);
    return {loss_ - y_[i] * s, loss_ + (1.0 - y_[i]) * s};
}

void RoundingState::fix(NodeId i, double value) {
    if (value != 0.0 && value != 1.0) throw std::invalid_argument("rounding fixes entries to 0 or 1");
    const double delta = value - y_[i];
    loss_ += delta * slope(i);
    const bool complemented = spec_.kind == ProblemKind::MinVertexCover;
    auto contrib = [complemented](double y) { return complemented ? 1.0 - y : y; };
    const int old_one = fixed_[i] && contrib(y_[i]) == 1.0 ? 1 : 0;
    const int new_one = contrib(value) == 1.0 ? 1 : 0;
    for (NodeId u : graph_.neighbors(i)) {
        if (fixed_[i]) {
            nb_ones_[u] += new_one - old_one;
        } else {
            nb_ones_[u] += new_one;
            nb_soft_[u] -= contrib(y_[i]);
            if (--nb_soft_left_[u] == 0) nb_soft_[u] = 0.0;
        }
    }
    if (fixed_[i]) {
        total_ones_ += static_cast<long long>(value) - static_cast<long long>(y_[i]);
    } else {
        total_ones_ += static_cast<long long>(value);
        total_soft_ -= y_[i];
        if (--soft_left_ == 0) total_soft_ = 0.0;
        fixed_[i] = 1;
    }
    y_[i] = value;
}

std::uint8_t RoundingState::fix_best(NodeId i) {
    const double s = slope(i);
    std::uint8_t bit;
    if (s < 0.0) {
        bit = 1;
    } else if (s > 0.0) {
        bit = 0;
    } else {
        bit = spec_.sense() == Sense::Minimize ? 0 : 1;
    }
    fix(i, bit);
    return bit;
}

RoundingResult round_with_trace(const ProblemSpec& spec, const Graph& g, const SoftAssignment& x,
                                std::span<const NodeId> order) {
    const std::size_t n = g.num_nodes();
    if (x.size() != n) throw std::invalid_argument("assignment length does not match graph");
    if (order.size() != n) throw std::invalid_argument("rounding order must be a permutation of the nodes");
    std::vector<char> seen(n, 0);
    for (NodeId v : order) {
        if (v >= n || seen[v]) throw std::invalid_argument("rounding order must be a permutation of the nodes");
        seen[v] = 1;
    }

    RoundingState state(spec, g, x.values());
    RoundingResult result;
    result.order.assign(order.begin(), order.end());
    result.step_losses.reserve(n + 1);
    result.step_losses.push_back(state.loss());
    std::vector<std::uint8_t> bits(n, 0);
    for (NodeId v : order) {
        bits[v] = state.fix_best(v);
        result.step_losses.push_back(state.loss());
    }
    result.solution = DiscreteSolution(std::move(bits));
    return result;
}

DiscreteSolution round(const ProblemSpec& spec, const Graph& g, const SoftAssignment& x,
                       std::optional<std::span<const NodeId>> order) {
    if (order) return round_with_trace(spec, g, x, *order).solution;
    const auto by_confidence = confidence_order(x.values());
    return round_with_trace(spec, g, x, by_confidence).solution;
}

namespace {

class MaxIndependentSetSearch {
public:
    explicit MaxIndependentSetSearch(const Graph& g) : n_(g.num_nodes()), neighbors_(n_, 0) {
        for (auto [u, v] : g.edges()) {
            neighbors_[u] |= 1u << v;
            neighbors_[v] |= 1u << u;
        }
    }

    std::uint32_t solve() {
        const std::uint32_t all = n_ == 32 ? ~0u : ((1u << n_) - 1u);
        search(all, 0, 0);
        return best_set_;
    }

private:
    void search(std::uint32_t candidates, std::uint32_t current, int size) {
        if (candidates == 0) {
            if (size > best_size_) {
                best_size_ = size;
                best_set_ = current;
            }
            return;
        }
        if (size + std::popcount(candidates) <= best_size_) return;

        int min_deg = 64, max_deg = -1;
        int min_v = 0, max_v = 0;
        for (std::uint32_t rest = candidates; rest; rest &= rest - 1) {
            const int v = std::countr_zero(rest);
            const int d = std::popcount(neighbors_[v] & candidates);
            if (d < min_deg) {
                min_deg = d;
                min_v = v;
            }
            if (d > max_deg) {
                max_deg = d;
                max_v = v;
            }
        }
        // A vertex of degree <= 1 belongs to some maximum independent set.
        if (min_deg <= 1) {
            const std::uint32_t bit = 1u << min_v;
            search(candidates & ~bit & ~neighbors_[min_v], current | bit, size + 1);
            return;
        }
        const std::uint32_t bit = 1u << max_v;
        search(candidates & ~bit & ~neighbors_[max_v], current | bit, size + 1);
        search(candidates & ~bit, current, size);
    }

    std::size_t n_;
    std::vector<std::uint32_t> neighbors_;
    int best_size_ = -1;
    std::uint32_t best_set_ = 0;
};

DiscreteSolution from_mask(std::size_t n, std::uint32_t mask) {
    std::vector<std::uint8_t> values(n, 0);
    for (std::size_t i = 0; i < n; ++i) values[i] = (mask >> i) & 1u;
    return DiscreteSolution(std::move(values));
}

}  // namespace

Optimum exact_optimum(const ProblemSpec& spec, const Graph& g) {
    const std::size_t n = g.num_nodes();
    if (n > kExactMaxNodes) {
        throw std::invalid_argument("exact search is capped at " + std::to_string(kExactMaxNodes) +
                                    " nodes (got " + std::to_string(n) + ")");
    }
    switch (spec.kind) {
        case ProblemKind::MaxIndependentSet: {
            const auto mask = MaxIndependentSetSearch(g).solve();
            return {static_cast<double>(std::popcount(mask)), from_mask(n, mask)};
        }
        case ProblemKind::MaxClique: {
            const auto mask = MaxIndependentSetSearch(complement(g)).solve();
            return {static_cast<double>(std::popcount(mask)), from_mask(n, mask)};
        }
        case ProblemKind::MinVertexCover: {
            const std::uint32_t all = (1u << n) - 1u;
            const auto cover = all & ~MaxIndependentSetSearch(g).solve();
            return {static_cast<double>(std::popcount(cover)), from_mask(n, cover)};
        }
    }
    return {};
}

double objective_floor(ProblemKind kind, const Graph& g) {
    switch (kind) {
        case ProblemKind::MaxIndependentSet: return -static_cast<double>(g.num_nodes());
        case ProblemKind::MinVertexCover: return 0.0;
        case ProblemKind::MaxClique: return -static_cast<double>(g.num_edges());
    }
    return 0.0;
}

GuaranteeReport guarantee_check(const ProblemSpec& spec, const Graph& g, double loss_value,
                                const DiscreteSolution& X) {
    GuaranteeReport report;
    report.penalized = penalized_objective(spec, g, X);
    report.bound_holds = report.penalized <= loss_value + 1e-6;
    report.condition_met = loss_value < spec.beta + objective_floor(spec.kind, g);
    report.feasible = is_feasible(spec.kind, g, X);
    report.feasibility_holds = !report.condition_met || report.feasible;
    return report;
}

}  // namespace metaco
