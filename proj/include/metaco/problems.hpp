#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metaco/graph.hpp"

namespace metaco {

enum class ProblemKind { MaxClique, MinVertexCover, MaxIndependentSet };
enum class Sense { Maximize, Minimize };

std::string_view to_string(ProblemKind kind);
/// Accepts "mc", "mvc", "mis" (case-insensitive).
ProblemKind parse_problem(std::string_view name);

/// One of the three node-subset problems together with its penalty weight.
///
/// The relaxed losses, on a soft assignment x in [0,1]^n, are
///   MIS: -sum_i x_i + beta * sum_{(i,j) in E} x_i x_j
///   MVC:  sum_i x_i + beta * sum_{(i,j) in E} (1 - x_i)(1 - x_j)
///   MC:  -(beta + 1) * sum_{(i,j) in E} x_i x_j + beta/2 * sum_{i != j} x_i x_j
/// Each is affine in every coordinate separately.
struct ProblemSpec {
    ProblemKind kind = ProblemKind::MaxIndependentSet;
    double beta = 2.0;

    Sense sense() const { return kind == ProblemKind::MinVertexCover ? Sense::Minimize : Sense::Maximize; }

    /// MIS beta=2, MVC beta=5, MC beta=2.
    static ProblemSpec defaults(ProblemKind kind);
    static ProblemSpec with_beta(ProblemKind kind, double beta);
};

/// x in [0,1]^n aligned to graph nodes.
class SoftAssignment {
public:
    SoftAssignment() = default;
    /// Throws std::invalid_argument on entries outside [0, 1] or NaN.
    explicit SoftAssignment(std::vector<double> values);

    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }

private:
    std::vector<double> values_;
};

/// X in {0,1}^n.
class DiscreteSolution {
public:
    DiscreteSolution() = default;
    explicit DiscreteSolution(std::vector<std::uint8_t> values);
    static DiscreteSolution from_selected(std::size_t n, std::span<const NodeId> selected);

    std::span<const std::uint8_t> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool operator[](std::size_t i) const { return values_[i] != 0; }
    std::vector<NodeId> selected() const;
    std::size_t count() const;
    std::vector<double> as_doubles() const;

    friend bool operator==(const DiscreteSolution&, const DiscreteSolution&) = default;

private:
    std::vector<std::uint8_t> values_;
};

/// Exact value of the relaxed penalty loss. O(n + m).
double relaxed_loss(const ProblemSpec& spec, const Graph& g, std::span<const double> x);
inline double relaxed_loss(const ProblemSpec& spec, const Graph& g, const SoftAssignment& x) {
    return relaxed_loss(spec, g, x.values());
}

/// f(X) + beta * g(X), i.e. the relaxed loss at a binary point.
double penalized_objective(const ProblemSpec& spec, const Graph& g, const DiscreteSolution& X);

struct ObjectiveValue {
    double value = 0.0;  // number of selected nodes
    bool feasible = false;
};

ObjectiveValue discrete_objective(const ProblemSpec& spec, const Graph& g, const DiscreteSolution& X);
bool is_feasible(ProblemKind kind, const Graph& g, const DiscreteSolution& X);

/// Nodes by descending value, ties by ascending index.
std::vector<NodeId> confidence_order(std::span<const double> x);

/// Partial-sum state for sequential rounding. Each candidate evaluation and
/// each fix costs O(deg(i)).
class RoundingState {
public:
    RoundingState(const ProblemSpec& spec, const Graph& g, std::span<const double> x);

    struct Candidates {
        double if_zero;
        double if_one;
    };
    Candidates candidate_losses(NodeId i) const;

    /// Chooses the better of {0, 1} for entry i (ties: 0 for minimize-sense
    /// problems, 1 for maximize-sense) and fixes it. Returns the chosen bit.
    std::uint8_t fix_best(NodeId i);
    void fix(NodeId i, double value);

    double loss() const { return loss_; }
    std::span<const double> values() const { return y_; }

private:
    double slope(NodeId i) const;
    double neighbor_sum(NodeId i) const;

    ProblemSpec spec_;
    Graph graph_;
    std::vector<double> y_;
    std::vector<std::uint8_t> fixed_;
    // Neighbor sums (MIS/MC: of y, MVC: of 1 - y) split into an exact count
    // over fixed neighbors and a soft remainder that is reset to zero once
    // every neighbor is fixed, so all-binary neighborhoods give exact ties.
    std::vector<double> nb_soft_;
    std::vector<long long> nb_ones_;
    std::vector<std::size_t> nb_soft_left_;
    double total_soft_ = 0.0;
    long long total_ones_ = 0;
    std::size_t soft_left_ = 0;
    double loss_ = 0.0;
};

struct RoundingResult {
    DiscreteSolution solution;
    std::vector<NodeId> order;
    /// step_losses[0] is the input loss; step_losses[k] the loss after k fixes.
    std::vector<double> step_losses;
};

RoundingResult round_with_trace(const ProblemSpec& spec, const Graph& g, const SoftAssignment& x,
                                std::span<const NodeId> order);
/// Rounds entries one at a time in `order` (default: confidence_order).
DiscreteSolution round(const ProblemSpec& spec, const Graph& g, const SoftAssignment& x,
                       std::optional<std::span<const NodeId>> order = std::nullopt);

struct Optimum {
    double value = 0.0;
    DiscreteSolution witness;
};

inline constexpr std::size_t kExactMaxNodes = 26;

/// Branch-and-bound over subsets. Throws std::invalid_argument for n > 26.
Optimum exact_optimum(const ProblemSpec& spec, const Graph& g);

struct GuaranteeReport {
    double penalized = 0.0;      // f(X) + beta g(X)
    bool bound_holds = false;    // penalized <= loss_value + 1e-6
    bool condition_met = false;  // loss_value < beta + objective_floor
    bool feasible = false;
    /// true unless the condition is met and X is infeasible
    bool feasibility_holds = false;
};

/// Smallest value the objective part of the loss takes on any binary
/// assignment: -n for MIS, 0 for MVC, -m for MC (minus the edges inside the
/// selection). An infeasible binary X has penalized value at least
/// floor + beta, so a loss below that certifies feasibility after rounding.
double objective_floor(ProblemKind kind, const Graph& g);

GuaranteeReport guarantee_check(const ProblemSpec& spec, const Graph& g, double loss_value,
                                const DiscreteSolution& X);

}  // namespace metaco
