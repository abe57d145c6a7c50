#pragma once

// Basis design: feasibility checks, simulated annealing over ascending integer
// weight vectors, and an exhaustive search for instances small enough to
// enumerate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tedac/core.hpp"
#include "tedac/metric.hpp"

namespace tedac {

enum class SumConstraint {
    ExactFullScale,    // sum of weights == 2^N - 1
    AtLeastFullScale,  // sum of weights >= 2^N - 1
};

const char* to_string(SumConstraint c) noexcept;
SumConstraint parse_sum_constraint(std::string_view name);

// Every codeword in [0, 2^N - 1] is a subset sum of the weights.
bool is_complete(const Basis& basis);

struct SearchObjective {
    DecoderPolicy policy = DecoderPolicy::Greedy;
    InputModel input = InputModel::uniform_iid();
    MuCoefficients mu;  // estimated for the searched L
};

struct SaConfig {
    std::size_t n_iterations = 2000;
    // Metropolis temperature as a fraction of the starting cost; a move that
    // worsens the cost by dC is accepted with exp(-dC / (T * C_start)).
    double initial_temperature = 0.05;
    double cooling_rate = 0.95;
    std::size_t moves_per_temperature = 50;
    std::uint64_t seed = 0;
    SamplingBudget objective_budget{};
    // Budget used to re-score the best basis.
    SamplingBudget final_budget{};
    SumConstraint sum_constraint = SumConstraint::ExactFullScale;
    std::optional<Basis> initial;

    // Throws InvalidArgument.
    void validate() const;
};

struct TraceEntry {
    std::size_t iteration = 0;
    double temperature = 0.0;
    double current_cost = 0.0;
    bool accepted = false;
};

struct SearchResult {
    Basis best_basis;
    double best_cost = 0.0;       // full-budget re-score
    double best_objective = 0.0;  // objective-budget value seen during the search
    std::size_t best_iteration = 0;
    std::size_t candidates_evaluated = 0;
    std::vector<TraceEntry> trace;
};

// Starting point for annealing: the binary basis with its largest weight
// repeatedly split in two until there are L weights (completeness is kept by
// every split). Throws InfeasibleDimensions.
Basis split_initial_basis(int n_bits, std::size_t L, SumConstraint constraint);

// Throws InfeasibleDimensions when no complete basis of that shape exists.
SearchResult optimize_basis_sa(int n_bits, std::size_t L, const SaConfig& config, const SearchObjective& objective);

struct ExhaustiveOptions {
    double max_candidates = 1e7;
    SumConstraint sum_constraint = SumConstraint::ExactFullScale;
    SamplingBudget budget{};
};

// Number of ascending weight vectors of length L over [1, 2^N].
double search_space_size(int n_bits, std::size_t L);

// Global optimum over ascending feasible weight vectors; ties keep the
// lexicographically first. Throws SearchSpaceTooLarge, InfeasibleDimensions.
SearchResult exhaustive_search(int n_bits, std::size_t L, const SearchObjective& objective,
                               const ExhaustiveOptions& options = {});

}  // namespace tedac
