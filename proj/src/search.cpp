#include "tedac/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "tedac/decoder.hpp"

namespace tedac {

namespace {

void check_dimensions(int n_bits, std::size_t L, SumConstraint constraint) {
    if (n_bits < 1 || n_bits > kMaxBits) {
        throw Error(ErrorCode::InvalidArgument, "n_bits must be in [1, " + std::to_string(kMaxBits) + "]");
    }
    if (L < static_cast<std::size_t>(n_bits)) {
        throw Error(ErrorCode::InfeasibleDimensions, "L = " + std::to_string(L) + " switches cannot cover " +
                                                        std::to_string(n_bits) + " bits");
    }
    const Weight full = (Weight{1} << n_bits) - 1;
    if (constraint == SumConstraint::ExactFullScale && static_cast<Weight>(L) > full) {
        throw Error(ErrorCode::InfeasibleDimensions, "L = " + std::to_string(L) +
                                                        " positive weights cannot sum to exactly " +
                                                        std::to_string(full));
    }
}

bool feasible(const std::vector<Weight>& w, int n_bits, SumConstraint constraint) {
    const Weight max_weight = Weight{1} << n_bits;
    Weight sum = 0;
    for (auto v : w) {
        if (v < 1 || v > max_weight) return false;
        sum += v;
    }
    const Weight full = max_weight - 1;
    if (constraint == SumConstraint::ExactFullScale ? sum != full : sum < full) return false;
    return is_complete(make_basis(w, n_bits));
}

class Scorer {
public:
    Scorer(const SearchObjective& objective, SamplingBudget budget) : objective_(objective), budget_(budget) {}

    double operator()(const Basis& basis) {
        auto it = cache_.find(basis.weights());
        if (it != cache_.end()) return it->second;
        const RepresentationTable table(basis, budget_.prune_k);
        const double c = evaluate_total_cost(table, objective_.policy, objective_.input, objective_.mu, budget_).value;
        ++evaluations_;
        cache_.emplace(basis.weights(), c);
        return c;
    }

    std::size_t evaluations() const noexcept { return evaluations_; }

private:
    const SearchObjective& objective_;
    SamplingBudget budget_;
    std::map<std::vector<Weight>, double> cache_;
    std::size_t evaluations_ = 0;
};

void check_mu(const SearchObjective& objective, std::size_t L) {
    if (objective.mu.L != L) {
        throw Error(ErrorCode::LengthMismatch, "objective mu estimated for L = " + std::to_string(objective.mu.L) +
                                                   ", searching L = " + std::to_string(L));
    }
}

}  // namespace

const char* to_string(SumConstraint c) noexcept {
    return c == SumConstraint::ExactFullScale ? "exact-fullscale" : "at-least-fullscale";
}

SumConstraint parse_sum_constraint(std::string_view name) {
    if (name == "exact-fullscale") return SumConstraint::ExactFullScale;
    if (name == "at-least-fullscale") return SumConstraint::AtLeastFullScale;
    throw Error(ErrorCode::InvalidArgument, "unknown sum constraint '" + std::string(name) +
                                                "' (expected exact-fullscale or at-least-fullscale)");
}

bool is_complete(const Basis& basis) {
    const auto n = static_cast<std::size_t>(basis.codeword_count());
    const std::size_t words = (n + 63) / 64;
    std::vector<std::uint64_t> reach(words, 0);
    reach[0] = 1;
    for (auto w : basis.weights()) {
        if (static_cast<std::size_t>(w) >= n) continue;
        const std::size_t shift_words = static_cast<std::size_t>(w) / 64;
        const unsigned shift_bits = static_cast<unsigned>(w % 64);
        // reach |= reach << w, high words first so sources are still unshifted.
        for (std::size_t k = words; k-- > shift_words;) {
            const std::size_t src = k - shift_words;
            std::uint64_t v = reach[src] << shift_bits;
            if (shift_bits != 0 && src > 0) v |= reach[src - 1] >> (64 - shift_bits);
            reach[k] |= v;
        }
    }
    for (std::size_t x = 0; x < n; ++x) {
        if (((reach[x / 64] >> (x % 64)) & 1u) == 0) return false;
    }
    return true;
}

void SaConfig::validate() const {
    if (n_iterations == 0) throw Error(ErrorCode::InvalidArgument, "n_iterations must be > 0");
    if (!(initial_temperature > 0.0)) throw Error(ErrorCode::InvalidArgument, "initial_temperature must be > 0");
    if (!(cooling_rate > 0.0 && cooling_rate < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "cooling_rate must be in (0, 1)");
    }
    if (moves_per_temperature == 0) throw Error(ErrorCode::InvalidArgument, "moves_per_temperature must be > 0");
}

Basis split_initial_basis(int n_bits, std::size_t L, SumConstraint constraint) {
    check_dimensions(n_bits, L, constraint);
    std::vector<Weight> w;
    for (int i = 0; i < n_bits; ++i) w.push_back(Weight{1} << i);
    while (w.size() < L) {
        auto top = std::max_element(w.begin(), w.end());
        if (*top >= 2) {
            const Weight v = *top;
            *top = v / 2;
            w.push_back(v - v / 2);
        } else {
            w.push_back(1);
        }
    }
    return make_basis(std::move(w), n_bits);
}

SearchResult optimize_basis_sa(int n_bits, std::size_t L, const SaConfig& config, const SearchObjective& objective) {
    config.validate();
    check_dimensions(n_bits, L, config.sum_constraint);
    check_mu(objective, L);

    Basis current = config.initial ? *config.initial : split_initial_basis(n_bits, L, config.sum_constraint);
    if (current.size() != L || current.n_bits() != n_bits ||
        !feasible(current.weights(), n_bits, config.sum_constraint)) {
        throw Error(ErrorCode::InvalidArgument, "initial basis is not a feasible candidate");
    }

    Scorer score(objective, config.objective_budget);
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<std::size_t> pick_index(0, L - 1);
    std::uniform_int_distribution<int> pick_step(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool exact = config.sum_constraint == SumConstraint::ExactFullScale;

    double current_cost = score(current);
    const double scale = current_cost > 0.0 ? current_cost : 1.0;

    SearchResult result;
    result.best_basis = current;
    result.best_objective = current_cost;
    result.best_iteration = 0;
    result.trace.reserve(config.n_iterations);

    for (std::size_t it = 1; it <= config.n_iterations; ++it) {
        const double temperature =
            config.initial_temperature *
            std::pow(config.cooling_rate, static_cast<double>((it - 1) / config.moves_per_temperature));

        std::vector<Weight> w = current.weights();
        const std::size_t i = pick_index(rng);
        const Weight step = Weight{1} << pick_step(rng);
        const Weight sign = unit(rng) < 0.5 ? -1 : 1;
        w[i] += sign * step;
        bool movable = true;
        if (exact) {
            if (L < 2) {
                movable = false;
            } else {
                std::size_t j = pick_index(rng);
                while (j == i) j = pick_index(rng);
                w[j] -= sign * step;
            }
        }
        std::sort(w.begin(), w.end());
        const double u = unit(rng);

        bool accepted = false;
        if (movable && feasible(w, n_bits, config.sum_constraint)) {
            Basis candidate = make_basis(w, n_bits);
            const double cost = score(candidate);
            const double worse = cost - current_cost;
            if (worse <= 0.0 || u < std::exp(-worse / (temperature * scale))) {
                accepted = true;
                current = std::move(candidate);
                current_cost = cost;
                if (current_cost < result.best_objective) {
                    result.best_objective = current_cost;
                    result.best_basis = current;
                    result.best_iteration = it;
                }
            }
        }
        result.trace.push_back({it, temperature, current_cost, accepted});
    }

    Scorer rescore(objective, config.final_budget);
    result.best_cost = rescore(result.best_basis);
    result.candidates_evaluated = score.evaluations();
    return result;
}

double search_space_size(int n_bits, std::size_t L) {
    // C(2^N + L - 1, L)
    const double n = std::ldexp(1.0, n_bits);
    double count = 1.0;
    for (std::size_t k = 1; k <= L; ++k) count *= (n + static_cast<double>(k) - 1.0) / static_cast<double>(k);
    return count;
}

SearchResult exhaustive_search(int n_bits, std::size_t L, const SearchObjective& objective,
                               const ExhaustiveOptions& options) {
    check_dimensions(n_bits, L, options.sum_constraint);
    check_mu(objective, L);
    const double space = search_space_size(n_bits, L);
    if (space > options.max_candidates) {
        throw Error(ErrorCode::SearchSpaceTooLarge, "search space of " + std::to_string(space) +
                                                        " ascending candidates exceeds the cap of " +
                                                        std::to_string(options.max_candidates));
    }

    const Weight max_weight = Weight{1} << n_bits;
    const Weight full = max_weight - 1;
    const bool exact = options.sum_constraint == SumConstraint::ExactFullScale;
    Scorer score(objective, options.budget);

    SearchResult result;
    bool found = false;
    std::vector<Weight> w(L);

    auto visit = [&](auto&& self, std::size_t pos, Weight lo, Weight sum) -> void {
        if (pos == L) {
            if (exact ? sum != full : sum < full) return;
            const Basis candidate = make_basis(w, n_bits);
            if (!is_complete(candidate)) return;
            const double c = score(candidate);
            if (!found || c < result.best_cost) {
                found = true;
                result.best_cost = c;
                result.best_basis = candidate;
            }
            return;
        }
        const auto remaining = static_cast<Weight>(L - pos);
        for (Weight v = lo; v <= max_weight; ++v) {
            // Remaining weights are all >= v.
            if (exact && sum + v * remaining > full) break;
            w[pos] = v;
            self(self, pos + 1, v, sum + v);
        }
    };
    visit(visit, 0, 1, 0);

    if (!found) {
        throw Error(ErrorCode::InfeasibleDimensions, "no complete basis with N = " + std::to_string(n_bits) +
                                                        ", L = " + std::to_string(L));
    }
    result.best_objective = result.best_cost;
    result.candidates_evaluated = score.evaluations();
    return result;
}

}  // namespace tedac
