#include <cmath>
#include <cstdlib>
#include <limits>

#include "tedac/decoder.hpp"
#include "tedac/metric.hpp"
#include "tedac/random.hpp"

namespace tedac {

namespace {

double exact_pair_sum(const TransitionModel& model, const std::vector<std::uint64_t>& rep_of, const CostKernel& cost) {
    const auto n = static_cast<Codeword>(rep_of.size());
    double total = 0.0;
    for (Codeword x = 0; x < n; ++x) {
        for (Codeword y = 0; y < n; ++y) {
            const double p = model.probability(x, y);
            if (p > 0.0) {
                total += p * cost(rep_of[static_cast<std::size_t>(x)], rep_of[static_cast<std::size_t>(y)], y - x);
            }
        }
    }
    return total;
}

// Stationary law of the greedy representation chain: state = representation
// of the current codeword, next state = greedy choice for y ~ P(y | x).
// Started from the canonical-first representations (the decoder's own start)
// and iterated lazily so periodic chains still converge.
double greedy_chain_cost(const RepresentationTable& table, const TransitionModel& model, const CostKernel& cost) {
    const auto n_codes = static_cast<Codeword>(table.basis().codeword_count());
    const std::size_t n_states = table.total();

    struct Edge {
        std::size_t to;
        double p;
    };
    std::vector<std::size_t> edge_offset(n_states + 1, 0);
    std::vector<Edge> edges;
    std::vector<double> step_cost(n_states, 0.0);

    for (Codeword x = 0; x < n_codes; ++x) {
        const auto from_set = table.masks(x);
        for (std::size_t a = 0; a < from_set.size(); ++a) {
            const std::size_t s = table.offset(x) + a;
            for (Codeword y = 0; y < n_codes; ++y) {
                const double p = model.conditional(x, y);
                if (p <= 0.0) continue;
                const auto to_set = table.masks(y);
                double best = std::numeric_limits<double>::infinity();
                std::size_t pick = 0;
                for (std::size_t b = 0; b < to_set.size(); ++b) {
                    const double v = cost(from_set[a], to_set[b], y - x);
                    if (v < best) {
                        best = v;
                        pick = b;
                    }
                }
                edges.push_back({table.offset(y) + pick, p});
                step_cost[s] += p * best;
            }
            edge_offset[s + 1] = edges.size();
        }
    }

    std::vector<double> pi(n_states, 0.0);
    for (Codeword x = 0; x < n_codes; ++x) pi[table.offset(x)] = model.marginal[static_cast<std::size_t>(x)];
    std::vector<double> next(n_states);
    for (int iter = 0; iter < 100000; ++iter) {
        for (std::size_t s = 0; s < n_states; ++s) next[s] = 0.5 * pi[s];
        for (std::size_t s = 0; s < n_states; ++s) {
            const double mass = 0.5 * pi[s];
            if (mass == 0.0) continue;
            for (std::size_t e = edge_offset[s]; e < edge_offset[s + 1]; ++e) next[edges[e].to] += mass * edges[e].p;
        }
        double change = 0.0;
        for (std::size_t s = 0; s < n_states; ++s) change += std::abs(next[s] - pi[s]);
        pi.swap(next);
        if (change < 1e-14) break;
    }

    double total = 0.0;
    for (std::size_t s = 0; s < n_states; ++s) total += pi[s] * step_cost[s];
    return total;
}

}  // namespace

CostEstimate evaluate_total_cost(const RepresentationTable& table, DecoderPolicy policy, const InputModel& input,
                                 const MuCoefficients& mu, const SamplingBudget& budget) {
    if (!table.complete()) {
        throw Error(ErrorCode::IncompleteBasis, "total cost needs a representation for every codeword");
    }
    const Basis& basis = table.basis();
    const CostKernel cost(basis, mu);
    const TransitionModel model = input.transitions(basis.n_bits());
    const auto n_codes = static_cast<std::size_t>(basis.codeword_count());

    CostEstimate out;
    out.approximate = table.approximate();

    if (table.unique() || policy == DecoderPolicy::Memoryless) {
        std::vector<std::uint64_t> rep_of(n_codes);
        if (table.unique()) {
            for (std::size_t x = 0; x < n_codes; ++x) rep_of[x] = table.masks(static_cast<Codeword>(x))[0];
        } else {
            const auto lut = build_memoryless_lut(table, mu, input);
            for (std::size_t x = 0; x < n_codes; ++x) rep_of[x] = lut.table[x].mask();
        }
        out.value = exact_pair_sum(model, rep_of, cost);
        return out;
    }

    if (policy == DecoderPolicy::Greedy && table.total() <= budget.exact_state_limit) {
        out.value = greedy_chain_cost(table, model, cost);
        return out;
    }

    if (budget.chain_length < 2) throw Error(ErrorCode::InvalidArgument, "chain_length must be >= 2");
    out.exact = false;
    if (policy == DecoderPolicy::Greedy) {
        auto rng = substream(budget.seed, 0);
        const auto seq = input.generate(basis.n_bits(), budget.chain_length, rng);
        const auto decoded = decode_greedy(seq, table, mu);
        out.transitions = seq.size() - 1;
        out.value = decoded.total_cost / static_cast<double>(out.transitions);
        return out;
    }

    // Viterbi: independent blocks, each optimal on its own.
    const std::size_t block = std::max<std::size_t>(2, budget.block_length);
    const std::size_t n_blocks = (budget.chain_length + block - 1) / block;
    double total = 0.0;
    std::size_t transitions = 0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t len = std::min(block, budget.chain_length - b * block);
        if (len < 2) continue;
        auto rng = substream(budget.seed, b);
        const auto seq = input.generate(basis.n_bits(), len, rng);
        total += decode_viterbi(seq, table, mu).total_cost;
        transitions += len - 1;
    }
    out.transitions = transitions;
    out.value = total / static_cast<double>(transitions);
    return out;
}

double total_cost(const Basis& basis, DecoderPolicy policy, const InputModel& input, const MuCoefficients& mu,
                  const SamplingBudget& budget) {
    const RepresentationTable table(basis, budget.prune_k);
    return evaluate_total_cost(table, policy, input, mu, budget).value;
}

double thermometer_total_cost(int n_bits, const InputModel& input, const MuCoefficients& mu) {
    const TransitionModel model = input.transitions(n_bits);
    const Codeword n = Codeword{1} << n_bits;
    if (mu.L != static_cast<std::size_t>(n - 1)) {
        throw Error(ErrorCode::LengthMismatch, "thermometer reference needs mu for L = " + std::to_string(n - 1) +
                                                   ", got L = " + std::to_string(mu.L));
    }
    double total = 0.0;
    for (Codeword x = 0; x < n; ++x) {
        for (Codeword y = 0; y < n; ++y) {
            const double p = model.probability(x, y);
            if (p > 0.0) total += p * cost_from_moments(std::llabs(y - x), y - x, mu);
        }
    }
    return total;
}

}  // namespace tedac
