#pragma once

// Expected glitch energy of a switch transition under iid Gaussian timing
// skews, in closed form and by Monte Carlo integration of the error waveform,
// plus the total cost of a basis under an input model and decoder policy.
//
// Units: time is normalized to the sample period T; weights are in LSB, so
// costs are LSB^2 * T.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tedac/core.hpp"

namespace tedac {

// Expected order-statistic occupancies of an L-switch transition.
//
// mu[n] (n = 0..L-1) is the expected length of the part of the negative time
// axis during which exactly n+1 switches have already flipped, i.e.
// E[(min(tau_(n+1), 0) - tau_(n))^+] with tau_(L) = +inf. By the symmetry of
// the skew law the positive half contributes the same amount, which the
// factor 2 in coeff_d / coeff_s accounts for.
//
// spacing[n] keeps the raw expected adjacent spacings E[tau_(n+1) - tau_(n)]
// for n < L/2 and E[tau_(L/2)] in the last slot; it is informational and does
// not enter the cost.
struct MuCoefficients {
    std::size_t L = 0;
    double sigma_tau = 0.0;
    std::vector<double> mu;
    std::vector<double> spacing;
    double coeff_d = 0.0;  // 2 * sum (n+1) mu_n
    double coeff_s = 0.0;  // 2 * sum (n+1) n mu_n
    std::uint64_t n_draws = 0;
    std::uint64_t seed = 0;
    bool truncated = true;

    static constexpr std::string_view convention = "negative-half-occupancy";

    // Rebuilds coeff_d / coeff_s from mu.
    void update_coefficients();
};

// Monte Carlo estimate from n_draws sorted skew vectors. Deterministic per
// seed and independent of `workers`. Throws DegenerateSigma.
MuCoefficients estimate_mu(std::size_t L, double sigma_tau, std::uint64_t n_draws, std::uint64_t seed,
                           bool truncate = true, int workers = 1);

struct PairStats {
    double d = 0.0;
    double s = 0.0;
    std::int64_t sum_sq = 0;  // sum (c_i B_i)^2
    std::int64_t delta = 0;   // sum c_i B_i = y - x
};

// Throws LengthMismatch, or SInapplicable when L < 2.
PairStats pair_stats(const TransitionVector& c, const Basis& basis);

// coeff_d * D + coeff_s * S from the exact integer moments of a transition.
double cost_from_moments(std::int64_t sum_sq, std::int64_t delta, const MuCoefficients& mu) noexcept;

// Closed-form expected glitch energy C(Wx, Wy). Throws LengthMismatch.
double transition_cost(const Representation& from, const Representation& to, const Basis& basis,
                       const MuCoefficients& mu);

// Mask-level transition cost used by the decoders; bit-identical to
// transition_cost on the same pair.
class CostKernel {
public:
    CostKernel(const Basis& basis, const MuCoefficients& mu);

    std::int64_t sum_sq(std::uint64_t toggled) const noexcept {
        std::int64_t s = 0;
        for (std::size_t k = 0; k < n_tables_; ++k) s += tables_[k * 256 + ((toggled >> (8 * k)) & 0xFFu)];
        return s;
    }

    double operator()(std::uint64_t from, std::uint64_t to, std::int64_t delta) const noexcept {
        return cost_from_moments(sum_sq(from ^ to), delta, *mu_);
    }

    const MuCoefficients& mu() const noexcept { return *mu_; }

private:
    const MuCoefficients* mu_;
    std::size_t n_tables_ = 0;
    std::vector<std::int64_t> tables_;
};

struct OracleEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n_draws = 0;
};

// Monte Carlo mean of the integrated squared error under the ideal-step
// switch model. Each draw is integrated exactly over its switching instants.
OracleEstimate glitch_energy_oracle_stats(const Representation& from, const Representation& to,
                                          const Basis& basis, double sigma_tau, std::uint64_t n_draws,
                                          std::uint64_t seed, int workers = 1);

double glitch_energy_oracle(const Representation& from, const Representation& to, const Basis& basis,
                            double sigma_tau, std::uint64_t n_draws, std::uint64_t seed, int workers = 1);

enum class DecoderPolicy { Viterbi, Greedy, Memoryless };

const char* to_string(DecoderPolicy policy) noexcept;
DecoderPolicy parse_policy(std::string_view name);

struct SamplingBudget {
    // Greedy: solve the representation Markov chain exactly up to this many states.
    std::size_t exact_state_limit = 4096;
    // Otherwise average over a simulated, policy-decoded chain of this length.
    std::size_t chain_length = 1'000'000;
    // Viterbi decodes the simulated chain in independent blocks of this length.
    std::size_t block_length = 4096;
    // Keep the K lowest-energy representations per codeword (0 keeps all).
    std::size_t prune_k = 0;
    std::uint64_t seed = 0;
};

struct CostEstimate {
    double value = 0.0;
    bool exact = true;
    bool approximate = false;  // pruned representation sets
    std::size_t transitions = 0;  // simulated transitions; 0 when exact
};

class RepresentationTable;

// Expected glitch energy per transition. Complete bases (one representation
// per codeword) sum P(x, y) C(x, y) exactly. Otherwise the policy decides the
// representation distribution: memoryless is exact through its LUT, greedy is
// exact through the stationary law of its representation chain when it is
// small enough, and Viterbi (and large greedy chains) are averaged over a
// simulated decoded sequence. Throws IncompleteBasis.
CostEstimate evaluate_total_cost(const RepresentationTable& table, DecoderPolicy policy, const InputModel& input,
                                 const MuCoefficients& mu, const SamplingBudget& budget = {});

double total_cost(const Basis& basis, DecoderPolicy policy, const InputModel& input, const MuCoefficients& mu,
                  const SamplingBudget& budget = {});

// Reference cost of the fully thermometer-coded DAC (2^N - 1 unit cells,
// |y - x| cells toggle per transition). `mu` must be estimated for that L.
double thermometer_total_cost(int n_bits, const InputModel& input, const MuCoefficients& mu);

}  // namespace tedac
