#pragma once

// Representation sets R(x) and the three codeword-to-switch selection
// policies: Viterbi (optimal over the whole sequence), sequential greedy, and
// the memoryless lookup table.
//
// Canonical order of a representation set is ascending mask value; every tie
// is broken towards the lowest canonical index.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tedac/core.hpp"
#include "tedac/metric.hpp"

namespace tedac {

struct RepSet {
    Codeword value = 0;
    std::vector<Representation> reps;
};

// All W with W . B == x, by meet-in-the-middle over the two halves of the
// weight vector. Throws NoRepresentation / InputOutOfRange.
RepSet enumerate_representations(const Basis& basis, Codeword x);

// R(x) for every codeword of a basis, built once and shared read-only by the
// decoders and the cost evaluation.
class RepresentationTable {
public:
    // prune_k > 0 keeps only the K representations with the smallest
    // sum of B_i^2 over on-switches (ties canonical); the table is then
    // marked approximate.
    explicit RepresentationTable(const Basis& basis, std::size_t prune_k = 0);

    const Basis& basis() const noexcept { return basis_; }
    std::size_t width() const noexcept { return basis_.size(); }

    std::span<const std::uint64_t> masks(Codeword x) const {
        const auto i = static_cast<std::size_t>(x);
        return {masks_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }
    std::size_t count(Codeword x) const {
        const auto i = static_cast<std::size_t>(x);
        return offsets_[i + 1] - offsets_[i];
    }
    // Index of the first representation of x in the flattened list.
    std::size_t offset(Codeword x) const { return offsets_[static_cast<std::size_t>(x)]; }
    std::size_t total() const noexcept { return masks_.size(); }

    bool complete() const noexcept { return complete_; }
    // One representation per codeword.
    bool unique() const noexcept { return unique_; }
    bool approximate() const noexcept { return prune_k_ > 0 && pruned_; }

    RepSet rep_set(Codeword x) const;
    void check_codeword(Codeword x) const;

private:
    Basis basis_;
    std::vector<std::uint64_t> masks_;
    std::vector<std::size_t> offsets_;
    std::size_t prune_k_ = 0;
    bool pruned_ = false;
    bool complete_ = false;
    bool unique_ = false;
};

constexpr std::size_t kMaxEnumerationWidth = 30;

struct DecodedSequence {
    std::vector<Codeword> inputs;
    std::vector<Representation> reps;
    double total_cost = 0.0;
    bool approximate = false;
    // Trellis edges (or candidate comparisons) evaluated.
    std::uint64_t edge_evaluations = 0;
};

// Minimum-cost path through the trellis whose stage-m nodes are R(x[m]).
// Throws EmptySequence, InputOutOfRange, NoRepresentation.
DecodedSequence decode_viterbi(std::span<const Codeword> inputs, const RepresentationTable& table,
                               const MuCoefficients& mu);
DecodedSequence decode_viterbi(std::span<const Codeword> inputs, const Basis& basis, const MuCoefficients& mu);

// Picks argmin C(W[m-1], .) over R(x[m]) one sample at a time. The first
// sample uses `init` when given, else the canonical first representation.
// Throws as decode_viterbi, plus InitMismatch.
DecodedSequence decode_greedy(std::span<const Codeword> inputs, const RepresentationTable& table,
                              const MuCoefficients& mu, std::optional<Representation> init = std::nullopt);
DecodedSequence decode_greedy(std::span<const Codeword> inputs, const Basis& basis, const MuCoefficients& mu,
                              std::optional<Representation> init = std::nullopt);

struct MemorylessLut {
    Basis basis;
    std::vector<Representation> table;  // indexed by codeword
    std::size_t sweeps = 0;
    bool approximate = false;

    const Representation& operator[](Codeword x) const { return table.at(static_cast<std::size_t>(x)); }
};

enum class LutObjective {
    // E_z[C(W, W(z))] + E_z[C(W(z), W)]
    BothDirections,
    // 2 E_z[C(W, W(z))]; identical by cost symmetry
    DoubledForward,
};

struct LutOptions {
    std::size_t max_sweeps = 32;
    LutObjective objective = LutObjective::BothDirections;
};

// Fixed-point construction: every entry starts at its minimum-D
// representation, then codewords are swept in order, each entry replaced by
// the argmin of the objective against the current table (z drawn from the
// input model's marginal), until a sweep changes nothing.
// Throws IncompleteBasis, NonConvergenceError.
MemorylessLut build_memoryless_lut(const RepresentationTable& table, const MuCoefficients& mu,
                                   const InputModel& input, const LutOptions& options = {});
MemorylessLut build_memoryless_lut(const Basis& basis, const MuCoefficients& mu, const InputModel& input,
                                   const LutOptions& options = {});

// Canonical-first representation for every codeword; the baseline a tuned
// LUT is compared against.
MemorylessLut canonical_lut(const RepresentationTable& table);

// reps[m] = lut[x[m]]. Throws InputOutOfRange. Empty input gives an empty result.
DecodedSequence decode_memoryless(std::span<const Codeword> inputs, const MemorylessLut& lut,
                                  const MuCoefficients& mu);

DecodedSequence decode(DecoderPolicy policy, std::span<const Codeword> inputs, const RepresentationTable& table,
                       const MuCoefficients& mu, const MemorylessLut* lut = nullptr);

}  // namespace tedac
