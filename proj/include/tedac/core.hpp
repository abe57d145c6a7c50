#pragma once

// Domain types shared by every module: the current-source weight basis, the
// switch-state representation of a codeword, the switch transition vector and
// the statistical model of the DAC input.
//
// All weight algebra is exact 64-bit integer arithmetic. Weights are kept in
// ascending order and bit i of a representation always refers to weights()[i].

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tedac/error.hpp"

namespace tedac {

using Weight = std::int64_t;
using Codeword = std::int64_t;

constexpr int kMaxBits = 24;
constexpr std::size_t kMaxRepresentationWidth = 64;

class Basis {
public:
    Basis() = default;

    const std::vector<Weight>& weights() const noexcept { return weights_; }
    Weight weight(std::size_t i) const { return weights_.at(i); }
    std::size_t size() const noexcept { return weights_.size(); }
    int n_bits() const noexcept { return n_bits_; }

    Codeword codeword_count() const noexcept { return Codeword{1} << n_bits_; }
    Codeword full_scale() const noexcept { return codeword_count() - 1; }
    Weight sum() const noexcept;

    friend bool operator==(const Basis&, const Basis&) = default;

private:
    friend Basis make_basis(std::vector<Weight> weights, int n_bits);

    std::vector<Weight> weights_;
    int n_bits_ = 0;
};

// Validates and sorts ascending. Throws EmptyBasis / WeightOutOfRange.
Basis make_basis(std::vector<Weight> weights, int n_bits);

// [1, 2, 4, ..., 2^(N-1)].
Basis binary_basis(int n_bits);

// (n_bits - n_thermo) binary LSB weights plus 2^n_thermo - 1 unary MSB cells.
Basis segmented_basis(int n_bits, int n_thermo);

// Switch on/off state for every weight, packed into a mask (bit i <-> weight i).
class Representation {
public:
    Representation() = default;
    Representation(std::uint64_t mask, std::size_t width);

    static Representation from_bits(std::span<const int> bits);

    std::uint64_t mask() const noexcept { return mask_; }
    std::size_t size() const noexcept { return width_; }
    bool bit(std::size_t i) const { return ((mask_ >> i) & 1u) != 0; }
    std::vector<int> bits() const;

    // Bit L-1 first, the usual way a binary number is written.
    std::string to_string() const;

    friend bool operator==(const Representation&, const Representation&) = default;

private:
    std::uint64_t mask_ = 0;
    std::size_t width_ = 0;
};

struct TransitionVector {
    std::vector<int> c;  // entries in {-1, 0, +1}
};

// W . B. Throws LengthMismatch.
Codeword dac_value(const Representation& rep, const Basis& basis);

// W(to) - W(from), elementwise. Throws LengthMismatch.
TransitionVector transition_vector(const Representation& from, const Representation& to);

// Joint law P(x, y) of consecutive codewords. For independent models the joint
// is marginal[x] * marginal[y] and `joint` is left empty.
struct TransitionModel {
    int n_bits = 0;
    bool independent = true;
    std::vector<double> marginal;
    std::vector<double> joint;  // row-major [x * 2^N + y] when !independent

    double probability(Codeword x, Codeword y) const;
    // P(y | x); equals marginal[y] for independent models.
    double conditional(Codeword x, Codeword y) const;
};

enum class InputKind { UniformIid, SingleTone, Trace };

struct ToneParams {
    // Coherent tone: `bin` cycles over `period` samples. Odd bins keep every
    // sample phase distinct.
    std::size_t bin = 43;
    std::size_t period = 2048;
    double amplitude = 1.0;  // fraction of full scale
    bool random_phase = true;
};

class InputModel {
public:
    static InputModel uniform_iid();
    static InputModel single_tone(ToneParams params);
    static InputModel trace(std::vector<Codeword> samples);

    InputKind kind() const noexcept { return kind_; }
    const ToneParams& tone() const noexcept { return tone_; }
    const std::vector<Codeword>& samples() const noexcept { return samples_; }

    // Draws a sequence of `length` codewords. Tones get a fresh random phase
    // when random_phase is set; traces are repeated cyclically.
    std::vector<Codeword> generate(int n_bits, std::size_t length, std::mt19937_64& rng) const;

    // Tone codewords for an explicit phase (radians).
    std::vector<Codeword> tone_sequence(int n_bits, std::size_t length, double phase) const;

    // Uniform-iid: P(x, y) = 4^-N. Tone and trace: empirical transition
    // frequencies of one period (tone) or of the whole trace, including the
    // wrap-around pair so the chain is stationary.
    TransitionModel transitions(int n_bits) const;

    std::string name() const;

private:
    InputKind kind_ = InputKind::UniformIid;
    ToneParams tone_{};
    std::vector<Codeword> samples_;
};

const char* to_string(InputKind kind) noexcept;

}  // namespace tedac
