#pragma once

// Behavioral time-domain model of a current-steering DAC with per-switch
// timing skews. Output levels are in LSB, referenced to mid-scale
// (2^N - 1) / 2 so that signal power excludes the DC term.
//
// The transition into sample m nominally happens at t = m (T = 1); switch i
// actually flips at t = m + tau_i.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tedac/core.hpp"
#include "tedac/decoder.hpp"
#include "tedac/metric.hpp"

namespace tedac {

struct SkewRealization {
    std::vector<double> tau;  // fraction of T, in (-1/2, 1/2]
    std::uint64_t seed = 0;
    double sigma_tau = 0.0;
};

// Throws DegenerateSigma.
SkewRealization sample_skews(std::size_t L, double sigma_tau, std::uint64_t seed);

enum class TransientKind { IdealStep, Exponential };

struct TransientModel {
    TransientKind kind = TransientKind::Exponential;
    double time_constant = 0.05;  // fraction of T; exponential only

    static TransientModel ideal_step() { return {TransientKind::IdealStep, 0.0}; }
    static TransientModel exponential(double time_constant) { return {TransientKind::Exponential, time_constant}; }

    void validate() const;
    std::string name() const;
};

// Uniform grid of `oversample` points per sample period, at the centre of each
// sub-interval. Throws LengthMismatch, InvalidArgument (oversample < 8).
std::vector<double> synthesize_output(const DecodedSequence& decoded, const Basis& basis,
                                      const SkewRealization& skews, const TransientModel& model,
                                      std::size_t oversample = 64);

// 10 log10(sum ideal^2 / sum (actual - ideal)^2); +inf when the waveforms are
// identical. Throws LengthMismatch.
double glitch_sndr(std::span<const double> actual, std::span<const double> ideal);

// Integral over all time of (actual - ideal)^2, where `ideal` is the zero-skew
// output of the same transient model. Exact: piecewise-constant (step) or
// piecewise exponential segments integrated in closed form.
double glitch_error_energy(const DecodedSequence& decoded, const Basis& basis, std::span<const double> tau,
                           const TransientModel& model);

struct SndrConfig {
    DecoderPolicy policy = DecoderPolicy::Viterbi;
    InputModel input = InputModel::single_tone({});
    double sigma_tau = 0.03;
    TransientModel transient{};
    std::size_t n_realizations = 1000;
    std::size_t n_samples = 1024;
    std::uint64_t seed = 0;
    // Draw a new input sequence (and decode it) for every realization.
    bool fresh_sequence = true;
    int workers = 1;
};

struct SndrStats {
    double mean_db = 0.0;  // 10 log10(mean signal power / mean error power)
    std::map<double, double> percentile_db;  // 5, 50, 95
    std::size_t n_realizations = 0;
    double sigma_tau = 0.0;
    double mean_error_power = 0.0;
    double mean_signal_power = 0.0;
    std::vector<double> per_realization_db;
};

// Throws InvalidArgument plus anything the decoders raise.
SndrStats monte_carlo_sndr(const Basis& basis, const MuCoefficients& mu, const SndrConfig& config);

// Linear interpolation between order statistics (q in [0, 100]).
double percentile(std::vector<double> values, double q);

}  // namespace tedac
