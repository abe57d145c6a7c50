#include "tedac/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tedac/random.hpp"

namespace tedac {

namespace {

struct Event {
    double time;
    std::int64_t amplitude;
};

double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

std::vector<double> draw_skews(std::size_t L, double sigma_tau, std::mt19937_64& rng) {
    SkewSampler draw(sigma_tau);
    std::vector<double> tau(L);
    for (auto& t : tau) t = draw(rng);
    return tau;
}

double mid_scale(const Basis& basis) { return static_cast<double>(basis.full_scale()) / 2.0; }

}  // namespace

SkewRealization sample_skews(std::size_t L, double sigma_tau, std::uint64_t seed) {
    auto rng = substream(seed, 0);
    SkewRealization s;
    s.tau = draw_skews(L, sigma_tau, rng);
    s.seed = seed;
    s.sigma_tau = sigma_tau;
    return s;
}

void TransientModel::validate() const {
    if (kind == TransientKind::Exponential && !(time_constant > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "exponential time_constant must be > 0");
    }
}

std::string TransientModel::name() const {
    if (kind == TransientKind::IdealStep) return "ideal-step";
    return "exponential";
}

std::vector<double> synthesize_output(const DecodedSequence& decoded, const Basis& basis,
                                      const SkewRealization& skews, const TransientModel& model,
                                      std::size_t oversample) {
    model.validate();
    if (oversample < 8) throw Error(ErrorCode::InvalidArgument, "oversample must be >= 8");
    const std::size_t L = basis.size();
    if (skews.tau.size() != L) {
        throw Error(ErrorCode::LengthMismatch, "skew vector has " + std::to_string(skews.tau.size()) +
                                                   " entries, basis has " + std::to_string(L));
    }
    for (const auto& r : decoded.reps) {
        if (r.size() != L) throw Error(ErrorCode::LengthMismatch, "representation width differs from basis");
    }
    const std::size_t M = decoded.reps.size();
    std::vector<double> out(M * oversample, -mid_scale(basis));
    if (M == 0) return out;

    const bool exponential = model.kind == TransientKind::Exponential;
    const double theta = model.time_constant;
    const double dt = 1.0 / static_cast<double>(oversample);
    for (std::size_t i = 0; i < L; ++i) {
        const double weight = static_cast<double>(basis.weights()[i]);
        double target = decoded.reps[0].bit(i) ? 1.0 : 0.0;
        double residual = 0.0;
        double t_ref = 0.0;
        std::size_t next = 1;  // next transition index
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t j = 0; j < oversample; ++j) {
                const double t = static_cast<double>(m) + (static_cast<double>(j) + 0.5) * dt;
                while (next < M && static_cast<double>(next) + skews.tau[i] < t) {
                    const int c = static_cast<int>(decoded.reps[next].bit(i)) -
                                  static_cast<int>(decoded.reps[next - 1].bit(i));
                    if (c != 0) {
                        const double te = static_cast<double>(next) + skews.tau[i];
                        if (exponential) residual = residual * std::exp(-(te - t_ref) / theta) + c;
                        t_ref = te;
                        target += c;
                    }
                    ++next;
                }
                double level = target;
                if (exponential && residual != 0.0) level -= residual * std::exp(-(t - t_ref) / theta);
                out[m * oversample + j] += weight * level;
            }
        }
    }
    return out;
}

double glitch_sndr(std::span<const double> actual, std::span<const double> ideal) {
    if (actual.size() != ideal.size()) {
        throw Error(ErrorCode::LengthMismatch, "waveforms of length " + std::to_string(actual.size()) + " and " +
                                                   std::to_string(ideal.size()));
    }
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t k = 0; k < ideal.size(); ++k) {
        signal += ideal[k] * ideal[k];
        const double e = actual[k] - ideal[k];
        error += e * e;
    }
    if (error == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / error);
}

double glitch_error_energy(const DecodedSequence& decoded, const Basis& basis, std::span<const double> tau,
                           const TransientModel& model) {
    model.validate();
    const std::size_t L = basis.size();
    if (tau.size() != L) {
        throw Error(ErrorCode::LengthMismatch, "skew vector has " + std::to_string(tau.size()) +
                                                   " entries, basis has " + std::to_string(L));
    }
    const bool exponential = model.kind == TransientKind::Exponential;
    const double theta = model.time_constant;

    double energy = 0.0;
    std::int64_t level = 0;  // error level once every started transient has settled
    double residual = 0.0;   // error = level - residual * exp(-(t - t_ref) / theta)
    double t_ref = 0.0;
    bool started = false;

    std::vector<Event> window;
    window.reserve(L + 1);
    // Windows (m - 1/2, m + 1/2] are disjoint, so sorting inside each window
    // orders the whole event stream.
    for (std::size_t m = 1; m < decoded.reps.size(); ++m) {
        const auto& from = decoded.reps[m - 1];
        const auto& to = decoded.reps[m];
        if (from.size() != L || to.size() != L) {
            throw Error(ErrorCode::LengthMismatch, "representation width differs from basis");
        }
        window.clear();
        std::int64_t delta = 0;
        for (std::size_t i = 0; i < L; ++i) {
            const int c = static_cast<int>(to.bit(i)) - static_cast<int>(from.bit(i));
            if (c == 0) continue;
            const std::int64_t a = c * basis.weights()[i];
            window.push_back({static_cast<double>(m) + tau[i], a});
            delta += a;
        }
        if (window.empty()) continue;
        window.push_back({static_cast<double>(m), -delta});
        std::sort(window.begin(), window.end(), [](const Event& a, const Event& b) { return a.time < b.time; });

        for (const auto& ev : window) {
            if (started) {
                const double w = ev.time - t_ref;
                const double v = static_cast<double>(level);
                if (exponential) {
                    energy += v * v * w;
                    if (residual != 0.0) {
                        energy += -2.0 * v * residual * theta * -std::expm1(-w / theta);
                        energy += residual * residual * theta / 2.0 * -std::expm1(-2.0 * w / theta);
                    }
                } else {
                    energy += v * v * w;
                }
            }
            if (exponential) residual = residual * std::exp(-(ev.time - t_ref) / theta) + static_cast<double>(ev.amplitude);
            level += ev.amplitude;
            t_ref = ev.time;
            started = true;
        }
    }
    if (exponential) energy += residual * residual * theta / 2.0;
    return energy;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error(ErrorCode::InvalidArgument, "percentile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || std::isinf(values[lo]) || std::isinf(values[hi])) return frac < 0.5 ? values[lo] : values[hi];
    return values[lo] + frac * (values[hi] - values[lo]);
}

SndrStats monte_carlo_sndr(const Basis& basis, const MuCoefficients& mu, const SndrConfig& config) {
    config.transient.validate();
    if (config.n_realizations < 1) throw Error(ErrorCode::InvalidArgument, "n_realizations must be >= 1");
    if (config.n_samples < 2) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 2");
    if (!(config.sigma_tau > 0.0)) throw Error(ErrorCode::DegenerateSigma, "sigma_tau must be > 0");

    const RepresentationTable table(basis);
    std::optional<MemorylessLut> lut;
    if (config.policy == DecoderPolicy::Memoryless) lut = build_memoryless_lut(table, mu, config.input);
    const MemorylessLut* lut_ptr = lut ? &*lut : nullptr;
    const double mid = mid_scale(basis);
    const int n_bits = basis.n_bits();

    std::optional<DecodedSequence> fixed;
    if (!config.fresh_sequence) {
        auto rng = substream(splitmix64(config.seed), 0);
        const auto seq = config.input.generate(n_bits, config.n_samples, rng);
        fixed = decode(config.policy, seq, table, mu, lut_ptr);
    }

    const std::size_t R = config.n_realizations;
    std::vector<double> error_power(R);
    std::vector<double> signal_power(R);
    for_each_block(R, config.workers, [&](std::size_t r) {
        auto rng = substream(config.seed, r);
        const auto tau = draw_skews(basis.size(), config.sigma_tau, rng);
        DecodedSequence fresh;
        if (config.fresh_sequence) {
            const auto seq = config.input.generate(n_bits, config.n_samples, rng);
            fresh = decode(config.policy, seq, table, mu, lut_ptr);
        }
        const DecodedSequence& decoded = config.fresh_sequence ? fresh : *fixed;
        std::vector<double> sig(decoded.inputs.size());
        for (std::size_t m = 0; m < sig.size(); ++m) {
            const double v = static_cast<double>(decoded.inputs[m]) - mid;
            sig[m] = v * v;
        }
        const double duration = static_cast<double>(decoded.inputs.size());
        signal_power[r] = pairwise_sum(sig) / duration;
        error_power[r] = glitch_error_energy(decoded, basis, tau, config.transient) / duration;
    });

    SndrStats stats;
    stats.n_realizations = R;
    stats.sigma_tau = config.sigma_tau;
    stats.mean_error_power = pairwise_sum(error_power) / static_cast<double>(R);
    stats.mean_signal_power = pairwise_sum(signal_power) / static_cast<double>(R);
    stats.mean_db = stats.mean_error_power > 0.0
                        ? 10.0 * std::log10(stats.mean_signal_power / stats.mean_error_power)
                        : std::numeric_limits<double>::infinity();
    stats.per_realization_db.resize(R);
    for (std::size_t r = 0; r < R; ++r) {
        stats.per_realization_db[r] = error_power[r] > 0.0 ? 10.0 * std::log10(signal_power[r] / error_power[r])
                                                           : std::numeric_limits<double>::infinity();
    }
    for (double q : {5.0, 50.0, 95.0}) stats.percentile_db[q] = percentile(stats.per_realization_db, q);
    return stats;
}

}  // namespace tedac
