#include "tedac/metric.hpp"

#include <algorithm>
#include <cmath>

#include "tedac/random.hpp"

namespace tedac {

namespace {

constexpr std::uint64_t kDrawsPerBlock = 8192;

std::size_t block_count(std::uint64_t n_draws) {
    return static_cast<std::size_t>((n_draws + kDrawsPerBlock - 1) / kDrawsPerBlock);
}

std::uint64_t draws_in_block(std::uint64_t n_draws, std::size_t block) {
    const std::uint64_t start = static_cast<std::uint64_t>(block) * kDrawsPerBlock;
    return std::min(kDrawsPerBlock, n_draws - start);
}

void check_widths(const Representation& a, const Representation& b, const Basis& basis) {
    if (a.size() != basis.size() || b.size() != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "representation widths " + std::to_string(a.size()) + "/" +
                                                   std::to_string(b.size()) + " vs basis length " +
                                                   std::to_string(basis.size()));
    }
}

}  // namespace

void MuCoefficients::update_coefficients() {
    coeff_d = 0.0;
    coeff_s = 0.0;
    for (std::size_t n = 0; n < mu.size(); ++n) {
        const double k = static_cast<double>(n);
        coeff_d += 2.0 * (k + 1.0) * mu[n];
        coeff_s += 2.0 * (k + 1.0) * k * mu[n];
    }
}

MuCoefficients estimate_mu(std::size_t L, double sigma_tau, std::uint64_t n_draws, std::uint64_t seed,
                           bool truncate, int workers) {
    if (!(sigma_tau > 0.0)) throw Error(ErrorCode::DegenerateSigma, "sigma_tau must be > 0");
    if (L < 1) throw Error(ErrorCode::InvalidArgument, "L must be >= 1");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be >= 1");

    const std::size_t half = L / 2;
    const std::size_t n_blocks = block_count(n_draws);
    // Per block: L occupancy sums followed by half+1 spacing sums.
    const std::size_t stride = L + half + 1;
    std::vector<double> partial(n_blocks * stride, 0.0);

    for_each_block(n_blocks, workers, [&](std::size_t b) {
        auto rng = substream(seed, b);
        SkewSampler draw(sigma_tau, truncate);
        std::vector<double> tau(L);
        double* acc = partial.data() + b * stride;
        const std::uint64_t n = draws_in_block(n_draws, b);
        for (std::uint64_t k = 0; k < n; ++k) {
            for (auto& t : tau) t = draw(rng);
            std::sort(tau.begin(), tau.end());
            for (std::size_t i = 0; i < L && tau[i] < 0.0; ++i) {
                const double hi = i + 1 < L ? std::min(tau[i + 1], 0.0) : 0.0;
                acc[i] += hi - tau[i];
            }
            for (std::size_t i = 0; i < half; ++i) acc[L + i] += tau[i + 1] - tau[i];
            acc[L + half] += tau[half];
        }
    });

    MuCoefficients out;
    out.L = L;
    out.sigma_tau = sigma_tau;
    out.n_draws = n_draws;
    out.seed = seed;
    out.truncated = truncate;
    out.mu.assign(L, 0.0);
    out.spacing.assign(half + 1, 0.0);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* acc = partial.data() + b * stride;
        for (std::size_t i = 0; i < L; ++i) out.mu[i] += acc[i];
        for (std::size_t i = 0; i <= half; ++i) out.spacing[i] += acc[L + i];
    }
    const double inv = 1.0 / static_cast<double>(n_draws);
    for (auto& m : out.mu) m *= inv;
    for (auto& s : out.spacing) s *= inv;
    out.update_coefficients();
    return out;
}

PairStats pair_stats(const TransitionVector& c, const Basis& basis) {
    if (c.c.size() != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "transition vector length " + std::to_string(c.c.size()) +
                                                   " vs basis length " + std::to_string(basis.size()));
    }
    const std::size_t L = basis.size();
    if (L < 2) throw Error(ErrorCode::SInapplicable, "cross term S needs L >= 2");
    PairStats p;
    for (std::size_t i = 0; i < L; ++i) {
        const std::int64_t a = c.c[i] * basis.weights()[i];
        p.sum_sq += a * a;
        p.delta += a;
    }
    const double l = static_cast<double>(L);
    p.d = static_cast<double>(p.sum_sq) / l;
    p.s = static_cast<double>(p.delta * p.delta - p.sum_sq) / (l * (l - 1.0));
    return p;
}

double cost_from_moments(std::int64_t sum_sq, std::int64_t delta, const MuCoefficients& mu) noexcept {
    const double l = static_cast<double>(mu.L);
    const double d = static_cast<double>(sum_sq) / l;
    const double s = mu.L > 1 ? static_cast<double>(delta * delta - sum_sq) / (l * (l - 1.0)) : 0.0;
    return mu.coeff_d * d + mu.coeff_s * s;
}

double transition_cost(const Representation& from, const Representation& to, const Basis& basis,
                       const MuCoefficients& mu) {
    check_widths(from, to, basis);
    if (mu.L != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "mu estimated for L = " + std::to_string(mu.L) +
                                                   ", basis has L = " + std::to_string(basis.size()));
    }
    std::int64_t sum_sq = 0;
    std::int64_t delta = 0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const int c = static_cast<int>(to.bit(i)) - static_cast<int>(from.bit(i));
        const std::int64_t a = c * basis.weights()[i];
        sum_sq += a * a;
        delta += a;
    }
    return cost_from_moments(sum_sq, delta, mu);
}

CostKernel::CostKernel(const Basis& basis, const MuCoefficients& mu) : mu_(&mu) {
    if (mu.L != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "mu estimated for L = " + std::to_string(mu.L) +
                                                   ", basis has L = " + std::to_string(basis.size()));
    }
    if (basis.size() > kMaxRepresentationWidth) {
        throw Error(ErrorCode::InvalidArgument, "basis too wide for mask representations");
    }
    n_tables_ = (basis.size() + 7) / 8;
    tables_.assign(n_tables_ * 256, 0);
    for (std::size_t k = 0; k < n_tables_; ++k) {
        for (std::size_t byte = 0; byte < 256; ++byte) {
            std::int64_t s = 0;
            for (std::size_t j = 0; j < 8; ++j) {
                const std::size_t i = 8 * k + j;
                if (i < basis.size() && ((byte >> j) & 1u)) s += basis.weights()[i] * basis.weights()[i];
            }
            tables_[k * 256 + byte] = s;
        }
    }
}

OracleEstimate glitch_energy_oracle_stats(const Representation& from, const Representation& to,
                                          const Basis& basis, double sigma_tau, std::uint64_t n_draws,
                                          std::uint64_t seed, int workers) {
    check_widths(from, to, basis);
    if (!(sigma_tau > 0.0)) throw Error(ErrorCode::DegenerateSigma, "sigma_tau must be > 0");
    if (n_draws < 1) throw Error(ErrorCode::InvalidArgument, "n_draws must be >= 1");

    const std::size_t L = basis.size();
    std::vector<std::size_t> active;
    std::int64_t delta = 0;
    for (std::size_t i = 0; i < L; ++i) {
        if (from.bit(i) != to.bit(i)) {
            active.push_back(i);
            delta += to.bit(i) ? basis.weights()[i] : -basis.weights()[i];
        }
    }

    const std::size_t n_blocks = block_count(n_draws);
    std::vector<double> sums(n_blocks, 0.0);
    std::vector<double> squares(n_blocks, 0.0);

    for_each_block(n_blocks, workers, [&](std::size_t b) {
        auto rng = substream(seed, b);
        SkewSampler draw(sigma_tau);
        std::vector<double> tau(L);
        // (instant, amplitude); the ideal output steps by -delta at t = 0.
        std::vector<std::pair<double, std::int64_t>> events;
        events.reserve(active.size() + 1);
        const std::uint64_t n = draws_in_block(n_draws, b);
        for (std::uint64_t k = 0; k < n; ++k) {
            for (auto& t : tau) t = draw(rng);
            if (active.empty()) continue;
            events.clear();
            for (auto i : active) {
                events.emplace_back(tau[i], to.bit(i) ? basis.weights()[i] : -basis.weights()[i]);
            }
            events.emplace_back(0.0, -delta);
            std::sort(events.begin(), events.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double energy = 0.0;
            std::int64_t level = 0;
            for (std::size_t e = 0; e + 1 < events.size(); ++e) {
                level += events[e].second;
                const double v = static_cast<double>(level);
                energy += v * v * (events[e + 1].first - events[e].first);
            }
            sums[b] += energy;
            squares[b] += energy * energy;
        }
    });

    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        sum += sums[b];
        sq += squares[b];
    }
    const double n = static_cast<double>(n_draws);
    OracleEstimate est;
    est.n_draws = n_draws;
    est.mean = sum / n;
    const double var = n > 1 ? std::max(0.0, (sq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
    est.std_error = std::sqrt(var / n);
    return est;
}

double glitch_energy_oracle(const Representation& from, const Representation& to, const Basis& basis,
                            double sigma_tau, std::uint64_t n_draws, std::uint64_t seed, int workers) {
    return glitch_energy_oracle_stats(from, to, basis, sigma_tau, n_draws, seed, workers).mean;
}

const char* to_string(DecoderPolicy policy) noexcept {
    switch (policy) {
        case DecoderPolicy::Viterbi: return "viterbi";
        case DecoderPolicy::Greedy: return "greedy";
        case DecoderPolicy::Memoryless: return "memoryless";
    }
    return "unknown";
}

DecoderPolicy parse_policy(std::string_view name) {
    if (name == "viterbi") return DecoderPolicy::Viterbi;
    if (name == "greedy") return DecoderPolicy::Greedy;
    if (name == "memoryless") return DecoderPolicy::Memoryless;
    throw Error(ErrorCode::InvalidArgument,
                "unknown policy '" + std::string(name) + "' (expected viterbi, greedy or memoryless)");
}

}  // namespace tedac
