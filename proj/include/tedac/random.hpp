#pragma once

// Counter-based substreams: block `k` of any Monte Carlo loop is seeded from
// (root seed, k) alone, so results do not depend on how blocks are spread
// over workers.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

#include "tedac/error.hpp"

namespace tedac {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(root) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

inline std::mt19937_64 substream(std::uint64_t root, std::uint64_t stream) {
    return std::mt19937_64(substream_seed(root, stream));
}

// N(0, sigma^2) truncated to (-1/2, 1/2] by rejection. sigma in units of T.
class SkewSampler {
public:
    SkewSampler(double sigma, bool truncate = true) : dist_(0.0, sigma), truncate_(truncate) {
        if (!(sigma > 0.0)) throw Error(ErrorCode::DegenerateSigma, "sigma_tau must be > 0");
    }

    template <class Rng>
    double operator()(Rng& rng) {
        for (;;) {
            const double t = dist_(rng);
            if (!truncate_ || (t > -0.5 && t <= 0.5)) return t;
        }
    }

private:
    std::normal_distribution<double> dist_;
    bool truncate_;
};

// Runs fn(block) for block in [0, n_blocks) on up to `workers` threads.
// Blocks are handed out round-robin; callers store per-block results and
// reduce them in block order.
template <class Fn>
void for_each_block(std::size_t n_blocks, int workers, Fn&& fn) {
    const auto n_threads = static_cast<std::size_t>(std::max(1, workers));
    if (n_threads == 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(std::min(n_threads, n_blocks));
    const std::size_t used = errors.size();
    pool.reserve(used);
    for (std::size_t t = 0; t < used; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t b = t; b < n_blocks; b += used) fn(b);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace tedac
