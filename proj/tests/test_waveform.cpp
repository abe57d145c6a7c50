#include "doctest.h"

#include <cmath>
#include <limits>
#include <numeric>

#include "tedac/table1.hpp"
#include "tedac/waveform.hpp"

using namespace tedac;

namespace {

DecodedSequence binary_sequence(const std::vector<Codeword>& xs, int n_bits) {
    DecodedSequence d;
    d.inputs = xs;
    for (auto x : xs) d.reps.emplace_back(static_cast<std::uint64_t>(x), static_cast<std::size_t>(n_bits));
    return d;
}

SkewRealization fixed_skews(std::vector<double> tau) {
    SkewRealization s;
    s.tau = std::move(tau);
    return s;
}

double grid_energy(const std::vector<double>& a, const std::vector<double>& b, std::size_t oversample) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) e += (a[k] - b[k]) * (a[k] - b[k]);
    return e / static_cast<double>(oversample);
}

}  // namespace

TEST_CASE("sample_skews") {
    const auto s = sample_skews(100000, 0.03, 5);
    double mean = std::accumulate(s.tau.begin(), s.tau.end(), 0.0) / s.tau.size();
    double var = 0.0;
    for (double t : s.tau) var += (t - mean) * (t - mean);
    const double sd = std::sqrt(var / (s.tau.size() - 1));
    CHECK(sd >= 0.0297);
    CHECK(sd <= 0.0303);
    CHECK(sample_skews(12, 0.03, 5).tau == sample_skews(12, 0.03, 5).tau);

    const auto wide = sample_skews(20000, 0.4, 1);
    for (double t : wide.tau) REQUIRE((t > -0.5 && t <= 0.5));
    CHECK_THROWS_AS(sample_skews(3, 0.0, 1), Error);
}

TEST_CASE("zero skew step output is the zero-order hold") {
    const auto b = binary_basis(4);
    const auto d = binary_sequence({0, 15, 3, 8, 8, 1}, 4);
    const std::size_t os = 16;
    const auto w = synthesize_output(d, b, fixed_skews(std::vector<double>(4, 0.0)), TransientModel::ideal_step(), os);
    REQUIRE(w.size() == d.inputs.size() * os);
    for (std::size_t m = 0; m < d.inputs.size(); ++m) {
        for (std::size_t j = 0; j < os; ++j) CHECK(w[m * os + j] == static_cast<double>(d.inputs[m]) - 7.5);
    }
    CHECK_THROWS_AS(synthesize_output(d, b, fixed_skews({0, 0, 0, 0}), TransientModel::ideal_step(), 4), Error);
    CHECK_THROWS_AS(synthesize_output(d, b, fixed_skews({0, 0, 0}), TransientModel::ideal_step(), 16), Error);
}

TEST_CASE("one late switch makes a rectangular error pulse") {
    const auto b = binary_basis(3);
    const auto d = binary_sequence({0, 4, 4}, 3);
    const double tau = 0.25;
    const std::size_t os = 64;
    const auto skews = fixed_skews({0.0, 0.0, tau});
    const auto actual = synthesize_output(d, b, skews, TransientModel::ideal_step(), os);
    const auto ideal = synthesize_output(d, b, fixed_skews({0, 0, 0}), TransientModel::ideal_step(), os);
    std::size_t nonzero = 0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        const double e = actual[k] - ideal[k];
        if (e != 0.0) {
            ++nonzero;
            CHECK(e == -4.0);
        }
    }
    CHECK(nonzero == static_cast<std::size_t>(tau * os));
    CHECK(glitch_error_energy(d, b, skews.tau, TransientModel::ideal_step()) == doctest::Approx(16.0 * tau));
}

TEST_CASE("exact error energy matches the sampled waveform") {
    const auto b = table1_basis(9);
    const auto mu = estimate_mu(9, 0.03, 1000, 1);
    const std::vector<Codeword> xs{0, 200, 13, 128, 77, 77, 77};
    const auto d = decode_viterbi(xs, b, mu);
    const auto skews = sample_skews(9, 0.1, 4);
    const std::size_t os = 4096;
    for (const auto& model : {TransientModel::ideal_step(), TransientModel::exponential(0.05)}) {
        const auto a = synthesize_output(d, b, skews, model, os);
        SkewRealization zero = skews;
        std::fill(zero.tau.begin(), zero.tau.end(), 0.0);
        const auto i = synthesize_output(d, b, zero, model, os);
        CHECK(grid_energy(a, i, os) == doctest::Approx(glitch_error_energy(d, b, skews.tau, model)).epsilon(0.01));
    }
}

TEST_CASE("fast exponential settling converges to the step") {
    const auto b = binary_basis(4);
    const auto d = binary_sequence({0, 15, 6, 9}, 4);
    const auto skews = fixed_skews({0.02, -0.03, 0.01, 0.04});
    const auto step = synthesize_output(d, b, skews, TransientModel::ideal_step(), 256);
    double previous = std::numeric_limits<double>::infinity();
    for (double theta : {0.05, 0.01, 0.002, 0.0004}) {
        const auto e = synthesize_output(d, b, skews, TransientModel::exponential(theta), 256);
        double rms = 0.0;
        for (std::size_t k = 0; k < e.size(); ++k) {
            rms += (e[k] - step[k]) * (e[k] - step[k]);
        }
        CHECK(rms < previous);
        previous = rms;
    }
    CHECK(previous / 256.0 < 0.01);
    const double exact = glitch_error_energy(d, b, skews.tau, TransientModel::ideal_step());
    CHECK(glitch_error_energy(d, b, skews.tau, TransientModel::exponential(1e-5)) == doctest::Approx(exact).epsilon(1e-3));
    CHECK_THROWS_AS(TransientModel::exponential(0.0).validate(), Error);
}

TEST_CASE("glitch_sndr") {
    const std::vector<double> ideal{1.0, -2.0, 3.0, 0.5};
    CHECK(std::isinf(glitch_sndr(ideal, ideal)));
    std::vector<double> one = ideal;
    std::vector<double> two = ideal;
    one[1] += 0.1;
    two[1] += 0.2;
    CHECK(glitch_sndr(one, ideal) - glitch_sndr(two, ideal) == doctest::Approx(20.0 * std::log10(2.0)));
    CHECK_THROWS_AS(glitch_sndr(std::vector<double>{1.0}, ideal), Error);
}

TEST_CASE("percentile") {
    CHECK(percentile({3.0, 1.0, 2.0}, 50.0) == 2.0);
    CHECK(percentile({0.0, 10.0}, 5.0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(percentile({}, 5.0), Error);
}

TEST_CASE("simulated error power agrees with the closed-form total cost") {
    const auto mu = estimate_mu(8, 0.03, 400000, 1);
    SndrConfig cfg;
    cfg.policy = DecoderPolicy::Viterbi;
    cfg.input = InputModel::uniform_iid();
    cfg.transient = TransientModel::ideal_step();
    cfg.n_realizations = 2000;
    cfg.n_samples = 256;
    cfg.seed = 7;
    const auto stats = monte_carlo_sndr(binary_basis(8), mu, cfg);
    const double predicted = total_cost(binary_basis(8), DecoderPolicy::Viterbi, cfg.input, mu) * 255.0 / 256.0;
    CHECK(stats.mean_error_power == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("sine SNDR agrees with the closed-form prediction") {
    const auto b = binary_basis(8);
    const auto mu = estimate_mu(8, 0.03, 400000, 2);
    SndrConfig cfg;
    cfg.policy = DecoderPolicy::Viterbi;
    cfg.transient = TransientModel::ideal_step();
    cfg.n_realizations = 300;
    cfg.n_samples = 2048;
    cfg.seed = 3;
    const auto stats = monte_carlo_sndr(b, mu, cfg);

    std::mt19937_64 rng(1);
    const auto seq = cfg.input.generate(8, cfg.n_samples, rng);
    const auto d = decode_viterbi(seq, b, mu);
    double signal = 0.0;
    for (auto x : seq) signal += (x - 127.5) * (x - 127.5);
    const double predicted_db = 10.0 * std::log10(signal / d.total_cost);
    CHECK(std::abs(stats.mean_db - predicted_db) <= 1.0);
}

TEST_CASE("monte carlo statistics") {
    const auto b = table1_basis(10);
    const auto mu = estimate_mu(10, 0.03, 20000, 1);
    SndrConfig cfg;
    cfg.n_realizations = 40;
    cfg.n_samples = 256;
    cfg.seed = 11;
    const auto a = monte_carlo_sndr(b, mu, cfg);
    CHECK(a.percentile_db.at(5.0) <= a.percentile_db.at(50.0));
    CHECK(a.percentile_db.at(50.0) <= a.percentile_db.at(95.0));
    CHECK(a.percentile_db.at(5.0) <= a.mean_db + 0.5);
    CHECK(a.n_realizations == 40);

    cfg.workers = 3;
    const auto b2 = monte_carlo_sndr(b, mu, cfg);
    CHECK(a.mean_db == b2.mean_db);
    CHECK(a.per_realization_db == b2.per_realization_db);

    cfg.policy = DecoderPolicy::Memoryless;
    cfg.fresh_sequence = false;
    const auto m = monte_carlo_sndr(b, mu, cfg);
    CHECK(std::isfinite(m.mean_db));

    cfg.n_realizations = 0;
    CHECK_THROWS_AS(monte_carlo_sndr(b, mu, cfg), Error);
}

TEST_CASE("error power scaling with sigma") {
    const auto b = binary_basis(8);
    const auto mu = estimate_mu(8, 0.03, 1000, 1);
    SndrConfig cfg;
    cfg.input = InputModel::uniform_iid();
    cfg.n_realizations = 400;
    cfg.n_samples = 256;
    cfg.seed = 5;

    // Step transients: pulse widths scale with sigma, so error power is linear in sigma.
    cfg.transient = TransientModel::ideal_step();
    cfg.sigma_tau = 0.01;
    const double step1 = monte_carlo_sndr(b, mu, cfg).mean_error_power;
    cfg.sigma_tau = 0.02;
    const double step2 = monte_carlo_sndr(b, mu, cfg).mean_error_power;
    CHECK(step2 / step1 == doctest::Approx(2.0).epsilon(1e-6));

    // Settling much slower than the skews: the error is the derivative-scaled skew, so power goes as sigma^2.
    cfg.transient = TransientModel::exponential(0.5);
    cfg.sigma_tau = 0.002;
    const double slow1 = monte_carlo_sndr(b, mu, cfg).mean_error_power;
    cfg.sigma_tau = 0.004;
    const double slow2 = monte_carlo_sndr(b, mu, cfg).mean_error_power;
    CHECK(slow2 / slow1 == doctest::Approx(4.0).epsilon(0.02));
}
