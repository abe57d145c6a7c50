#include "doctest.h"

#include <cmath>
#include <random>

#include "tedac/decoder.hpp"
#include "tedac/metric.hpp"
#include "tedac/table1.hpp"

using namespace tedac;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

// Occupancy of "exactly n+1 switched" on the negative axis, by Simpson
// quadrature of P(Binomial(L, Phi(t / sigma)) = n + 1) over t < 0.
std::vector<double> quadrature_mu(std::size_t L, double sigma) {
    std::vector<double> mu(L, 0.0);
    const int steps = 4000;
    const double lo = -10.0 * sigma;
    const double h = -lo / steps;
    for (int k = 0; k <= steps; ++k) {
        const double t = lo + k * h;
        const double w = (k == 0 || k == steps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double p = normal_cdf(t / sigma);
        for (std::size_t n = 0; n < L; ++n) {
            const double j = static_cast<double>(n + 1);
            mu[n] += w * h / 3.0 * binomial(L, n + 1) * std::pow(p, j) * std::pow(1.0 - p, static_cast<double>(L) - j);
        }
    }
    return mu;
}

MuCoefficients exact_mu(std::size_t L, double sigma) {
    MuCoefficients m;
    m.L = L;
    m.sigma_tau = sigma;
    m.mu = quadrature_mu(L, sigma);
    m.update_coefficients();
    return m;
}

Representation random_rep(std::size_t L, std::mt19937_64& rng) {
    const std::uint64_t mask = L == 64 ? rng() : rng() & ((std::uint64_t{1} << L) - 1);
    return Representation(mask, L);
}

}  // namespace

TEST_CASE("estimated occupancies match quadrature") {
    for (std::size_t L : {2u, 3u, 5u, 8u, 9u}) {
        const auto est = estimate_mu(L, 0.03, 200000, 11);
        const auto ref = quadrature_mu(L, 0.03);
        REQUIRE(est.mu.size() == L);
        for (std::size_t n = 0; n < L; ++n) {
            CHECK(est.mu[n] >= 0.0);
            if (ref[n] > 1e-4 * 0.03) CHECK(est.mu[n] == doctest::Approx(ref[n]).epsilon(0.02));
        }
    }
}

TEST_CASE("two-switch spacing equals the mean absolute difference of two normals") {
    const std::uint64_t n = 400000;
    const auto mu = estimate_mu(2, 1.0, n, 5, false);
    REQUIRE(mu.spacing.size() == 2);
    const double expected = 2.0 / std::sqrt(M_PI);
    const double sd = std::sqrt(2.0 - 4.0 / M_PI);
    CHECK(std::abs(mu.spacing[0] - expected) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
    CHECK_FALSE(mu.truncated);
}

TEST_CASE("occupancies scale linearly with sigma") {
    const auto a = estimate_mu(9, 0.03, 50000, 3);
    const auto b = estimate_mu(9, 0.06, 50000, 3);
    for (std::size_t n = 0; n < 9; ++n) CHECK(b.mu[n] == doctest::Approx(2.0 * a.mu[n]).epsilon(1e-9));
    CHECK(b.coeff_d == doctest::Approx(2.0 * a.coeff_d).epsilon(1e-9));
}

TEST_CASE("estimate_mu is deterministic and independent of workers") {
    const auto a = estimate_mu(7, 0.03, 30000, 99);
    const auto b = estimate_mu(7, 0.03, 30000, 99);
    const auto c = estimate_mu(7, 0.03, 30000, 99, true, 3);
    CHECK(a.mu == b.mu);
    CHECK(a.mu == c.mu);
    CHECK(a.coeff_s == c.coeff_s);
    CHECK(estimate_mu(7, 0.03, 30000, 100).mu != a.mu);
    CHECK_THROWS_AS(estimate_mu(7, 0.0, 10, 1), Error);
}

TEST_CASE("pair_stats examples") {
    const auto b = binary_basis(8);
    const auto p = pair_stats(transition_vector(Representation(127, 8), Representation(128, 8)), b);
    CHECK(p.d == doctest::Approx(2730.625));
    CHECK(p.s == doctest::Approx((1.0 - 21845.0) / 56.0));
    CHECK(p.sum_sq == 21845);
    CHECK(p.delta == 1);

    const auto zero = pair_stats(TransitionVector{std::vector<int>(8, 0)}, b);
    CHECK(zero.d == 0.0);
    CHECK(zero.s == 0.0);

    std::vector<int> one(8, 0);
    one[5] = 1;
    const auto single = pair_stats(TransitionVector{one}, b);
    CHECK(single.d == doctest::Approx(32.0 * 32.0 / 8.0));
    CHECK(single.s == 0.0);

    CHECK_THROWS_AS(pair_stats(TransitionVector{{1}}, binary_basis(1)), Error);
    CHECK_THROWS_AS(pair_stats(TransitionVector{{1, 0}}, binary_basis(3)), Error);
}

TEST_CASE("L*D + L(L-1)*S equals (y - x)^2") {
    std::mt19937_64 rng(4);
    for (std::size_t L = 9; L <= 14; ++L) {
        const auto b = table1_basis(L);
        for (int k = 0; k < 500; ++k) {
            const auto x = random_rep(L, rng);
            const auto y = random_rep(L, rng);
            const auto p = pair_stats(transition_vector(x, y), b);
            const double l = static_cast<double>(L);
            const double lhs = l * p.d + l * (l - 1.0) * p.s;
            const double d = static_cast<double>(dac_value(y, b) - dac_value(x, b));
            CHECK(lhs == doctest::Approx(d * d).epsilon(1e-9));
            CHECK(p.d >= 0.0);
        }
    }
}

TEST_CASE("closed form reproduces the two-switch gold value") {
    // Unary [1, 1], both switches turn on: E[energy] / sigma = (4 sqrt 2 - 2) / sqrt pi.
    const double sigma = 0.03;
    const double gold = sigma * (4.0 * std::sqrt(2.0) - 2.0) / std::sqrt(M_PI);
    const auto b = make_basis({1, 1}, 2);
    const Representation off(0, 2), on(3, 2);

    CHECK(transition_cost(off, on, b, exact_mu(2, sigma)) == doctest::Approx(gold).epsilon(1e-6));
    CHECK(transition_cost(off, on, b, estimate_mu(2, sigma, 400000, 8)) == doctest::Approx(gold).epsilon(0.01));

    const auto oracle = glitch_energy_oracle_stats(off, on, b, sigma, 400000, 21);
    CHECK(std::abs(oracle.mean - gold) <= 4.0 * oracle.std_error);
}

TEST_CASE("transition cost is zero, symmetric and nonnegative") {
    const auto b = make_basis({1, 2, 3, 4, 5}, 4);
    const auto mu = estimate_mu(5, 0.03, 50000, 2);
    for (std::uint64_t x = 0; x < 32; ++x) {
        const Representation a(x, 5);
        CHECK(transition_cost(a, a, b, mu) == 0.0);
        for (std::uint64_t y = 0; y < 32; ++y) {
            const Representation z(y, 5);
            const double c = transition_cost(a, z, b, mu);
            REQUIRE(c >= 0.0);
            REQUIRE(c == transition_cost(z, a, b, mu));
        }
    }
    CHECK_THROWS_AS(transition_cost(Representation(0, 5), Representation(1, 5), b, estimate_mu(4, 0.03, 10, 1)), Error);
}

TEST_CASE("cost kernel agrees with transition_cost bit for bit") {
    const auto b = table1_basis(12);
    const auto mu = estimate_mu(12, 0.03, 20000, 1);
    const CostKernel kernel(b, mu);
    std::mt19937_64 rng(12);
    for (int k = 0; k < 1000; ++k) {
        const auto x = random_rep(12, rng);
        const auto y = random_rep(12, rng);
        const auto delta = dac_value(y, b) - dac_value(x, b);
        REQUIRE(kernel(x.mask(), y.mask(), delta) == transition_cost(x, y, b, mu));
    }
}

TEST_CASE("closed form agrees with the oracle on random transitions") {
    const auto b = binary_basis(8);
    const auto mu = estimate_mu(8, 0.03, 400000, 17);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 5; ++k) {
        const auto x = random_rep(8, rng);
        const auto y = random_rep(8, rng);
        if (x == y) continue;
        const double c = transition_cost(x, y, b, mu);
        const auto o = glitch_energy_oracle_stats(x, y, b, 0.03, 40000, 100 + k);
        CHECK(c == doctest::Approx(o.mean).epsilon(0.04));
    }
}

TEST_CASE("oracle properties") {
    const auto b = binary_basis(4);
    const Representation x(5, 4), y(10, 4);
    CHECK(glitch_energy_oracle(x, x, b, 0.03, 1000, 1) == 0.0);

    // Under the step model the error pulse widths scale with sigma, so energy is linear in sigma.
    const double e1 = glitch_energy_oracle(x, y, b, 0.02, 100000, 3);
    const double e2 = glitch_energy_oracle(x, y, b, 0.04, 100000, 3);
    CHECK(e2 / e1 == doctest::Approx(2.0).epsilon(1e-6));

    const auto s1 = glitch_energy_oracle_stats(x, y, b, 0.03, 40000, 7);
    const auto s2 = glitch_energy_oracle_stats(x, y, b, 0.03, 160000, 8);
    CHECK(s2.std_error / s1.std_error == doctest::Approx(0.5).epsilon(0.05));

    CHECK(glitch_energy_oracle(x, y, b, 0.03, 30000, 4) == glitch_energy_oracle(x, y, b, 0.03, 30000, 4, 3));
}

TEST_CASE("total cost of a single switch") {
    const auto b = binary_basis(1);
    const auto mu = estimate_mu(1, 0.03, 10000, 1);
    const double c = transition_cost(Representation(0, 1), Representation(1, 1), b, mu);
    for (auto policy : {DecoderPolicy::Viterbi, DecoderPolicy::Greedy, DecoderPolicy::Memoryless}) {
        CHECK(total_cost(b, policy, InputModel::uniform_iid(), mu) == doctest::Approx(0.5 * c));
    }
}

TEST_CASE("complete basis total cost is the exhaustive pair sum") {
    const auto b = binary_basis(5);
    const auto mu = estimate_mu(5, 0.03, 20000, 1);
    double sum = 0.0;
    for (std::uint64_t x = 0; x < 32; ++x) {
        for (std::uint64_t y = 0; y < 32; ++y) sum += transition_cost(Representation(x, 5), Representation(y, 5), b, mu);
    }
    CHECK(total_cost(b, DecoderPolicy::Greedy, InputModel::uniform_iid(), mu) == doctest::Approx(sum / 1024.0));
}

TEST_CASE("binary 8-bit total cost regression") {
    const auto mu = estimate_mu(8, 0.03, 1000000, 1);
    const double c = total_cost(binary_basis(8), DecoderPolicy::Viterbi, InputModel::uniform_iid(), mu);
    CHECK(c == doctest::Approx(261.2867609166542).epsilon(1e-12));
    const double exact = total_cost(binary_basis(8), DecoderPolicy::Viterbi, InputModel::uniform_iid(), exact_mu(8, 0.03));
    CHECK(c == doctest::Approx(exact).epsilon(0.005));
}

TEST_CASE("greedy stationary cost agrees with a simulated chain") {
    const auto b = make_basis({1, 1, 2, 3, 4, 4}, 4);
    const auto mu = estimate_mu(6, 0.03, 50000, 1);
    const RepresentationTable table(b);
    const auto exact = evaluate_total_cost(table, DecoderPolicy::Greedy, InputModel::uniform_iid(), mu);
    CHECK(exact.exact);
    SamplingBudget sim;
    sim.exact_state_limit = 0;
    sim.chain_length = 400000;
    sim.seed = 3;
    const auto approx = evaluate_total_cost(table, DecoderPolicy::Greedy, InputModel::uniform_iid(), mu, sim);
    CHECK_FALSE(approx.exact);
    CHECK(approx.value == doctest::Approx(exact.value).epsilon(0.01));
}

TEST_CASE("memoryless total cost is the pair sum over its table") {
    const auto b = make_basis({1, 2, 2, 3, 7}, 4);
    const auto mu = estimate_mu(5, 0.03, 50000, 1);
    const auto lut = build_memoryless_lut(b, mu, InputModel::uniform_iid());
    double sum = 0.0;
    for (Codeword x = 0; x < 16; ++x) {
        for (Codeword y = 0; y < 16; ++y) sum += transition_cost(lut[x], lut[y], b, mu);
    }
    CHECK(total_cost(b, DecoderPolicy::Memoryless, InputModel::uniform_iid(), mu) == doctest::Approx(sum / 256.0));
}

TEST_CASE("policy ordering of total cost") {
    const auto b = table1_basis(9);
    const auto mu = estimate_mu(9, 0.03, 100000, 1);
    SamplingBudget budget;
    budget.chain_length = 200000;
    budget.seed = 1;
    const auto u = InputModel::uniform_iid();
    const double v = total_cost(b, DecoderPolicy::Viterbi, u, mu, budget);
    const double g = total_cost(b, DecoderPolicy::Greedy, u, mu, budget);
    const double m = total_cost(b, DecoderPolicy::Memoryless, u, mu, budget);
    CHECK(v <= g * 1.01);
    CHECK(g <= m * 1.01);
}

TEST_CASE("thermometer reference cost") {
    const auto mu = estimate_mu(7, 0.03, 50000, 1);
    double sum = 0.0;
    for (std::int64_t x = 0; x < 8; ++x) {
        for (std::int64_t y = 0; y < 8; ++y) sum += cost_from_moments(std::abs(y - x), y - x, mu);
    }
    CHECK(thermometer_total_cost(3, InputModel::uniform_iid(), mu) == doctest::Approx(sum / 64.0));
    CHECK_THROWS_AS(thermometer_total_cost(3, InputModel::uniform_iid(), estimate_mu(6, 0.03, 10, 1)), Error);
}

TEST_CASE("incomplete basis is rejected") {
    const auto b = make_basis({1, 1, 4}, 3);
    const auto mu = estimate_mu(3, 0.03, 1000, 1);
    try {
        total_cost(b, DecoderPolicy::Greedy, InputModel::uniform_iid(), mu);
        FAIL("expected IncompleteBasis");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IncompleteBasis);
    }
}

TEST_CASE("policy names") {
    CHECK(parse_policy("viterbi") == DecoderPolicy::Viterbi);
    CHECK(parse_policy("greedy") == DecoderPolicy::Greedy);
    CHECK(parse_policy("memoryless") == DecoderPolicy::Memoryless);
    CHECK(std::string(to_string(DecoderPolicy::Memoryless)) == "memoryless");
    CHECK_THROWS_AS(parse_policy("lut"), Error);
}
