#include "tedac/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace tedac {

namespace {

void check_bits(int n_bits) {
    if (n_bits < 1 || n_bits > kMaxBits) {
        throw Error(ErrorCode::InvalidArgument,
                    "n_bits must be in [1, " + std::to_string(kMaxBits) + "], got " + std::to_string(n_bits));
    }
}

}  // namespace

Weight Basis::sum() const noexcept { return std::accumulate(weights_.begin(), weights_.end(), Weight{0}); }

Basis make_basis(std::vector<Weight> weights, int n_bits) {
    check_bits(n_bits);
    if (weights.empty()) throw Error(ErrorCode::EmptyBasis, "basis has no weights");
    const Weight max_weight = Weight{1} << n_bits;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 1 || weights[i] > max_weight) {
            throw Error(ErrorCode::WeightOutOfRange, "weight[" + std::to_string(i) + "] = " +
                                                         std::to_string(weights[i]) + " outside [1, " +
                                                         std::to_string(max_weight) + "]");
        }
    }
    if (weights.size() < static_cast<std::size_t>(n_bits)) {
        throw Error(ErrorCode::InvalidArgument, "basis needs at least n_bits = " + std::to_string(n_bits) +
                                                    " weights, got " + std::to_string(weights.size()));
    }
    std::sort(weights.begin(), weights.end());
    Basis b;
    b.weights_ = std::move(weights);
    b.n_bits_ = n_bits;
    return b;
}

Basis binary_basis(int n_bits) {
    check_bits(n_bits);
    std::vector<Weight> w(static_cast<std::size_t>(n_bits));
    for (int i = 0; i < n_bits; ++i) w[static_cast<std::size_t>(i)] = Weight{1} << i;
    return make_basis(std::move(w), n_bits);
}

Basis segmented_basis(int n_bits, int n_thermo) {
    check_bits(n_bits);
    if (n_thermo < 1 || n_thermo >= n_bits) {
        throw Error(ErrorCode::InvalidSegmentation, "need 1 <= n_thermo < n_bits, got n_thermo = " +
                                                        std::to_string(n_thermo) + ", n_bits = " +
                                                        std::to_string(n_bits));
    }
    const int n_binary = n_bits - n_thermo;
    std::vector<Weight> w;
    for (int i = 0; i < n_binary; ++i) w.push_back(Weight{1} << i);
    const Weight cell = Weight{1} << n_binary;
    for (Weight k = 0; k < (Weight{1} << n_thermo) - 1; ++k) w.push_back(cell);
    return make_basis(std::move(w), n_bits);
}

Representation::Representation(std::uint64_t mask, std::size_t width) : mask_(mask), width_(width) {
    if (width > kMaxRepresentationWidth) {
        throw Error(ErrorCode::InvalidArgument, "representation width " + std::to_string(width) + " exceeds " +
                                                    std::to_string(kMaxRepresentationWidth));
    }
    if (width < kMaxRepresentationWidth && (mask >> width) != 0) {
        throw Error(ErrorCode::InvalidArgument, "mask has bits above width " + std::to_string(width));
    }
}

Representation Representation::from_bits(std::span<const int> bits) {
    if (bits.size() > kMaxRepresentationWidth) {
        throw Error(ErrorCode::InvalidArgument, "representation width " + std::to_string(bits.size()) +
                                                    " exceeds " + std::to_string(kMaxRepresentationWidth));
    }
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i] != 0 && bits[i] != 1) {
            throw Error(ErrorCode::InvalidArgument, "bit " + std::to_string(i) + " is not 0 or 1");
        }
        if (bits[i]) mask |= std::uint64_t{1} << i;
    }
    return Representation(mask, bits.size());
}

std::vector<int> Representation::bits() const {
    std::vector<int> out(width_);
    for (std::size_t i = 0; i < width_; ++i) out[i] = bit(i) ? 1 : 0;
    return out;
}

std::string Representation::to_string() const {
    std::string s(width_, '0');
    for (std::size_t i = 0; i < width_; ++i) {
        if (bit(i)) s[width_ - 1 - i] = '1';
    }
    return s;
}

Codeword dac_value(const Representation& rep, const Basis& basis) {
    if (rep.size() != basis.size()) {
        throw Error(ErrorCode::LengthMismatch, "representation has " + std::to_string(rep.size()) +
                                                   " bits, basis has " + std::to_string(basis.size()) + " weights");
    }
    Codeword v = 0;
    for (std::size_t i = 0; i < rep.size(); ++i) {
        if (rep.bit(i)) v += basis.weights()[i];
    }
    return v;
}

TransitionVector transition_vector(const Representation& from, const Representation& to) {
    if (from.size() != to.size()) {
        throw Error(ErrorCode::LengthMismatch, "representations of width " + std::to_string(from.size()) +
                                                   " and " + std::to_string(to.size()));
    }
    TransitionVector t;
    t.c.resize(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) {
        t.c[i] = static_cast<int>(to.bit(i)) - static_cast<int>(from.bit(i));
    }
    return t;
}

double TransitionModel::probability(Codeword x, Codeword y) const {
    const auto n = static_cast<std::size_t>(Codeword{1} << n_bits);
    if (independent) return marginal[static_cast<std::size_t>(x)] * marginal[static_cast<std::size_t>(y)];
    return joint[static_cast<std::size_t>(x) * n + static_cast<std::size_t>(y)];
}

double TransitionModel::conditional(Codeword x, Codeword y) const {
    if (independent) return marginal[static_cast<std::size_t>(y)];
    const double px = marginal[static_cast<std::size_t>(x)];
    if (px <= 0.0) return 0.0;
    return probability(x, y) / px;
}

InputModel InputModel::uniform_iid() { return InputModel{}; }

InputModel InputModel::single_tone(ToneParams params) {
    if (params.period == 0 || params.bin == 0 || params.bin * 2 >= params.period) {
        throw Error(ErrorCode::InvalidArgument, "tone needs 0 < bin < period / 2");
    }
    if (!(params.amplitude > 0.0) || params.amplitude > 1.0) {
        throw Error(ErrorCode::InvalidArgument, "tone amplitude must be in (0, 1]");
    }
    InputModel m;
    m.kind_ = InputKind::SingleTone;
    m.tone_ = params;
    return m;
}

InputModel InputModel::trace(std::vector<Codeword> samples) {
    if (samples.empty()) throw Error(ErrorCode::EmptySequence, "trace has no samples");
    InputModel m;
    m.kind_ = InputKind::Trace;
    m.samples_ = std::move(samples);
    return m;
}

std::vector<Codeword> InputModel::tone_sequence(int n_bits, std::size_t length, double phase) const {
    const double mid = static_cast<double>((Codeword{1} << n_bits) - 1) / 2.0;
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(tone_.bin) / static_cast<double>(tone_.period);
    const auto top = (Codeword{1} << n_bits) - 1;
    std::vector<Codeword> out(length);
    for (std::size_t m = 0; m < length; ++m) {
        const double v = mid + tone_.amplitude * mid * std::sin(omega * static_cast<double>(m) + phase);
        out[m] = std::clamp<Codeword>(static_cast<Codeword>(std::llround(v)), 0, top);
    }
    return out;
}

std::vector<Codeword> InputModel::generate(int n_bits, std::size_t length, std::mt19937_64& rng) const {
    switch (kind_) {
        case InputKind::UniformIid: {
            std::uniform_int_distribution<Codeword> pick(0, (Codeword{1} << n_bits) - 1);
            std::vector<Codeword> out(length);
            for (auto& x : out) x = pick(rng);
            return out;
        }
        case InputKind::SingleTone: {
            double phase = 0.0;
            if (tone_.random_phase) {
                phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
            }
            return tone_sequence(n_bits, length, phase);
        }
        case InputKind::Trace: {
            std::vector<Codeword> out(length);
            for (std::size_t m = 0; m < length; ++m) out[m] = samples_[m % samples_.size()];
            return out;
        }
    }
    return {};
}

TransitionModel InputModel::transitions(int n_bits) const {
    check_bits(n_bits);
    const auto n = static_cast<std::size_t>(Codeword{1} << n_bits);
    TransitionModel t;
    t.n_bits = n_bits;
    if (kind_ == InputKind::UniformIid) {
        t.independent = true;
        t.marginal.assign(n, 1.0 / static_cast<double>(n));
        return t;
    }
    if (n_bits > 12) {
        throw Error(ErrorCode::InvalidArgument, "empirical transition matrix limited to n_bits <= 12");
    }
    const std::vector<Codeword> seq = kind_ == InputKind::SingleTone ? tone_sequence(n_bits, tone_.period, 0.0)
                                                                      : samples_;
    for (auto x : seq) {
        if (x < 0 || static_cast<std::size_t>(x) >= n) {
            throw Error(ErrorCode::InputOutOfRange, "codeword " + std::to_string(x) + " outside [0, " +
                                                        std::to_string(n - 1) + "]");
        }
    }
    t.independent = false;
    t.joint.assign(n * n, 0.0);
    t.marginal.assign(n, 0.0);
    const double w = 1.0 / static_cast<double>(seq.size());
    for (std::size_t m = 0; m < seq.size(); ++m) {
        const auto x = static_cast<std::size_t>(seq[m]);
        const auto y = static_cast<std::size_t>(seq[(m + 1) % seq.size()]);
        t.joint[x * n + y] += w;
        t.marginal[x] += w;
    }
    return t;
}

std::string InputModel::name() const {
    switch (kind_) {
        case InputKind::UniformIid: return "uniform-iid";
        case InputKind::SingleTone:
            return "single-tone(bin=" + std::to_string(tone_.bin) + ",period=" + std::to_string(tone_.period) + ")";
        case InputKind::Trace: return "trace(" + std::to_string(samples_.size()) + " samples)";
    }
    return "unknown";
}

const char* to_string(InputKind kind) noexcept {
    switch (kind) {
        case InputKind::UniformIid: return "uniform-iid";
        case InputKind::SingleTone: return "single-tone";
        case InputKind::Trace: return "trace";
    }
    return "unknown";
}

}  // namespace tedac
