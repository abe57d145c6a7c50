#include "tedac/decoder.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace tedac {

namespace {

void check_enumerable(const Basis& basis) {
    if (basis.size() > kMaxEnumerationWidth) {
        throw Error(ErrorCode::InvalidArgument, "representation enumeration limited to L <= " +
                                                    std::to_string(kMaxEnumerationWidth) + ", basis has L = " +
                                                    std::to_string(basis.size()));
    }
}

void check_range(const Basis& basis, Codeword x) {
    if (x < 0 || x > basis.full_scale()) {
        throw Error(ErrorCode::InputOutOfRange, "codeword " + std::to_string(x) + " outside [0, " +
                                                    std::to_string(basis.full_scale()) + "]");
    }
}

// Subset sums of weights[first, first + count), indexed by mask.
std::vector<Weight> subset_sums(const Basis& basis, std::size_t first, std::size_t count) {
    std::vector<Weight> sums(std::size_t{1} << count, 0);
    for (std::size_t m = 1; m < sums.size(); ++m) {
        const auto low = static_cast<std::size_t>(__builtin_ctzll(m));
        sums[m] = sums[m & (m - 1)] + basis.weights()[first + low];
    }
    return sums;
}

void check_sequence(std::span<const Codeword> inputs, const RepresentationTable& table) {
    for (std::size_t m = 0; m < inputs.size(); ++m) {
        const Codeword x = inputs[m];
        if (x < 0 || x > table.basis().full_scale()) {
            throw Error(ErrorCode::InputOutOfRange, "sample " + std::to_string(m) + ": codeword " +
                                                        std::to_string(x) + " outside [0, " +
                                                        std::to_string(table.basis().full_scale()) + "]");
        }
        if (table.count(x) == 0) {
            throw Error(ErrorCode::NoRepresentation,
                        "sample " + std::to_string(m) + ": codeword " + std::to_string(x) + " has no representation");
        }
    }
}

// Sum of kernel costs in sequence order; same arithmetic as transition_cost.
double path_cost(std::span<const Codeword> inputs, std::span<const std::uint64_t> masks, const CostKernel& cost) {
    double total = 0.0;
    for (std::size_t m = 1; m < masks.size(); ++m) total += cost(masks[m - 1], masks[m], inputs[m] - inputs[m - 1]);
    return total;
}

DecodedSequence finish(std::span<const Codeword> inputs, const std::vector<std::uint64_t>& masks, std::size_t width,
                       const CostKernel& cost) {
    DecodedSequence out;
    out.inputs.assign(inputs.begin(), inputs.end());
    out.reps.reserve(masks.size());
    for (auto mask : masks) out.reps.emplace_back(mask, width);
    out.total_cost = path_cost(inputs, masks, cost);
    return out;
}

}  // namespace

RepSet enumerate_representations(const Basis& basis, Codeword x) {
    check_enumerable(basis);
    check_range(basis, x);
    const std::size_t L = basis.size();
    const std::size_t n_low = L / 2;
    const std::size_t n_high = L - n_low;
    const auto low = subset_sums(basis, 0, n_low);
    const auto high = subset_sums(basis, n_low, n_high);

    // Low half sorted by (sum, mask) so each join is one equal_range.
    std::vector<std::pair<Weight, std::uint64_t>> by_sum(low.size());
    for (std::size_t m = 0; m < low.size(); ++m) by_sum[m] = {low[m], m};
    std::sort(by_sum.begin(), by_sum.end());

    RepSet out;
    out.value = x;
    for (std::size_t hm = 0; hm < high.size(); ++hm) {
        const Weight need = x - high[hm];
        if (need < 0) continue;
        auto [first, last] = std::equal_range(
            by_sum.begin(), by_sum.end(), std::pair<Weight, std::uint64_t>{need, 0},
            [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            out.reps.emplace_back((static_cast<std::uint64_t>(hm) << n_low) | it->second, L);
        }
    }
    if (out.reps.empty()) {
        throw Error(ErrorCode::NoRepresentation, "codeword " + std::to_string(x) + " has no representation");
    }
    return out;
}

RepresentationTable::RepresentationTable(const Basis& basis, std::size_t prune_k)
    : basis_(basis), prune_k_(prune_k) {
    check_enumerable(basis);
    const std::size_t L = basis.size();
    const std::size_t n_low = L / 2;
    const auto low = subset_sums(basis, 0, n_low);
    const auto high = subset_sums(basis, n_low, L - n_low);
    const Weight top = basis.full_scale();
    const auto n_codes = static_cast<std::size_t>(basis.codeword_count());

    std::vector<std::size_t> counts(n_codes, 0);
    for (auto hs : high) {
        if (hs > top) continue;
        for (auto ls : low) {
            if (hs + ls <= top) ++counts[static_cast<std::size_t>(hs + ls)];
        }
    }
    offsets_.assign(n_codes + 1, 0);
    for (std::size_t x = 0; x < n_codes; ++x) offsets_[x + 1] = offsets_[x] + counts[x];
    masks_.assign(offsets_.back(), 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    // High half is the major key, so each R(x) comes out in ascending mask order.
    for (std::size_t hm = 0; hm < high.size(); ++hm) {
        if (high[hm] > top) continue;
        for (std::size_t lm = 0; lm < low.size(); ++lm) {
            const Weight s = high[hm] + low[lm];
            if (s <= top) masks_[fill[static_cast<std::size_t>(s)]++] = (static_cast<std::uint64_t>(hm) << n_low) | lm;
        }
    }

    if (prune_k_ > 0) {
        std::vector<std::int64_t> square(L);
        for (std::size_t i = 0; i < L; ++i) square[i] = basis.weights()[i] * basis.weights()[i];
        auto energy = [&](std::uint64_t mask) {
            std::int64_t e = 0;
            for (std::size_t i = 0; i < L; ++i) {
                if ((mask >> i) & 1u) e += square[i];
            }
            return e;
        };
        std::vector<std::uint64_t> kept;
        std::vector<std::size_t> new_offsets(n_codes + 1, 0);
        for (std::size_t x = 0; x < n_codes; ++x) {
            std::vector<std::uint64_t> set(masks_.begin() + static_cast<std::ptrdiff_t>(offsets_[x]),
                                           masks_.begin() + static_cast<std::ptrdiff_t>(offsets_[x + 1]));
            if (set.size() > prune_k_) {
                pruned_ = true;
                std::stable_sort(set.begin(), set.end(),
                                 [&](std::uint64_t a, std::uint64_t b) { return energy(a) < energy(b); });
                set.resize(prune_k_);
                std::sort(set.begin(), set.end());
            }
            kept.insert(kept.end(), set.begin(), set.end());
            new_offsets[x + 1] = kept.size();
        }
        masks_ = std::move(kept);
        offsets_ = std::move(new_offsets);
    }

    complete_ = true;
    unique_ = true;
    for (std::size_t x = 0; x < n_codes; ++x) {
        const std::size_t c = offsets_[x + 1] - offsets_[x];
        complete_ = complete_ && c > 0;
        unique_ = unique_ && c == 1;
    }
}

RepSet RepresentationTable::rep_set(Codeword x) const {
    check_codeword(x);
    RepSet out;
    out.value = x;
    for (auto mask : masks(x)) out.reps.emplace_back(mask, width());
    return out;
}

void RepresentationTable::check_codeword(Codeword x) const {
    check_range(basis_, x);
    if (count(x) == 0) {
        throw Error(ErrorCode::NoRepresentation, "codeword " + std::to_string(x) + " has no representation");
    }
}

DecodedSequence decode_viterbi(std::span<const Codeword> inputs, const RepresentationTable& table,
                               const MuCoefficients& mu) {
    if (inputs.empty()) throw Error(ErrorCode::EmptySequence, "nothing to decode");
    check_sequence(inputs, table);
    const CostKernel cost(table.basis(), mu);
    const std::size_t M = inputs.size();

    // back[stage_offset[m] + j] = predecessor index of node j at stage m.
    std::vector<std::size_t> stage_offset(M + 1, 0);
    for (std::size_t m = 1; m < M; ++m) stage_offset[m + 1] = stage_offset[m] + table.count(inputs[m]);
    std::vector<std::uint32_t> back(stage_offset[M]);

    auto prev = table.masks(inputs[0]);
    std::vector<double> acc(prev.size(), 0.0);
    std::vector<double> next;
    std::uint64_t edges = 0;
    for (std::size_t m = 1; m < M; ++m) {
        const auto cur = table.masks(inputs[m]);
        const std::int64_t delta = inputs[m] - inputs[m - 1];
        next.assign(cur.size(), 0.0);
        std::uint32_t* bp = back.data() + stage_offset[m];
        for (std::size_t j = 0; j < cur.size(); ++j) {
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t arg = 0;
            for (std::size_t i = 0; i < prev.size(); ++i) {
                const double v = acc[i] + cost(prev[i], cur[j], delta);
                if (v < best) {
                    best = v;
                    arg = static_cast<std::uint32_t>(i);
                }
            }
            next[j] = best;
            bp[j] = arg;
        }
        edges += static_cast<std::uint64_t>(prev.size()) * cur.size();
        acc.swap(next);
        prev = cur;
    }

    std::size_t j = static_cast<std::size_t>(std::min_element(acc.begin(), acc.end()) - acc.begin());
    std::vector<std::uint64_t> path(M);
    for (std::size_t m = M; m-- > 0;) {
        path[m] = table.masks(inputs[m])[j];
        if (m > 0) j = back[stage_offset[m] + j];
    }
    auto out = finish(inputs, path, table.width(), cost);
    out.approximate = table.approximate();
    out.edge_evaluations = edges;
    return out;
}

DecodedSequence decode_viterbi(std::span<const Codeword> inputs, const Basis& basis, const MuCoefficients& mu) {
    return decode_viterbi(inputs, RepresentationTable(basis), mu);
}

DecodedSequence decode_greedy(std::span<const Codeword> inputs, const RepresentationTable& table,
                              const MuCoefficients& mu, std::optional<Representation> init) {
    if (inputs.empty()) throw Error(ErrorCode::EmptySequence, "nothing to decode");
    check_sequence(inputs, table);
    const CostKernel cost(table.basis(), mu);
    std::vector<std::uint64_t> path(inputs.size());
    if (init) {
        if (init->size() != table.width() || dac_value(*init, table.basis()) != inputs[0]) {
            throw Error(ErrorCode::InitMismatch,
                        "initial representation " + init->to_string() + " does not encode " + std::to_string(inputs[0]));
        }
        path[0] = init->mask();
    } else {
        path[0] = table.masks(inputs[0])[0];
    }
    std::uint64_t edges = 0;
    for (std::size_t m = 1; m < inputs.size(); ++m) {
        const auto cur = table.masks(inputs[m]);
        const std::int64_t delta = inputs[m] - inputs[m - 1];
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t pick = cur[0];
        for (auto mask : cur) {
            const double v = cost(path[m - 1], mask, delta);
            if (v < best) {
                best = v;
                pick = mask;
            }
        }
        edges += cur.size();
        path[m] = pick;
    }
    auto out = finish(inputs, path, table.width(), cost);
    out.approximate = table.approximate();
    out.edge_evaluations = edges;
    return out;
}

DecodedSequence decode_greedy(std::span<const Codeword> inputs, const Basis& basis, const MuCoefficients& mu,
                              std::optional<Representation> init) {
    return decode_greedy(inputs, RepresentationTable(basis), mu, std::move(init));
}

MemorylessLut build_memoryless_lut(const RepresentationTable& table, const MuCoefficients& mu,
                                   const InputModel& input, const LutOptions& options) {
    if (!table.complete()) {
        throw Error(ErrorCode::IncompleteBasis, "memoryless LUT needs a representation for every codeword");
    }
    const Basis& basis = table.basis();
    const CostKernel cost(basis, mu);
    const auto n_codes = static_cast<std::size_t>(basis.codeword_count());
    const auto marginal = input.transitions(basis.n_bits()).marginal;

    std::vector<Codeword> support;
    for (std::size_t z = 0; z < n_codes; ++z) {
        if (marginal[z] > 0.0) support.push_back(static_cast<Codeword>(z));
    }

    std::vector<std::uint64_t> entry(n_codes);
    for (std::size_t x = 0; x < n_codes; ++x) {
        const auto set = table.masks(static_cast<Codeword>(x));
        std::uint64_t best = set[0];
        std::int64_t best_energy = cost.sum_sq(best);
        for (auto mask : set) {
            const std::int64_t e = cost.sum_sq(mask);
            if (e < best_energy) {
                best_energy = e;
                best = mask;
            }
        }
        entry[x] = best;
    }

    std::vector<Codeword> changed;
    for (std::size_t sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        changed.clear();
        for (std::size_t xi = 0; xi < n_codes; ++xi) {
            const auto x = static_cast<Codeword>(xi);
            const auto set = table.masks(x);
            if (set.size() == 1) continue;
            double best = std::numeric_limits<double>::infinity();
            std::uint64_t pick = set[0];
            for (auto mask : set) {
                double objective = 0.0;
                for (auto z : support) {
                    const auto w = entry[static_cast<std::size_t>(z)];
                    const double p = marginal[static_cast<std::size_t>(z)];
                    if (options.objective == LutObjective::BothDirections) {
                        objective += p * cost(mask, w, z - x) + p * cost(w, mask, x - z);
                    } else {
                        objective += 2.0 * (p * cost(mask, w, z - x));
                    }
                }
                if (objective < best) {
                    best = objective;
                    pick = mask;
                }
            }
            if (pick != entry[xi]) {
                entry[xi] = pick;
                changed.push_back(x);
            }
        }
        if (changed.empty()) {
            MemorylessLut lut;
            lut.basis = basis;
            lut.sweeps = sweep;
            lut.approximate = table.approximate();
            lut.table.reserve(n_codes);
            for (auto mask : entry) lut.table.emplace_back(mask, table.width());
            return lut;
        }
    }
    throw NonConvergenceError(changed, options.max_sweeps);
}

MemorylessLut build_memoryless_lut(const Basis& basis, const MuCoefficients& mu, const InputModel& input,
                                   const LutOptions& options) {
    return build_memoryless_lut(RepresentationTable(basis), mu, input, options);
}

MemorylessLut canonical_lut(const RepresentationTable& table) {
    if (!table.complete()) {
        throw Error(ErrorCode::IncompleteBasis, "LUT needs a representation for every codeword");
    }
    MemorylessLut lut;
    lut.basis = table.basis();
    lut.approximate = table.approximate();
    const auto n_codes = static_cast<std::size_t>(table.basis().codeword_count());
    for (std::size_t x = 0; x < n_codes; ++x) lut.table.emplace_back(table.masks(static_cast<Codeword>(x))[0], table.width());
    return lut;
}

DecodedSequence decode_memoryless(std::span<const Codeword> inputs, const MemorylessLut& lut,
                                  const MuCoefficients& mu) {
    const CostKernel cost(lut.basis, mu);
    std::vector<std::uint64_t> path(inputs.size());
    for (std::size_t m = 0; m < inputs.size(); ++m) {
        const Codeword x = inputs[m];
        if (x < 0 || static_cast<std::size_t>(x) >= lut.table.size()) {
            throw Error(ErrorCode::InputOutOfRange, "sample " + std::to_string(m) + ": codeword " +
                                                        std::to_string(x) + " outside the LUT");
        }
        path[m] = lut.table[static_cast<std::size_t>(x)].mask();
    }
    auto out = finish(inputs, path, lut.basis.size(), cost);
    out.approximate = lut.approximate;
    out.edge_evaluations = inputs.size();
    return out;
}

DecodedSequence decode(DecoderPolicy policy, std::span<const Codeword> inputs, const RepresentationTable& table,
                       const MuCoefficients& mu, const MemorylessLut* lut) {
    switch (policy) {
        case DecoderPolicy::Viterbi: return decode_viterbi(inputs, table, mu);
        case DecoderPolicy::Greedy: return decode_greedy(inputs, table, mu);
        case DecoderPolicy::Memoryless:
            if (lut == nullptr) throw Error(ErrorCode::InvalidArgument, "memoryless decoding needs a LUT");
            return decode_memoryless(inputs, *lut, mu);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown policy");
}

}  // namespace tedac
