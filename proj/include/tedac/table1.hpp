#pragma once

// Published timing-error optimized bases for an 8-bit DAC, L = 9..14. Vendored
// as golden data so figure reproduction never depends on re-running the
// annealer.

#include <array>
#include <cstddef>
#include <vector>

#include "tedac/core.hpp"

namespace tedac {

constexpr std::size_t kTable1MinLength = 9;
constexpr std::size_t kTable1MaxLength = 14;

inline const std::vector<std::vector<Weight>>& table1_weights() {
    static const std::vector<std::vector<Weight>> rows = {
        {1, 2, 4, 8, 16, 31, 43, 69, 81},
        {1, 2, 4, 8, 16, 21, 31, 39, 62, 71},
        {1, 2, 4, 8, 13, 18, 26, 30, 38, 54, 61},
        {1, 2, 4, 8, 11, 16, 20, 25, 27, 35, 48, 58},
        {1, 2, 4, 8, 14, 16, 18, 21, 25, 27, 30, 33, 56},
        {1, 2, 4, 8, 12, 13, 14, 15, 18, 21, 26, 31, 35, 55},
    };
    return rows;
}

// Throws InvalidArgument for L outside 9..14.
inline Basis table1_basis(std::size_t L) {
    if (L < kTable1MinLength || L > kTable1MaxLength) {
        throw Error(ErrorCode::InvalidArgument, "optimized 8-bit bases exist for L = 9..14, got " + std::to_string(L));
    }
    return make_basis(table1_weights()[L - kTable1MinLength], 8);
}

}  // namespace tedac
