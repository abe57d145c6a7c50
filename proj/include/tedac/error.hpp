#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace tedac {

enum class ErrorCode {
    EmptyBasis,
    WeightOutOfRange,
    InvalidSegmentation,
    LengthMismatch,
    DegenerateSigma,
    SInapplicable,
    IncompleteBasis,
    NoRepresentation,
    EmptySequence,
    InitMismatch,
    NonConvergence,
    InputOutOfRange,
    InfeasibleDimensions,
    SearchSpaceTooLarge,
    InvalidArgument,
    ParseError,
    InvariantViolation,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Raised by the memoryless LUT builder; carries the codewords still changing
// in the final sweep.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(std::vector<std::int64_t> codewords, std::size_t sweeps);

    const std::vector<std::int64_t>& codewords() const noexcept { return codewords_; }

private:
    std::vector<std::int64_t> codewords_;
};

}  // namespace tedac
