#include "tedac/error.hpp"

namespace tedac {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::EmptyBasis: return "EmptyBasis";
        case ErrorCode::WeightOutOfRange: return "WeightOutOfRange";
        case ErrorCode::InvalidSegmentation: return "InvalidSegmentation";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DegenerateSigma: return "DegenerateSigma";
        case ErrorCode::SInapplicable: return "SInapplicable";
        case ErrorCode::IncompleteBasis: return "IncompleteBasis";
        case ErrorCode::NoRepresentation: return "NoRepresentation";
        case ErrorCode::EmptySequence: return "EmptySequence";
        case ErrorCode::InitMismatch: return "InitMismatch";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::InputOutOfRange: return "InputOutOfRange";
        case ErrorCode::InfeasibleDimensions: return "InfeasibleDimensions";
        case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

namespace {

std::string describe(const std::vector<std::int64_t>& codewords, std::size_t sweeps) {
    std::string s = "memoryless LUT did not settle after " + std::to_string(sweeps) +
                    " sweeps; oscillating codewords:";
    for (auto x : codewords) s += " " + std::to_string(x);
    return s;
}

}  // namespace

NonConvergenceError::NonConvergenceError(std::vector<std::int64_t> codewords, std::size_t sweeps)
    : Error(ErrorCode::NonConvergence, describe(codewords, sweeps)), codewords_(std::move(codewords)) {}

}  // namespace tedac
