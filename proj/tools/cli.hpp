#pragma once

// Batch front end: one JSON config per run, six subcommands, provenance
// (tool version, config hash, seed) embedded in every output.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "tedac/error.hpp"

namespace tedac::cli {

constexpr const char* kToolName = "tedac";

enum ExitCode : int {
    kSuccess = 0,
    kConfigError = 1,
    kInfeasible = 2,
    kInternalError = 3,
};

int exit_code_for(ErrorCode code) noexcept;

// FNV-1a 64 of the canonical (sorted-key) dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tedac::cli
