#pragma once

// File formats: basis JSON / one-line CSV, mu JSON, LUT CSV / raw binary,
// search results (JSON + trace CSV), SNDR results (JSON + CSV row), codeword
// traces.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "tedac/core.hpp"
#include "tedac/decoder.hpp"
#include "tedac/metric.hpp"
#include "tedac/search.hpp"
#include "tedac/waveform.hpp"

namespace tedac::io {

using nlohmann::json;

// {"n_bits": N, "weights": [...]}
json basis_to_json(const Basis& basis);
// Throws ParseError naming the offending field.
Basis basis_from_json(const json& j);

// "N,w0,w1,...,w(L-1)" on one line.
std::string basis_to_csv(const Basis& basis);
Basis basis_from_csv(const std::string& line);

// Dispatches on extension (.json or .csv).
Basis read_basis_file(const std::string& path);
void write_basis_file(const std::string& path, const Basis& basis);

json mu_to_json(const MuCoefficients& mu);
MuCoefficients mu_from_json(const json& j);

// Columns: codeword, bits (bit L-1 first), hex. Leading "#" lines are skipped on read.
void write_lut_csv(std::ostream& out, const MemorylessLut& lut);
// Throws ParseError / InputOutOfRange when an entry does not encode its codeword.
MemorylessLut read_lut_csv(std::istream& in, const Basis& basis);

// 2^N rows of ceil(L / 8) bytes; bit i of row x is table[x].bit(i), little-endian.
void write_lut_binary(std::ostream& out, const MemorylessLut& lut);
MemorylessLut read_lut_binary(std::istream& in, const Basis& basis);

json search_result_to_json(const SearchResult& result, std::size_t trace_stride = 1);
void write_trace_csv(std::ostream& out, const SearchResult& result);

json sndr_to_json(const SndrStats& stats);
std::string sndr_csv_header();
std::string sndr_csv_row(const std::string& architecture, std::size_t L, const std::string& policy,
                         const std::string& transient, std::uint64_t seed, const SndrStats& stats);

// Codewords separated by whitespace, commas or newlines; '#' starts a comment.
std::vector<Codeword> read_trace(std::istream& in);
std::vector<Codeword> read_trace_file(const std::string& path);

}  // namespace tedac::io
