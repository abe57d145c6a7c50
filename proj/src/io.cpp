#include "tedac/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tedac::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::int64_t parse_integer(const std::string& token, const std::string& field) {
    const std::string t = trim(token);
    if (t.empty()) parse_error("field '" + field + "' is empty");
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(t, &used);
    } catch (const std::exception&) {
        parse_error("field '" + field + "' is not an integer: '" + t + "'");
    }
    if (used != t.size()) parse_error("field '" + field + "' is not an integer: '" + t + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string extension(const std::string& path) {
    const auto dot = path.find_last_of('.');
    return dot == std::string::npos ? std::string{} : path.substr(dot + 1);
}

Representation parse_bits(const std::string& s, std::size_t width, const std::string& field) {
    if (s.size() != width) {
        parse_error("field '" + field + "' has " + std::to_string(s.size()) + " bits, expected " +
                    std::to_string(width));
    }
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < width; ++k) {
        const char c = s[width - 1 - k];
        if (c != '0' && c != '1') parse_error("field '" + field + "' contains '" + std::string(1, c) + "'");
        if (c == '1') mask |= std::uint64_t{1} << k;
    }
    return Representation(mask, width);
}

std::string to_hex(std::uint64_t mask, std::size_t width) {
    const std::size_t digits = std::max<std::size_t>(1, (width + 3) / 4);
    std::string s(digits, '0');
    static const char* hex = "0123456789abcdef";
    for (std::size_t k = 0; k < digits; ++k) s[digits - 1 - k] = hex[(mask >> (4 * k)) & 0xFu];
    return s;
}

MemorylessLut checked_lut(const Basis& basis, std::vector<Representation> table) {
    for (std::size_t x = 0; x < table.size(); ++x) {
        if (dac_value(table[x], basis) != static_cast<Codeword>(x)) {
            throw Error(ErrorCode::InputOutOfRange, "LUT row " + std::to_string(x) + " (" + table[x].to_string() +
                                                        ") does not encode its codeword");
        }
    }
    MemorylessLut lut;
    lut.basis = basis;
    lut.table = std::move(table);
    return lut;
}

}  // namespace

json basis_to_json(const Basis& basis) { return json{{"n_bits", basis.n_bits()}, {"weights", basis.weights()}}; }

Basis basis_from_json(const json& j) {
    if (!j.is_object()) parse_error("basis must be a JSON object");
    if (!j.contains("n_bits")) parse_error("field 'n_bits' is missing");
    if (!j.at("n_bits").is_number_integer()) parse_error("field 'n_bits' must be an integer");
    if (!j.contains("weights")) parse_error("field 'weights' is missing");
    const auto& w = j.at("weights");
    if (!w.is_array()) parse_error("field 'weights' must be an array");
    std::vector<Weight> weights;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!w[i].is_number_integer()) parse_error("field 'weights[" + std::to_string(i) + "]' must be an integer");
        weights.push_back(w[i].get<Weight>());
    }
    return make_basis(std::move(weights), j.at("n_bits").get<int>());
}

std::string basis_to_csv(const Basis& basis) {
    std::string s = std::to_string(basis.n_bits());
    for (auto w : basis.weights()) s += "," + std::to_string(w);
    return s;
}

Basis basis_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() < 2) parse_error("basis CSV needs 'n_bits,w0,...', got '" + line + "'");
        const int n_bits = static_cast<int>(parse_integer(fields[0], "n_bits"));
        std::vector<Weight> weights;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            weights.push_back(parse_integer(fields[i], "weights[" + std::to_string(i - 1) + "]"));
        }
        return make_basis(std::move(weights), n_bits);
    }
    parse_error("basis CSV is empty");
}

Basis read_basis_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open basis file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    if (extension(path) == "csv") return basis_from_csv(buf.str());
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        parse_error("basis file '" + path + "' is not valid JSON: " + e.what());
    }
    return basis_from_json(j);
}

void write_basis_file(const std::string& path, const Basis& basis) {
    std::ofstream out(path);
    if (!out) parse_error("cannot write '" + path + "'");
    if (extension(path) == "csv") {
        out << basis_to_csv(basis) << "\n";
    } else {
        out << basis_to_json(basis).dump(2) << "\n";
    }
}

json mu_to_json(const MuCoefficients& mu) {
    return json{{"convention", std::string(MuCoefficients::convention)},
                {"L", mu.L},
                {"sigma_tau", mu.sigma_tau},
                {"mu", mu.mu},
                {"spacing", mu.spacing},
                {"coeff_d", mu.coeff_d},
                {"coeff_s", mu.coeff_s},
                {"n_draws", mu.n_draws},
                {"seed", mu.seed},
                {"truncated", mu.truncated}};
}

MuCoefficients mu_from_json(const json& j) {
    try {
        if (j.at("convention").get<std::string>() != MuCoefficients::convention) {
            parse_error("mu convention '" + j.at("convention").get<std::string>() + "' is not supported");
        }
        MuCoefficients mu;
        mu.L = j.at("L").get<std::size_t>();
        mu.sigma_tau = j.at("sigma_tau").get<double>();
        mu.mu = j.at("mu").get<std::vector<double>>();
        mu.spacing = j.value("spacing", std::vector<double>{});
        mu.n_draws = j.at("n_draws").get<std::uint64_t>();
        mu.seed = j.at("seed").get<std::uint64_t>();
        mu.truncated = j.value("truncated", true);
        if (mu.mu.size() != mu.L) parse_error("field 'mu' must have L entries");
        mu.update_coefficients();
        return mu;
    } catch (const json::exception& e) {
        parse_error(std::string("mu JSON: ") + e.what());
    }
}

void write_lut_csv(std::ostream& out, const MemorylessLut& lut) {
    out << "codeword,bits,hex\n";
    for (std::size_t x = 0; x < lut.table.size(); ++x) {
        const auto& r = lut.table[x];
        out << x << "," << r.to_string() << "," << to_hex(r.mask(), r.size()) << "\n";
    }
}

MemorylessLut read_lut_csv(std::istream& in, const Basis& basis) {
    std::string line;
    while (std::getline(in, line) && (trim(line).empty() || trim(line)[0] == '#')) {
    }
    if (trim(line) != "codeword,bits,hex") {
        parse_error("LUT CSV must start with header 'codeword,bits,hex'");
    }
    const auto n = static_cast<std::size_t>(basis.codeword_count());
    std::vector<Representation> table;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) f.push_back(trim(tok));
        const std::string row = "row " + std::to_string(table.size());
        if (f.size() != 3) parse_error(row + ": expected 3 columns");
        if (parse_integer(f[0], row + " codeword") != static_cast<std::int64_t>(table.size())) {
            parse_error(row + ": codewords must be listed in order from 0");
        }
        auto rep = parse_bits(f[1], basis.size(), row + " bits");
        if (to_hex(rep.mask(), rep.size()) != f[2]) parse_error(row + ": hex column disagrees with bits");
        table.push_back(rep);
    }
    if (table.size() != n) {
        parse_error("LUT has " + std::to_string(table.size()) + " rows, expected " + std::to_string(n));
    }
    return checked_lut(basis, std::move(table));
}

void write_lut_binary(std::ostream& out, const MemorylessLut& lut) {
    const std::size_t row_bytes = (lut.basis.size() + 7) / 8;
    std::vector<char> row(row_bytes);
    for (const auto& r : lut.table) {
        for (std::size_t b = 0; b < row_bytes; ++b) row[b] = static_cast<char>((r.mask() >> (8 * b)) & 0xFFu);
        out.write(row.data(), static_cast<std::streamsize>(row_bytes));
    }
}

MemorylessLut read_lut_binary(std::istream& in, const Basis& basis) {
    const std::size_t row_bytes = (basis.size() + 7) / 8;
    const auto n = static_cast<std::size_t>(basis.codeword_count());
    std::vector<Representation> table;
    std::vector<unsigned char> row(row_bytes);
    for (std::size_t x = 0; x < n; ++x) {
        if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row_bytes))) {
            parse_error("binary LUT truncated at row " + std::to_string(x));
        }
        std::uint64_t mask = 0;
        for (std::size_t b = 0; b < row_bytes; ++b) mask |= static_cast<std::uint64_t>(row[b]) << (8 * b);
        if (basis.size() < 64 && (mask >> basis.size()) != 0) {
            parse_error("binary LUT row " + std::to_string(x) + " sets bits beyond L");
        }
        table.emplace_back(mask, basis.size());
    }
    if (in.peek() != std::char_traits<char>::eof()) parse_error("binary LUT has trailing bytes");
    return checked_lut(basis, std::move(table));
}

json search_result_to_json(const SearchResult& result, std::size_t trace_stride) {
    json trace = json::array();
    const std::size_t stride = std::max<std::size_t>(1, trace_stride);
    for (std::size_t k = 0; k < result.trace.size(); k += stride) {
        const auto& t = result.trace[k];
        trace.push_back(json::array({t.iteration, t.temperature, t.current_cost, t.accepted}));
    }
    return json{{"basis", basis_to_json(result.best_basis)},
                {"best_cost", result.best_cost},
                {"best_objective", result.best_objective},
                {"best_iteration", result.best_iteration},
                {"candidates_evaluated", result.candidates_evaluated},
                {"trace_stride", stride},
                {"trace", trace}};
}

void write_trace_csv(std::ostream& out, const SearchResult& result) {
    out << "iteration,temperature,current_cost,accepted\n";
    for (const auto& t : result.trace) {
        out << t.iteration << "," << format_double(t.temperature) << "," << format_double(t.current_cost) << ","
            << (t.accepted ? 1 : 0) << "\n";
    }
}

json sndr_to_json(const SndrStats& stats) {
    json p = json::object();
    for (const auto& [q, v] : stats.percentile_db) p["p" + format_double(q)] = v;
    return json{{"mean_db", stats.mean_db},
                {"percentile_db", p},
                {"n_realizations", stats.n_realizations},
                {"sigma_tau", stats.sigma_tau},
                {"mean_error_power", stats.mean_error_power},
                {"mean_signal_power", stats.mean_signal_power}};
}

std::string sndr_csv_header() {
    return "architecture,L,policy,sigma_tau,transient,mean_db,p5_db,p50_db,n_realizations,seed";
}

std::string sndr_csv_row(const std::string& architecture, std::size_t L, const std::string& policy,
                         const std::string& transient, std::uint64_t seed, const SndrStats& stats) {
    std::ostringstream s;
    s << architecture << "," << L << "," << policy << "," << format_double(stats.sigma_tau) << "," << transient << ","
      << format_double(stats.mean_db) << "," << format_double(stats.percentile_db.at(5.0)) << ","
      << format_double(stats.percentile_db.at(50.0)) << "," << stats.n_realizations << "," << seed;
    return s.str();
}

std::vector<Codeword> read_trace(std::istream& in) {
    std::vector<Codeword> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        for (auto& c : line) {
            if (c == ',' || c == ';' || c == '\t') c = ' ';
        }
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) out.push_back(parse_integer(tok, "line " + std::to_string(line_no)));
    }
    return out;
}

std::vector<Codeword> read_trace_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_error("cannot open trace file '" + path + "'");
    return read_trace(in);
}

}  // namespace tedac::io
