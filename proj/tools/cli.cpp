#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "tedac/decoder.hpp"
#include "tedac/io.hpp"
#include "tedac/metric.hpp"
#include "tedac/random.hpp"
#include "tedac/search.hpp"
#include "tedac/table1.hpp"
#include "tedac/waveform.hpp"

namespace tedac::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ParseError, what); }

[[noreturn]] void invariant(const std::string& what) { throw Error(ErrorCode::InvariantViolation, what); }

template <class T>
T field(const json& j, const std::string& key, const T& fallback, const std::string& where) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("config field '" + where + key + "' has the wrong type");
    }
}

template <class T>
T required(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) config_error("config field '" + where + key + "' is required");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("config field '" + where + key + "' has the wrong type");
    }
}

const json& section(const json& cfg, const std::string& key) {
    static const json empty = json::object();
    if (!cfg.contains(key)) return empty;
    if (!cfg.at(key).is_object()) config_error("config field '" + key + "' must be an object");
    return cfg.at(key);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Everything a command needs besides its own section of the config.
struct Context {
    json config;
    std::string command;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string output_override;
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;

    json provenance() const {
        return json{{"tool", kToolName},
                    {"version", TEDAC_VERSION},
                    {"command", command},
                    {"config_hash", config_hash(config)},
                    {"seed", seed}};
    }

    std::string provenance_comment() const {
        return std::string("# tool=") + kToolName + " version=" + TEDAC_VERSION + " command=" + command +
               " config_hash=" + config_hash(config) + " seed=" + std::to_string(seed) + "\n";
    }

    void emit(const std::string& path, const std::string& text) const {
        if (path.empty() || path == "-") {
            *out << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) config_error("cannot write output file '" + path + "'");
        f << text;
    }

    // The main output: --output, else config output.path, else stdout.
    std::string main_path() const {
        if (!output_override.empty()) return output_override;
        return field<std::string>(section(config, "output"), "path", "", "output.");
    }
};

Basis basis_from_config(const json& entry, const std::string& where) {
    if (!entry.is_object()) config_error("config field '" + where + "' must be an object");
    const auto source = field<std::string>(entry, "source", "inline", where + ".");
    if (source == "inline") return io::basis_from_json(entry);
    if (source == "file") return io::read_basis_file(required<std::string>(entry, "path", where + "."));
    if (source == "segmented") {
        return segmented_basis(required<int>(entry, "n_bits", where + "."), required<int>(entry, "n_thermo", where + "."));
    }
    if (source == "table1") return table1_basis(required<std::size_t>(entry, "L", where + "."));
    if (source == "binary") return binary_basis(required<int>(entry, "n_bits", where + "."));
    config_error("config field '" + where + ".source' must be inline, file, segmented, table1 or binary (got '" +
                 source + "')");
}

std::string architecture_of(const json& entry) {
    const auto source = field<std::string>(entry, "source", "inline", "");
    if (source == "segmented") return "segmented";
    if (source == "table1") return "optimized";
    if (source == "binary") return "binary";
    return field<std::string>(entry, "label", "custom", "");
}

InputModel input_from_config(const json& cfg, InputModel fallback) {
    if (!cfg.contains("input")) return fallback;
    const json& in = section(cfg, "input");
    const auto kind = required<std::string>(in, "kind", "input.");
    if (kind == "uniform-iid") return InputModel::uniform_iid();
    if (kind == "single-tone") {
        ToneParams p;
        p.bin = field<std::size_t>(in, "bin", p.bin, "input.");
        p.period = field<std::size_t>(in, "period", p.period, "input.");
        p.amplitude = field<double>(in, "amplitude", p.amplitude, "input.");
        p.random_phase = field<bool>(in, "random_phase", p.random_phase, "input.");
        return InputModel::single_tone(p);
    }
    if (kind == "trace") {
        if (in.contains("samples")) return InputModel::trace(required<std::vector<Codeword>>(in, "samples", "input."));
        return InputModel::trace(io::read_trace_file(required<std::string>(in, "path", "input.")));
    }
    config_error("config field 'input.kind' must be uniform-iid, single-tone or trace (got '" + kind + "')");
}

json input_to_json(const InputModel& m) {
    json j{{"kind", m.name()}};
    if (m.kind() == InputKind::SingleTone) {
        j["bin"] = m.tone().bin;
        j["period"] = m.tone().period;
        j["amplitude"] = m.tone().amplitude;
        j["random_phase"] = m.tone().random_phase;
    }
    if (m.kind() == InputKind::Trace) j["n_samples"] = m.samples().size();
    return j;
}

DecoderPolicy policy_from_config(const json& cfg, DecoderPolicy fallback) {
    if (!cfg.contains("policy")) return fallback;
    return parse_policy(required<std::string>(cfg, "policy", ""));
}

double sigma_from_config(const json& cfg) { return field<double>(cfg, "sigma_tau", 0.03, ""); }

MuCoefficients mu_for(const Context& ctx, std::size_t L) {
    const json& m = section(ctx.config, "mu");
    if (m.contains("path")) {
        std::ifstream f(required<std::string>(m, "path", "mu."));
        if (!f) config_error("cannot open mu file '" + m.at("path").get<std::string>() + "'");
        json j;
        try {
            j = json::parse(f);
        } catch (const json::parse_error& e) {
            config_error(std::string("mu file is not valid JSON: ") + e.what());
        }
        auto mu = io::mu_from_json(j);
        if (mu.L != L) {
            throw Error(ErrorCode::LengthMismatch, "mu file is for L = " + std::to_string(mu.L) + ", basis has L = " +
                                                       std::to_string(L));
        }
        return mu;
    }
    const auto draws = field<std::uint64_t>(m, "n_draws", 1'000'000, "mu.");
    const auto seed = field<std::uint64_t>(m, "seed", ctx.seed, "mu.");
    const bool truncate = field<bool>(m, "truncate", true, "mu.");
    return estimate_mu(L, sigma_from_config(ctx.config), draws, seed, truncate, ctx.workers);
}

SamplingBudget budget_from(const json& b, std::uint64_t seed, const std::string& where) {
    SamplingBudget out;
    out.exact_state_limit = field<std::size_t>(b, "exact_state_limit", out.exact_state_limit, where);
    out.chain_length = field<std::size_t>(b, "chain_length", out.chain_length, where);
    out.block_length = field<std::size_t>(b, "block_length", out.block_length, where);
    out.prune_k = field<std::size_t>(b, "prune_k", out.prune_k, where);
    out.seed = field<std::uint64_t>(b, "seed", seed, where);
    return out;
}

json mu_summary(const MuCoefficients& mu) {
    return json{{"convention", std::string(MuCoefficients::convention)},
                {"L", mu.L},
                {"sigma_tau", mu.sigma_tau},
                {"coeff_d", mu.coeff_d},
                {"coeff_s", mu.coeff_s},
                {"n_draws", mu.n_draws},
                {"seed", mu.seed}};
}

void check_decoded(const DecodedSequence& d, const Basis& basis) {
    for (std::size_t m = 0; m < d.reps.size(); ++m) {
        if (dac_value(d.reps[m], basis) != d.inputs[m]) {
            invariant("decoded representation at sample " + std::to_string(m) + " does not encode its codeword");
        }
    }
}

// --- metric -----------------------------------------------------------------

Representation pick_rep(const json& t, const std::string& key, const Basis& basis) {
    const std::string where = "transition." + key;
    if (t.contains(key + "_bits")) {
        const auto bits = required<std::string>(t, key + "_bits", "transition.");
        if (bits.size() != basis.size()) {
            throw Error(ErrorCode::LengthMismatch, "'" + where + "_bits' has " + std::to_string(bits.size()) +
                                                       " bits, basis has " + std::to_string(basis.size()));
        }
        std::vector<int> v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i) {
            const char c = bits[bits.size() - 1 - i];
            if (c != '0' && c != '1') config_error("config field '" + where + "_bits' must contain only 0 and 1");
            v[i] = c - '0';
        }
        return Representation::from_bits(v);
    }
    const auto x = required<Codeword>(t, key, "transition.");
    return enumerate_representations(basis, x).reps.front();
}

json metric_for_basis(const Context& ctx, const json& entry, const std::string& where, double thermometer) {
    const Basis basis = basis_from_config(entry, where);
    const auto mu = mu_for(ctx, basis.size());
    const auto policy = policy_from_config(ctx.config, DecoderPolicy::Viterbi);
    const auto input = input_from_config(ctx.config, InputModel::uniform_iid());
    const auto budget = budget_from(section(ctx.config, "budget"), ctx.seed, "budget.");
    const RepresentationTable table(basis, budget.prune_k);
    const auto est = evaluate_total_cost(table, policy, input, mu, budget);
    json r{{"basis", io::basis_to_json(basis)},
           {"architecture", architecture_of(entry)},
           {"policy", to_string(policy)},
           {"input", input_to_json(input)},
           {"total_cost", est.value},
           {"exact", est.exact},
           {"approximate", est.approximate},
           {"simulated_transitions", est.transitions},
           {"mu", mu_summary(mu)}};
    if (thermometer > 0.0) {
        r["thermometer_cost"] = thermometer;
        r["normalized"] = est.value / thermometer;
    }
    return r;
}

int cmd_metric(Context& ctx) {
    const json& cfg = ctx.config;
    json report{{"provenance", ctx.provenance()}};

    std::vector<std::pair<json, std::string>> entries;
    if (cfg.contains("bases")) {
        if (!cfg.at("bases").is_array() || cfg.at("bases").empty()) config_error("config field 'bases' must be a non-empty array");
        for (std::size_t i = 0; i < cfg.at("bases").size(); ++i) {
            entries.emplace_back(cfg.at("bases")[i], "bases[" + std::to_string(i) + "]");
        }
    } else {
        if (!cfg.contains("basis")) config_error("config field 'basis' (or 'bases') is required");
        entries.emplace_back(cfg.at("basis"), "basis");
    }

    if (cfg.contains("transition")) {
        const json& t = section(cfg, "transition");
        const Basis basis = basis_from_config(entries.front().first, entries.front().second);
        const auto mu = mu_for(ctx, basis.size());
        const auto from = pick_rep(t, "from", basis);
        const auto to = pick_rep(t, "to", basis);
        const auto draws = field<std::uint64_t>(t, "oracle_draws", 100000, "transition.");
        const auto oracle_seed = field<std::uint64_t>(t, "oracle_seed", substream_seed(ctx.seed, 1), "transition.");
        json tr{{"basis", io::basis_to_json(basis)},
                {"from_bits", from.to_string()},
                {"to_bits", to.to_string()},
                {"from", dac_value(from, basis)},
                {"to", dac_value(to, basis)},
                {"cost", transition_cost(from, to, basis, mu)},
                {"mu", mu_summary(mu)}};
        if (basis.size() >= 2) {
            const auto p = pair_stats(transition_vector(from, to), basis);
            tr["D"] = p.d;
            tr["S"] = p.s;
            tr["sum_sq"] = p.sum_sq;
            tr["delta"] = p.delta;
        }
        if (draws > 0) {
            const auto o = glitch_energy_oracle_stats(from, to, basis, mu.sigma_tau, draws, oracle_seed, ctx.workers);
            tr["oracle"] = {{"mean", o.mean}, {"std_error", o.std_error}, {"n_draws", o.n_draws}, {"seed", oracle_seed}};
        }
        report["transition"] = tr;
    }

    if (field<bool>(cfg, "total", !cfg.contains("transition"), "")) {
        double thermometer = 0.0;
        const json& norm = section(cfg, "normalize");
        if (field<bool>(norm, "enabled", true, "normalize.")) {
            const Basis first = basis_from_config(entries.front().first, entries.front().second);
            const int n_bits = first.n_bits();
            if (n_bits <= 12) {
                const std::size_t L = (std::size_t{1} << n_bits) - 1;
                const auto draws = field<std::uint64_t>(norm, "mu_draws", 200000, "normalize.");
                const auto tmu = estimate_mu(L, sigma_from_config(cfg), draws, substream_seed(ctx.seed, 2), true,
                                             ctx.workers);
                thermometer = thermometer_total_cost(n_bits, input_from_config(cfg, InputModel::uniform_iid()), tmu);
            }
        }
        json results = json::array();
        for (const auto& [entry, where] : entries) results.push_back(metric_for_basis(ctx, entry, where, thermometer));
        report["results"] = results;
    }
    ctx.emit(ctx.main_path(), report.dump(2) + "\n");
    return kSuccess;
}

// --- optimize ---------------------------------------------------------------

int cmd_optimize(Context& ctx) {
    const json& cfg = ctx.config;
    const int n_bits = required<int>(cfg, "n_bits", "");
    const auto L = required<std::size_t>(cfg, "L", "");
    const auto method = field<std::string>(cfg, "method", "sa", "");
    SearchObjective objective;
    objective.policy = policy_from_config(cfg, DecoderPolicy::Greedy);
    objective.input = input_from_config(cfg, InputModel::uniform_iid());
    objective.mu = mu_for(ctx, L);

    const json& sa = section(cfg, "sa");
    const auto constraint = parse_sum_constraint(field<std::string>(sa, "sum_constraint", "exact-fullscale", "sa."));

    SearchResult best;
    json restarts = json::array();
    if (method == "exhaustive") {
        ExhaustiveOptions opt;
        opt.max_candidates = field<double>(section(cfg, "exhaustive"), "max_candidates", opt.max_candidates, "exhaustive.");
        opt.sum_constraint = constraint;
        opt.budget = budget_from(section(cfg, "budget"), ctx.seed, "budget.");
        best = exhaustive_search(n_bits, L, objective, opt);
    } else if (method == "sa") {
        SaConfig base;
        base.n_iterations = field<std::size_t>(sa, "n_iterations", base.n_iterations, "sa.");
        base.initial_temperature = field<double>(sa, "initial_temperature", base.initial_temperature, "sa.");
        base.cooling_rate = field<double>(sa, "cooling_rate", base.cooling_rate, "sa.");
        base.moves_per_temperature = field<std::size_t>(sa, "moves_per_temperature", base.moves_per_temperature, "sa.");
        base.sum_constraint = constraint;
        base.objective_budget = budget_from(section(sa, "objective_budget"), ctx.seed, "sa.objective_budget.");
        base.final_budget = budget_from(section(sa, "final_budget"), ctx.seed, "sa.final_budget.");
        if (sa.contains("initial")) base.initial = basis_from_config(sa.at("initial"), "sa.initial");
        base.validate();

        const auto n_restarts = std::max<std::size_t>(1, field<std::size_t>(cfg, "restarts", 1, ""));
        std::vector<SearchResult> results(n_restarts);
        std::vector<std::uint64_t> seeds(n_restarts);
        for (std::size_t r = 0; r < n_restarts; ++r) seeds[r] = r == 0 ? ctx.seed : substream_seed(ctx.seed, r);
        for_each_block(n_restarts, ctx.workers, [&](std::size_t r) {
            SaConfig c = base;
            c.seed = seeds[r];
            results[r] = optimize_basis_sa(n_bits, L, c, objective);
        });
        std::size_t pick = 0;
        for (std::size_t r = 0; r < n_restarts; ++r) {
            restarts.push_back({{"seed", seeds[r]}, {"best_cost", results[r].best_cost},
                                {"weights", results[r].best_basis.weights()}});
            if (results[r].best_cost < results[pick].best_cost) pick = r;
        }
        best = std::move(results[pick]);
    } else {
        config_error("config field 'method' must be sa or exhaustive (got '" + method + "')");
    }

    if (!is_complete(best.best_basis)) invariant("search returned an incomplete basis");

    json baselines = json::object();
    {
        const auto bmu = L == static_cast<std::size_t>(n_bits) ? objective.mu
                                                                : estimate_mu(static_cast<std::size_t>(n_bits),
                                                                              objective.mu.sigma_tau,
                                                                              objective.mu.n_draws, objective.mu.seed,
                                                                              objective.mu.truncated, ctx.workers);
        baselines["binary"] = total_cost(binary_basis(n_bits), objective.policy, objective.input, bmu);
    }

    const json& output = section(cfg, "output");
    const auto stride = field<std::size_t>(output, "trace_stride", 1, "output.");
    json report{{"provenance", ctx.provenance()},
                {"config", cfg},
                {"method", method},
                {"policy", to_string(objective.policy)},
                {"mu", mu_summary(objective.mu)},
                {"result", io::search_result_to_json(best, stride)},
                {"baselines", baselines}};
    if (!restarts.empty()) report["restarts"] = restarts;
    ctx.emit(ctx.main_path(), report.dump(2) + "\n");

    const auto trace_path = field<std::string>(output, "trace", "", "output.");
    if (!trace_path.empty()) {
        std::ostringstream csv;
        csv << ctx.provenance_comment();
        io::write_trace_csv(csv, best);
        ctx.emit(trace_path, csv.str());
    }
    const auto basis_path = field<std::string>(output, "basis", "", "output.");
    if (!basis_path.empty()) io::write_basis_file(basis_path, best.best_basis);
    return kSuccess;
}

// --- decode -----------------------------------------------------------------

std::vector<Codeword> sequence_from_config(const Context& ctx, int n_bits) {
    const json& s = section(ctx.config, "sequence");
    if (s.contains("samples")) return required<std::vector<Codeword>>(s, "samples", "sequence.");
    if (s.contains("trace")) return io::read_trace_file(required<std::string>(s, "trace", "sequence."));
    if (s.contains("length")) {
        const auto input = input_from_config(ctx.config, InputModel::uniform_iid());
        auto rng = substream(ctx.seed, 3);
        return input.generate(n_bits, required<std::size_t>(s, "length", "sequence."), rng);
    }
    config_error("config field 'sequence' needs one of samples, trace or length");
}

MemorylessLut lut_for(const Context& ctx, const RepresentationTable& table, const MuCoefficients& mu) {
    const json& l = section(ctx.config, "lut");
    const Basis& basis = table.basis();
    if (l.contains("csv")) {
        std::ifstream f(required<std::string>(l, "csv", "lut."));
        if (!f) config_error("cannot open LUT file '" + l.at("csv").get<std::string>() + "'");
        return io::read_lut_csv(f, basis);
    }
    if (l.contains("binary")) {
        std::ifstream f(required<std::string>(l, "binary", "lut."), std::ios::binary);
        if (!f) config_error("cannot open LUT file '" + l.at("binary").get<std::string>() + "'");
        return io::read_lut_binary(f, basis);
    }
    LutOptions opt;
    opt.max_sweeps = field<std::size_t>(l, "max_sweeps", opt.max_sweeps, "lut.");
    const auto obj = field<std::string>(l, "objective", "both-directions", "lut.");
    if (obj == "doubled-forward") {
        opt.objective = LutObjective::DoubledForward;
    } else if (obj != "both-directions") {
        config_error("config field 'lut.objective' must be both-directions or doubled-forward");
    }
    return build_memoryless_lut(table, mu, input_from_config(ctx.config, InputModel::uniform_iid()), opt);
}

int cmd_decode(Context& ctx) {
    const json& cfg = ctx.config;
    if (!cfg.contains("basis")) config_error("config field 'basis' is required");
    const Basis basis = basis_from_config(cfg.at("basis"), "basis");
    const auto mu = mu_for(ctx, basis.size());
    const auto seq = sequence_from_config(ctx, basis.n_bits());
    const auto budget = budget_from(section(cfg, "budget"), ctx.seed, "budget.");
    const RepresentationTable table(basis, budget.prune_k);

    std::vector<DecoderPolicy> policies;
    if (cfg.contains("policies")) {
        for (const auto& p : required<std::vector<std::string>>(cfg, "policies", "")) policies.push_back(parse_policy(p));
    } else {
        policies.push_back(policy_from_config(cfg, DecoderPolicy::Viterbi));
    }

    std::optional<MemorylessLut> lut;
    json results = json::array();
    std::ostringstream reps_csv;
    reps_csv << ctx.provenance_comment() << "policy,sample,codeword,bits\n";
    std::optional<double> viterbi_cost;
    std::vector<std::pair<DecoderPolicy, double>> costs;
    for (auto policy : policies) {
        if (policy == DecoderPolicy::Memoryless && !lut) lut = lut_for(ctx, table, mu);
        const auto d = decode(policy, seq, table, mu, lut ? &*lut : nullptr);
        check_decoded(d, basis);
        const double transitions = seq.size() > 1 ? static_cast<double>(seq.size() - 1) : 1.0;
        results.push_back({{"policy", to_string(policy)},
                           {"total_cost", d.total_cost},
                           {"mean_cost_per_transition", d.total_cost / transitions},
                           {"edge_evaluations", d.edge_evaluations},
                           {"approximate", d.approximate}});
        if (policy == DecoderPolicy::Viterbi) viterbi_cost = d.total_cost;
        costs.emplace_back(policy, d.total_cost);
        for (std::size_t m = 0; m < d.reps.size(); ++m) {
            reps_csv << to_string(policy) << "," << m << "," << d.inputs[m] << "," << d.reps[m].to_string() << "\n";
        }
    }
    if (viterbi_cost && !table.approximate()) {
        for (const auto& [policy, c] : costs) {
            if (*viterbi_cost > c * (1.0 + 1e-12) + 1e-12) {
                invariant(std::string("Viterbi cost exceeds ") + to_string(policy) + " cost on the same sequence");
            }
        }
    }

    json report{{"provenance", ctx.provenance()},
                {"basis", io::basis_to_json(basis)},
                {"n_samples", seq.size()},
                {"mu", mu_summary(mu)},
                {"results", results}};
    if (lut) report["lut_sweeps"] = lut->sweeps;
    ctx.emit(ctx.main_path(), report.dump(2) + "\n");
    const auto reps_path = field<std::string>(section(cfg, "output"), "reps", "", "output.");
    if (!reps_path.empty()) ctx.emit(reps_path, reps_csv.str());
    return kSuccess;
}

// --- export-lut -------------------------------------------------------------

int cmd_export_lut(Context& ctx) {
    const json& cfg = ctx.config;
    if (!cfg.contains("basis")) config_error("config field 'basis' is required");
    const Basis basis = basis_from_config(cfg.at("basis"), "basis");
    const auto mu = mu_for(ctx, basis.size());
    const RepresentationTable table(basis);
    const auto lut = lut_for(ctx, table, mu);
    for (std::size_t x = 0; x < lut.table.size(); ++x) {
        if (dac_value(lut.table[x], basis) != static_cast<Codeword>(x)) {
            invariant("LUT entry " + std::to_string(x) + " does not encode its codeword");
        }
    }

    const json& output = section(cfg, "output");
    const auto csv_path = field<std::string>(output, "csv", "", "output.");
    const auto bin_path = field<std::string>(output, "binary", "", "output.");
    if (csv_path.empty() && bin_path.empty()) config_error("config needs 'output.csv' and/or 'output.binary'");

    json report{{"provenance", ctx.provenance()},
                {"basis", io::basis_to_json(basis)},
                {"sweeps", lut.sweeps},
                {"mu", mu_summary(mu)},
                {"input", input_to_json(input_from_config(cfg, InputModel::uniform_iid()))}};
    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << ctx.provenance_comment();
        io::write_lut_csv(csv, lut);
        ctx.emit(csv_path, csv.str());
        std::ifstream back(csv_path);
        if (io::read_lut_csv(back, basis).table != lut.table) invariant("LUT CSV did not round-trip");
        report["csv"] = csv_path;
    }
    if (!bin_path.empty()) {
        std::ostringstream bin(std::ios::binary);
        io::write_lut_binary(bin, lut);
        ctx.emit(bin_path, bin.str());
        std::ifstream back(bin_path, std::ios::binary);
        if (io::read_lut_binary(back, basis).table != lut.table) invariant("binary LUT did not round-trip");
        report["binary"] = bin_path;
        report["row_bytes"] = (basis.size() + 7) / 8;
    }
    report["round_trip"] = true;
    ctx.emit(ctx.main_path(), report.dump(2) + "\n");
    return kSuccess;
}

// --- simulate / reproduce ---------------------------------------------------

TransientModel transient_from_config(const json& cfg) {
    const json& t = section(cfg, "transient");
    const auto kind = field<std::string>(t, "kind", "exponential", "transient.");
    TransientModel m;
    if (kind == "ideal-step") {
        m = TransientModel::ideal_step();
    } else if (kind == "exponential") {
        m = TransientModel::exponential(field<double>(t, "time_constant", 0.05, "transient."));
    } else {
        config_error("config field 'transient.kind' must be ideal-step or exponential (got '" + kind + "')");
    }
    m.validate();
    return m;
}

SndrConfig sndr_from_config(const Context& ctx, DecoderPolicy policy) {
    const json& cfg = ctx.config;
    SndrConfig c;
    c.policy = policy;
    c.input = input_from_config(cfg, InputModel::single_tone({}));
    c.sigma_tau = sigma_from_config(cfg);
    c.transient = transient_from_config(cfg);
    c.n_realizations = field<std::size_t>(cfg, "n_realizations", c.n_realizations, "");
    c.n_samples = field<std::size_t>(cfg, "n_samples", c.n_samples, "");
    c.fresh_sequence = field<bool>(cfg, "fresh_sequence", c.fresh_sequence, "");
    c.seed = ctx.seed;
    c.workers = ctx.workers;
    return c;
}

int cmd_simulate(Context& ctx) {
    const json& cfg = ctx.config;
    if (!cfg.contains("basis")) config_error("config field 'basis' is required");
    const Basis basis = basis_from_config(cfg.at("basis"), "basis");
    const auto mu = mu_for(ctx, basis.size());
    const auto sc = sndr_from_config(ctx, policy_from_config(cfg, DecoderPolicy::Viterbi));
    const auto stats = monte_carlo_sndr(basis, mu, sc);
    if (stats.percentile_db.at(5.0) > stats.percentile_db.at(50.0)) invariant("SNDR percentiles are not ordered");

    const auto arch = architecture_of(cfg.at("basis"));
    std::ostringstream csv;
    csv << ctx.provenance_comment() << io::sndr_csv_header() << "\n"
        << io::sndr_csv_row(arch, basis.size(), to_string(sc.policy), sc.transient.name(), ctx.seed, stats) << "\n";

    const json& output = section(cfg, "output");
    const auto csv_path = field<std::string>(output, "csv", "", "output.");
    const auto json_path = field<std::string>(output, "json", "", "output.");
    const auto dump_path = field<std::string>(output, "per_realization", "", "output.");

    json report{{"provenance", ctx.provenance()},
                {"architecture", arch},
                {"basis", io::basis_to_json(basis)},
                {"policy", to_string(sc.policy)},
                {"input", input_to_json(sc.input)},
                {"transient", {{"kind", sc.transient.name()}, {"time_constant", sc.transient.time_constant}}},
                {"n_samples", sc.n_samples},
                {"fresh_sequence", sc.fresh_sequence},
                {"mu", mu_summary(mu)},
                {"sndr", io::sndr_to_json(stats)}};

    if (!json_path.empty()) ctx.emit(json_path, report.dump(2) + "\n");
    if (!dump_path.empty()) {
        std::ostringstream d;
        d << ctx.provenance_comment() << "realization,sndr_db\n";
        for (std::size_t r = 0; r < stats.per_realization_db.size(); ++r) {
            d << r << "," << format_double(stats.per_realization_db[r]) << "\n";
        }
        ctx.emit(dump_path, d.str());
    }
    const auto main = !ctx.output_override.empty() ? ctx.output_override : csv_path;
    if (!main.empty() || json_path.empty()) ctx.emit(main, csv.str());
    return kSuccess;
}

struct Architecture {
    std::string name;
    Basis basis;
    DecoderPolicy policy;
};

std::vector<Architecture> figure_runs() {
    std::vector<Architecture> runs;
    // Every policy reaches the same cost on a segmented basis; greedy is the cheap one.
    for (int k : {2, 3, 4}) runs.push_back({"segmented", segmented_basis(8, k), DecoderPolicy::Greedy});
    for (std::size_t L = kTable1MinLength; L <= kTable1MaxLength; ++L) {
        for (auto p : {DecoderPolicy::Viterbi, DecoderPolicy::Greedy, DecoderPolicy::Memoryless}) {
            runs.push_back({"optimized", table1_basis(L), p});
        }
    }
    return runs;
}

int cmd_reproduce(Context& ctx, const std::string& figure_flag) {
    json& cfg = ctx.config;
    const std::string figure = !figure_flag.empty() ? figure_flag : field<std::string>(cfg, "figure", "", "");
    if (figure != "fig2" && figure != "fig3" && figure != "fig4") {
        config_error("figure must be fig2, fig3 or fig4 (got '" + figure + "')");
    }
    const json& budget = section(cfg, "budget");
    const auto mu_draws = field<std::uint64_t>(budget, "mu_draws", 1'000'000, "budget.");
    const double sigma = sigma_from_config(cfg);

    std::ostringstream csv;
    csv << ctx.provenance_comment() << "# figure=" << figure << " sigma_tau=" << format_double(sigma)
        << " mu_draws=" << mu_draws << "\n";
    std::vector<std::string> warnings;
    if (mu_draws < 1'000'000) warnings.push_back("mu_draws below 1000000; closed-form coefficients carry Monte Carlo error");

    const auto runs = figure_runs();
    std::map<std::size_t, MuCoefficients> mus;
    auto mu_of = [&](std::size_t L) -> const MuCoefficients& {
        auto it = mus.find(L);
        if (it == mus.end()) it = mus.emplace(L, estimate_mu(L, sigma, mu_draws, substream_seed(ctx.seed, 1000 + L), true, ctx.workers)).first;
        return it->second;
    };

    std::ostringstream rows;
    if (figure == "fig2") {
        const auto input = input_from_config(cfg, InputModel::uniform_iid());
        SamplingBudget sb = budget_from(budget, ctx.seed, "budget.");
        if (sb.chain_length < 1'000'000) warnings.push_back("chain_length below 1000000; Viterbi and large greedy costs are simulated on a short chain");
        const auto therm_draws = field<std::uint64_t>(budget, "thermometer_mu_draws", 200000, "budget.");
        const auto tmu = estimate_mu(255, sigma, therm_draws, substream_seed(ctx.seed, 2), true, ctx.workers);
        const double thermometer = thermometer_total_cost(8, input, tmu);
        rows << "architecture,policy,L,total_cost,normalized_metric,exact\n";
        for (const auto& run : runs) {
            const auto& mu = mu_of(run.basis.size());
            const RepresentationTable table(run.basis);
            // Segmented bases: every policy coincides, and the LUT value is exact.
            const auto policy = run.name == "segmented" ? DecoderPolicy::Memoryless : run.policy;
            const auto est = evaluate_total_cost(table, policy, input, mu, sb);
            rows << run.name << "," << (run.name == "segmented" ? "any" : to_string(run.policy)) << ","
                 << run.basis.size() << "," << format_double(est.value) << "," << format_double(est.value / thermometer)
                 << "," << (est.exact ? 1 : 0) << "\n";
        }
        csv << "# thermometer_cost=" << format_double(thermometer) << " input=" << input.name() << "\n";
    } else {
        const auto n_real = field<std::size_t>(budget, "n_realizations", 500, "budget.");
        if (n_real < 10000) {
            warnings.push_back("n_realizations=" + std::to_string(n_real) +
                               " below 10000; read curves together with their confidence bands");
        }
        rows << io::sndr_csv_header() << "\n";
        std::size_t index = 0;
        std::map<std::string, std::pair<double, double>> previous;  // curve -> (mean_db, band)
        for (const auto& run : runs) {
            Context run_ctx = ctx;
            run_ctx.seed = substream_seed(ctx.seed, 2000 + index++);
            auto sc = sndr_from_config(run_ctx, run.policy);
            sc.n_realizations = n_real;
            sc.n_samples = field<std::size_t>(budget, "n_samples", sc.n_samples, "budget.");
            const auto stats = monte_carlo_sndr(run.basis, mu_of(run.basis.size()), sc);
            if (stats.percentile_db.at(5.0) > stats.mean_db + 1e-9 && figure == "fig4") {
                warnings.push_back("p5 above mean for " + run.name + " L=" + std::to_string(run.basis.size()));
            }
            // Two standard errors of the per-realization dB spread as a rough band.
            double sq = 0.0;
            double m = 0.0;
            for (double v : stats.per_realization_db) m += v;
            m /= static_cast<double>(stats.per_realization_db.size());
            for (double v : stats.per_realization_db) sq += (v - m) * (v - m);
            const double band = 2.0 * std::sqrt(sq / static_cast<double>(stats.per_realization_db.size())) /
                                std::sqrt(static_cast<double>(stats.per_realization_db.size()));
            const std::string curve = run.name + "/" + to_string(run.policy);
            if (run.name == "optimized" && previous.count(curve)) {
                const auto [prev_mean, prev_band] = previous[curve];
                if (stats.mean_db + band + prev_band < prev_mean) {
                    warnings.push_back(curve + " curve drops below its band at L=" + std::to_string(run.basis.size()));
                }
            }
            previous[curve] = {stats.mean_db, band};
            rows << io::sndr_csv_row(run.name, run.basis.size(), to_string(run.policy), sc.transient.name(),
                                     run_ctx.seed, stats)
                 << "\n";
        }
        const auto in = input_from_config(cfg, InputModel::single_tone({}));
        csv << "# input=" << in.name() << " transient=" << transient_from_config(cfg).name()
            << " time_constant=" << format_double(transient_from_config(cfg).time_constant)
            << " plot_column=" << (figure == "fig3" ? "mean_db" : "p5_db") << "\n";
    }
    for (const auto& w : warnings) {
        csv << "# warning: " << w << "\n";
        *ctx.err << "warning: " << w << "\n";
    }
    csv << rows.str();
    ctx.emit(ctx.main_path(), csv.str());
    return kSuccess;
}

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) config_error("cannot open config file '" + path + "'");
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        config_error("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

}  // namespace

int exit_code_for(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::InvalidArgument:
        case ErrorCode::EmptyBasis:
        case ErrorCode::WeightOutOfRange:
        case ErrorCode::InvalidSegmentation:
        case ErrorCode::LengthMismatch:
        case ErrorCode::InitMismatch:
            return kConfigError;
        case ErrorCode::DegenerateSigma:
        case ErrorCode::SInapplicable:
        case ErrorCode::IncompleteBasis:
        case ErrorCode::NoRepresentation:
        case ErrorCode::EmptySequence:
        case ErrorCode::NonConvergence:
        case ErrorCode::InputOutOfRange:
        case ErrorCode::InfeasibleDimensions:
        case ErrorCode::SearchSpaceTooLarge:
            return kInfeasible;
        case ErrorCode::InvariantViolation:
            return kInternalError;
    }
    return kInternalError;
}

std::string config_hash(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Timing-error optimized DAC weighting toolkit", kToolName};
    app.set_version_flag("--version", std::string(kToolName) + " " + TEDAC_VERSION);
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    std::string figure;
    int workers = 1;
    std::optional<std::uint64_t> seed;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"metric", "Transition cost, oracle check and total cost of bases"},
        {"optimize", "Search for a distortion-optimal basis"},
        {"decode", "Decode a codeword sequence with one or more policies"},
        {"export-lut", "Build a memoryless LUT and write CSV / binary files"},
        {"simulate", "Monte Carlo glitch SNDR of one architecture"},
        {"reproduce", "Regenerate the data behind a figure (fig2, fig3, fig4)"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        auto* cfg_opt = sub->add_option("-c,--config", config_path, "JSON config file");
        if (name != "reproduce") cfg_opt->required();
        sub->add_option("-o,--output", output, "Main output path (overrides output.path)");
        sub->add_option("-w,--workers", workers, "Parallel workers")->check(CLI::PositiveNumber);
        sub->add_option("-s,--seed", seed, "Root seed (overrides the config)");
        if (name == "reproduce") sub->add_option("figure", figure, "fig2, fig3 or fig4");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kConfigError;
    }

    Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    ctx.workers = workers;
    ctx.output_override = output;
    for (auto* sub : app.get_subcommands()) ctx.command = sub->get_name();

    try {
        ctx.config = config_path.empty() ? json::object() : load_config(config_path);
        if (!ctx.config.is_object()) config_error("config must be a JSON object");
        if (seed) ctx.config["seed"] = *seed;
        if (!ctx.config.contains("seed")) {
            config_error("config field 'seed' is required (seeds are mandatory so every run is reproducible)");
        }
        if (!ctx.config.at("seed").is_number_unsigned()) config_error("config field 'seed' must be a non-negative integer");
        ctx.seed = ctx.config.at("seed").get<std::uint64_t>();
        if (!figure.empty()) ctx.config["figure"] = figure;
        ctx.workers = field<int>(ctx.config, "workers", workers, "");
        if (workers != 1) ctx.workers = workers;
        ctx.config.erase("workers");

        if (ctx.command == "metric") return cmd_metric(ctx);
        if (ctx.command == "optimize") return cmd_optimize(ctx);
        if (ctx.command == "decode") return cmd_decode(ctx);
        if (ctx.command == "export-lut") return cmd_export_lut(ctx);
        if (ctx.command == "simulate") return cmd_simulate(ctx);
        if (ctx.command == "reproduce") return cmd_reproduce(ctx, figure);
        invariant("unknown command " + ctx.command);
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return kInfeasible;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace tedac::cli
