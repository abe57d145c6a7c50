#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

#include "tedac/io.hpp"
#include "tedac/table1.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "tedac");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = tedac::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    auto dir = fs::temp_directory_path() / "tedac_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const std::string& name, const json& cfg) {
    const auto path = scratch_dir() / name;
    std::ofstream(path) << cfg.dump(2);
    return path.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("cli: config hash is stable and key-order independent") {
    const auto a = json::parse(R"({"seed": 1, "basis": {"source": "binary", "n_bits": 4}})");
    const auto b = json::parse(R"({"basis": {"n_bits": 4, "source": "binary"}, "seed": 1})");
    CHECK(tedac::cli::config_hash(a) == tedac::cli::config_hash(b));
    CHECK(tedac::cli::config_hash(a).size() == 16);
    CHECK(tedac::cli::config_hash(a) != tedac::cli::config_hash(json::parse(R"({"seed": 2})")));
}

TEST_CASE("cli: exit code mapping") {
    using tedac::ErrorCode;
    CHECK(tedac::cli::exit_code_for(ErrorCode::ParseError) == 1);
    CHECK(tedac::cli::exit_code_for(ErrorCode::WeightOutOfRange) == 1);
    CHECK(tedac::cli::exit_code_for(ErrorCode::IncompleteBasis) == 2);
    CHECK(tedac::cli::exit_code_for(ErrorCode::InputOutOfRange) == 2);
    CHECK(tedac::cli::exit_code_for(ErrorCode::SearchSpaceTooLarge) == 2);
    CHECK(tedac::cli::exit_code_for(ErrorCode::InvariantViolation) == 3);
}

TEST_CASE("cli: missing seed is a config error") {
    const auto cfg = write_config("noseed.json", {{"basis", {{"source", "binary"}, {"n_bits", 8}}}});
    const auto r = run_cli({"metric", "-c", cfg});
    CHECK(r.code == 1);
    CHECK(r.err.find("'seed'") != std::string::npos);
}

TEST_CASE("cli: unknown subcommand and missing config are config errors") {
    CHECK(run_cli({"frobnicate"}).code == 1);
    CHECK(run_cli({"metric"}).code == 1);
    CHECK(run_cli({"metric", "-c", (scratch_dir() / "does_not_exist.json").string()}).code == 1);
}

TEST_CASE("cli: malformed basis names the offending field") {
    const auto path = scratch_dir() / "bad_basis.json";
    std::ofstream(path) << R"({"n_bits": 8, "weights": [1, 2, -4]})";
    const auto cfg = write_config("bad_basis_cfg.json", {{"seed", 1},
                                                         {"basis", {{"source", "file"}, {"path", path.string()}}},
                                                         {"mu", {{"n_draws", 1000}}}});
    const auto r = run_cli({"metric", "-c", cfg});
    CHECK(r.code != 0);
    CHECK(r.err.find("weight[2]") != std::string::npos);

    const auto cfg2 = write_config("bad_source.json", {{"seed", 1}, {"basis", {{"source", "magic"}}}});
    const auto r2 = run_cli({"metric", "-c", cfg2});
    CHECK(r2.code == 1);
    CHECK(r2.err.find("basis.source") != std::string::npos);
}

TEST_CASE("cli: metric total cost for binary N=8 is deterministic") {
    const auto cfg = write_config("metric.json", {{"seed", 4},
                                                  {"basis", {{"source", "binary"}, {"n_bits", 8}}},
                                                  {"mu", {{"n_draws", 20000}}},
                                                  {"normalize", {{"mu_draws", 2000}}}});
    const auto a = run_cli({"metric", "-c", cfg});
    const auto b = run_cli({"metric", "-c", cfg, "-w", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const auto j = json::parse(a.out);
    CHECK(j["provenance"]["tool"] == "tedac");
    CHECK(j["provenance"]["seed"] == 4);
    CHECK(j["provenance"]["config_hash"].get<std::string>().size() == 16);
    CHECK(j["results"][0]["exact"] == true);
    CHECK(j["results"][0]["total_cost"].get<double>() > 0.0);
}

TEST_CASE("cli: metric ranks table1(9) below segmented(8,2)") {
    const auto cfg = write_config("metric_cmp.json",
                                  {{"seed", 2},
                                   {"policy", "greedy"},
                                   {"bases", json::array({{{"source", "segmented"}, {"n_bits", 8}, {"n_thermo", 2}},
                                                          {{"source", "table1"}, {"L", 9}}})},
                                   {"mu", {{"n_draws", 100000}}},
                                   {"normalize", {{"mu_draws", 5000}}}});
    const auto r = run_cli({"metric", "-c", cfg});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["results"][1]["normalized"].get<double>() < j["results"][0]["normalized"].get<double>());
}

TEST_CASE("cli: metric on a single transition reports D, S and the oracle") {
    const auto cfg = write_config("transition.json", {{"seed", 9},
                                                      {"basis", {{"source", "binary"}, {"n_bits", 4}}},
                                                      {"mu", {{"n_draws", 50000}}},
                                                      {"transition", {{"from", 7}, {"to", 8}, {"oracle_draws", 20000}}}});
    const auto r = run_cli({"metric", "-c", cfg});
    REQUIRE(r.code == 0);
    const auto t = json::parse(r.out)["transition"];
    CHECK(t["from_bits"] == "0111");
    CHECK(t["to_bits"] == "1000");
    CHECK(t["delta"] == 1);
    const double cost = t["cost"].get<double>();
    const double oracle = t["oracle"]["mean"].get<double>();
    CHECK(std::abs(cost - oracle) / oracle < 0.03);
    CHECK_FALSE(json::parse(r.out).contains("results"));
}

TEST_CASE("cli: optimize N=3 L=4 beats binary and writes a trace") {
    const auto trace = (scratch_dir() / "trace.csv").string();
    const auto cfg = write_config("opt.json", {{"seed", 5},
                                               {"n_bits", 3},
                                               {"L", 4},
                                               {"restarts", 2},
                                               {"mu", {{"n_draws", 50000}}},
                                               {"sa", {{"n_iterations", 400}}},
                                               {"output", {{"trace", trace}}}});
    const auto r = run_cli({"optimize", "-c", cfg});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["result"]["best_cost"].get<double>() < j["baselines"]["binary"].get<double>());
    const auto csv = slurp(trace);
    CHECK(csv.rfind("# tool=tedac", 0) == 0);
    CHECK(csv.find("iteration,temperature,current_cost,accepted") != std::string::npos);
    CHECK(run_cli({"optimize", "-c", cfg, "-w", "2"}).out == r.out);
}

TEST_CASE("cli: optimize exhaustive over a too-large space is infeasible") {
    const auto cfg = write_config("opt_big.json", {{"seed", 1},
                                                   {"n_bits", 8},
                                                   {"L", 9},
                                                   {"method", "exhaustive"},
                                                   {"mu", {{"n_draws", 1000}}}});
    CHECK(run_cli({"optimize", "-c", cfg}).code == 2);
}

TEST_CASE("cli: decode three policies on one trace keeps Viterbi dominant") {
    const auto trace = (scratch_dir() / "seq.txt").string();
    {
        std::ofstream f(trace);
        f << "# codewords\n";
        for (int m = 0; m < 300; ++m) f << (m * 97 + 13) % 256 << "\n";
    }
    const auto cfg = write_config("decode.json", {{"seed", 3},
                                                  {"basis", {{"source", "table1"}, {"L", 11}}},
                                                  {"policies", {"memoryless", "greedy", "viterbi"}},
                                                  {"mu", {{"n_draws", 50000}}},
                                                  {"sequence", {{"trace", trace}}}});
    const auto r = run_cli({"decode", "-c", cfg});
    REQUIRE(r.code == 0);
    const auto res = json::parse(r.out)["results"];
    REQUIRE(res.size() == 3);
    const double viterbi = res[2]["total_cost"].get<double>();
    CHECK(viterbi <= res[0]["total_cost"].get<double>());
    CHECK(viterbi <= res[1]["total_cost"].get<double>());
}

TEST_CASE("cli: out-of-range trace sample names its index") {
    const auto cfg = write_config("decode_oob.json", {{"seed", 3},
                                                      {"basis", {{"source", "binary"}, {"n_bits", 8}}},
                                                      {"mu", {{"n_draws", 1000}}},
                                                      {"sequence", {{"samples", {0, 12, 300, 4}}}}});
    const auto r = run_cli({"decode", "-c", cfg});
    CHECK(r.code == 2);
    CHECK(r.err.find("sample 2") != std::string::npos);
}

TEST_CASE("cli: export-lut then import is bit-identical") {
    const auto csv = (scratch_dir() / "lut.csv").string();
    const auto bin = (scratch_dir() / "lut.bin").string();
    const auto cfg = write_config("lut.json", {{"seed", 8},
                                               {"basis", {{"source", "table1"}, {"L", 10}}},
                                               {"mu", {{"n_draws", 50000}}},
                                               {"output", {{"csv", csv}, {"binary", bin}}}});
    const auto r = run_cli({"export-lut", "-c", cfg});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["round_trip"] == true);

    const auto basis = tedac::table1_basis(10);
    std::ifstream fc(csv);
    std::ifstream fb(bin, std::ios::binary);
    const auto from_csv = tedac::io::read_lut_csv(fc, basis);
    const auto from_bin = tedac::io::read_lut_binary(fb, basis);
    CHECK(from_csv.table == from_bin.table);

    // Decoding with the imported LUT gives the same cost as rebuilding it.
    json base = {{"seed", 8},
                 {"basis", {{"source", "table1"}, {"L", 10}}},
                 {"policy", "memoryless"},
                 {"mu", {{"n_draws", 50000}}},
                 {"sequence", {{"length", 200}}}};
    const auto built = run_cli({"decode", "-c", write_config("dl1.json", base)});
    base["lut"] = {{"binary", bin}};
    const auto imported = run_cli({"decode", "-c", write_config("dl2.json", base)});
    REQUIRE(built.code == 0);
    REQUIRE(imported.code == 0);
    CHECK(json::parse(built.out)["results"] == json::parse(imported.out)["results"]);
}

TEST_CASE("cli: simulate is byte-identical across reruns and worker counts") {
    const auto cfg = write_config("sim.json", {{"seed", 21},
                                               {"basis", {{"source", "segmented"}, {"n_bits", 8}, {"n_thermo", 2}}},
                                               {"policy", "greedy"},
                                               {"mu", {{"n_draws", 20000}}},
                                               {"n_realizations", 24},
                                               {"n_samples", 256}});
    const auto a = run_cli({"simulate", "-c", cfg});
    const auto b = run_cli({"simulate", "-c", cfg, "-w", "4"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("architecture,L,policy,sigma_tau,transient,mean_db,p5_db,p50_db,n_realizations,seed") !=
          std::string::npos);
    CHECK(a.out.find("\nsegmented,9,greedy,0.03,exponential,") != std::string::npos);
}

TEST_CASE("cli: simulate with zero sigma is degenerate") {
    const auto cfg = write_config("sim0.json", {{"seed", 21},
                                                {"basis", {{"source", "binary"}, {"n_bits", 4}}},
                                                {"sigma_tau", 0.0},
                                                {"n_realizations", 2}});
    CHECK(run_cli({"simulate", "-c", cfg}).code == 2);
}

TEST_CASE("cli: reproduce rejects unknown figures and annotates small budgets") {
    const auto cfg = write_config("rep.json", {{"seed", 1}});
    CHECK(run_cli({"reproduce", "fig9", "-c", cfg}).code == 1);

    const auto small = write_config("rep2.json", {{"seed", 1}, {"budget", {{"mu_draws", 20000}, {"chain_length", 5000},
                                                                           {"thermometer_mu_draws", 2000}}}});
    const auto r = run_cli({"reproduce", "fig2", "-c", small});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# warning:") != std::string::npos);
    CHECK(r.out.find("architecture,policy,L,total_cost,normalized_metric,exact") != std::string::npos);
    // 3 segmented rows + 6 lengths x 3 policies.
    std::size_t rows = 0;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) {
        if (line.rfind("segmented,", 0) == 0 || line.rfind("optimized,", 0) == 0) ++rows;
    }
    CHECK(rows == 21);
}
