#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "tedac/decoder.hpp"
#include "tedac/metric.hpp"
#include "tedac/search.hpp"
#include "tedac/table1.hpp"
#include "tedac/waveform.hpp"

namespace py = pybind11;
using namespace tedac;

namespace {

InputModel input_model(const std::string& kind, std::size_t bin, std::size_t period, double amplitude,
                       const std::vector<Codeword>& samples) {
    if (kind == "uniform-iid") return InputModel::uniform_iid();
    if (kind == "single-tone") return InputModel::single_tone({bin, period, amplitude, true});
    if (kind == "trace") return InputModel::trace(samples);
    throw Error(ErrorCode::InvalidArgument, "input must be uniform-iid, single-tone or trace");
}

TransientModel transient(const std::string& kind, double time_constant) {
    if (kind == "ideal-step") return TransientModel::ideal_step();
    if (kind == "exponential") return TransientModel::exponential(time_constant);
    throw Error(ErrorCode::InvalidArgument, "transient must be ideal-step or exponential");
}

}  // namespace

PYBIND11_MODULE(_tedac, m) {
    m.doc() = "Timing-error optimized DAC weighting: metric, decoders, search and glitch simulation";
    m.attr("__version__") = TEDAC_VERSION;

    py::register_exception<Error>(m, "TedacError", PyExc_ValueError);

    py::class_<Basis>(m, "Basis")
        .def(py::init(&make_basis), py::arg("weights"), py::arg("n_bits"))
        .def_property_readonly("weights", &Basis::weights)
        .def_property_readonly("n_bits", &Basis::n_bits)
        .def("__len__", &Basis::size)
        .def("sum", &Basis::sum)
        .def(py::self == py::self)
        .def("__repr__", [](const Basis& b) {
            std::string s = "Basis([";
            for (std::size_t i = 0; i < b.size(); ++i) s += (i ? ", " : "") + std::to_string(b.weights()[i]);
            return s + "], n_bits=" + std::to_string(b.n_bits()) + ")";
        });

    py::class_<Representation>(m, "Representation")
        .def(py::init<std::uint64_t, std::size_t>(), py::arg("mask"), py::arg("width"))
        .def_property_readonly("mask", &Representation::mask)
        .def_property_readonly("bits", &Representation::bits)
        .def("__len__", &Representation::size)
        .def("__str__", &Representation::to_string)
        .def(py::self == py::self);

    py::class_<MuCoefficients>(m, "MuCoefficients")
        .def_readonly("L", &MuCoefficients::L)
        .def_readonly("sigma_tau", &MuCoefficients::sigma_tau)
        .def_readonly("mu", &MuCoefficients::mu)
        .def_readonly("coeff_d", &MuCoefficients::coeff_d)
        .def_readonly("coeff_s", &MuCoefficients::coeff_s)
        .def_readonly("n_draws", &MuCoefficients::n_draws)
        .def_readonly("seed", &MuCoefficients::seed);

    py::class_<DecodedSequence>(m, "DecodedSequence")
        .def_readonly("inputs", &DecodedSequence::inputs)
        .def_readonly("reps", &DecodedSequence::reps)
        .def_readonly("total_cost", &DecodedSequence::total_cost)
        .def_readonly("approximate", &DecodedSequence::approximate)
        .def_readonly("edge_evaluations", &DecodedSequence::edge_evaluations);

    py::class_<SearchResult>(m, "SearchResult")
        .def_readonly("best_basis", &SearchResult::best_basis)
        .def_readonly("best_cost", &SearchResult::best_cost)
        .def_readonly("best_iteration", &SearchResult::best_iteration)
        .def_readonly("candidates_evaluated", &SearchResult::candidates_evaluated);

    py::class_<SndrStats>(m, "SndrStats")
        .def_readonly("mean_db", &SndrStats::mean_db)
        .def_readonly("percentile_db", &SndrStats::percentile_db)
        .def_readonly("n_realizations", &SndrStats::n_realizations)
        .def_readonly("mean_error_power", &SndrStats::mean_error_power)
        .def_readonly("mean_signal_power", &SndrStats::mean_signal_power)
        .def_readonly("per_realization_db", &SndrStats::per_realization_db);

    m.def("binary_basis", &binary_basis, py::arg("n_bits"));
    m.def("segmented_basis", &segmented_basis, py::arg("n_bits"), py::arg("n_thermo"));
    m.def("table1_basis", &table1_basis, py::arg("L"));
    m.def("is_complete", &is_complete, py::arg("basis"));
    m.def("dac_value", &dac_value, py::arg("rep"), py::arg("basis"));
    m.def("representations",
          [](const Basis& b, Codeword x) { return enumerate_representations(b, x).reps; }, py::arg("basis"),
          py::arg("x"));

    m.def("estimate_mu", &estimate_mu, py::arg("L"), py::arg("sigma_tau"), py::arg("n_draws"), py::arg("seed"),
          py::arg("truncate") = true, py::arg("workers") = 1);
    m.def("transition_cost", &transition_cost, py::arg("from_rep"), py::arg("to_rep"), py::arg("basis"),
          py::arg("mu"));
    m.def(
        "glitch_energy_oracle",
        [](const Representation& a, const Representation& b, const Basis& basis, double sigma, std::uint64_t n,
           std::uint64_t seed, int workers) {
            const auto o = glitch_energy_oracle_stats(a, b, basis, sigma, n, seed, workers);
            return py::make_tuple(o.mean, o.std_error);
        },
        py::arg("from_rep"), py::arg("to_rep"), py::arg("basis"), py::arg("sigma_tau"), py::arg("n_draws"),
        py::arg("seed"), py::arg("workers") = 1);
    m.def(
        "total_cost",
        [](const Basis& basis, const std::string& policy, const MuCoefficients& mu, const std::string& input) {
            return total_cost(basis, parse_policy(policy), input_model(input, 43, 2048, 1.0, {}), mu);
        },
        py::arg("basis"), py::arg("policy"), py::arg("mu"), py::arg("input") = "uniform-iid");

    m.def(
        "decode",
        [](const std::vector<Codeword>& inputs, const Basis& basis, const MuCoefficients& mu, const std::string& policy) {
            const RepresentationTable table(basis);
            const auto p = parse_policy(policy);
            if (p == DecoderPolicy::Memoryless) {
                const auto lut = build_memoryless_lut(table, mu, InputModel::uniform_iid());
                return decode(p, inputs, table, mu, &lut);
            }
            return decode(p, inputs, table, mu);
        },
        py::arg("inputs"), py::arg("basis"), py::arg("mu"), py::arg("policy") = "viterbi");

    m.def(
        "optimize_basis",
        [](int n_bits, std::size_t L, const MuCoefficients& mu, std::uint64_t seed, std::size_t n_iterations,
           const std::string& policy) {
            SaConfig c;
            c.seed = seed;
            c.n_iterations = n_iterations;
            SearchObjective o;
            o.policy = parse_policy(policy);
            o.mu = mu;
            py::gil_scoped_release release;
            return optimize_basis_sa(n_bits, L, c, o);
        },
        py::arg("n_bits"), py::arg("L"), py::arg("mu"), py::arg("seed"), py::arg("n_iterations") = 2000,
        py::arg("policy") = "greedy");

    m.def(
        "simulate_sndr",
        [](const Basis& basis, const MuCoefficients& mu, const std::string& policy, std::size_t n_realizations,
           std::uint64_t seed, const std::string& transient_kind, double time_constant, std::size_t n_samples,
           double sigma_tau, int workers) {
            SndrConfig c;
            c.policy = parse_policy(policy);
            c.n_realizations = n_realizations;
            c.seed = seed;
            c.transient = transient(transient_kind, time_constant);
            c.n_samples = n_samples;
            c.sigma_tau = sigma_tau;
            c.workers = workers;
            py::gil_scoped_release release;
            return monte_carlo_sndr(basis, mu, c);
        },
        py::arg("basis"), py::arg("mu"), py::arg("policy"), py::arg("n_realizations"), py::arg("seed"),
        py::arg("transient") = "exponential", py::arg("time_constant") = 0.05, py::arg("n_samples") = 1024,
        py::arg("sigma_tau") = 0.03, py::arg("workers") = 1);
}
