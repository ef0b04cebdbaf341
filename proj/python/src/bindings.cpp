#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dampchan/channel.hpp"
#include "dampchan/experiment.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/optics.hpp"
#include "dampchan/report.hpp"
#include "dampchan/tomography.hpp"

namespace py = pybind11;
using namespace dampchan;

namespace {

KrausSet to_kraus(const std::vector<Mat2>& ops) { return KrausSet(ops); }

ExperimentRun run_named(const std::string& figure, const RunConfig& config) {
  if (figure == "fig2") return run_fig2(config);
  if (figure == "fig3") return run_fig3(config);
  if (figure == "psucc") return run_psucc(config);
  throw ConfigError("unknown figure '" + figure + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-parameter damping channel: linear-optical simulation and process tomography.";
  m.attr("__version__") = software_version();

  m.def("damping_kraus", [](double alpha, double beta) { return damping_kraus(make_damping_params(alpha, beta)).operators(); },
        py::arg("alpha"), py::arg("beta"));
  m.def(
      "analytic_success",
      [](double alpha, double beta) {
        const AnalyticSuccess a = analytic_success(make_damping_params(alpha, beta));
        return py::make_tuple(a.success, a.p_a0, a.p_a1);
      },
      py::arg("alpha"), py::arg("beta"), "(p_succ, p_A0, p_A1)");
  m.def("success_probability", [](const std::vector<Mat2>& ops) { return success_probability(ops); }, py::arg("ops"));
  m.def(
      "optimal_success_probability",
      [](const std::vector<Mat2>& ops, int restarts, std::uint64_t seed) {
        return optimal_success_probability(to_kraus(ops), restarts, seed).success;
      },
      py::arg("ops"), py::arg("restarts") = 32, py::arg("seed") = 1);
  m.def("chi_from_kraus", [](const std::vector<Mat2>& ops) { return Mat4(chi_from_kraus(to_kraus(ops)).matrix()); },
        py::arg("ops"));
  m.def("choi_state", [](const std::vector<Mat2>& ops) { return ComplexMatrix(choi_state(to_kraus(ops)).matrix()); },
        py::arg("ops"));
  m.def(
      "apply_channel",
      [](const std::vector<Mat2>& ops, const ComplexMatrix& rho) {
        const ApplyMode mode = rho.rows() == 2 ? ApplyMode::Single : ApplyMode::AOnly;
        return ComplexMatrix(apply_channel(to_kraus(ops), DensityMatrix(rho), mode).matrix());
      },
      py::arg("ops"), py::arg("rho"), "Acts on a qubit, or on qubit A of a two-qubit state.");

  m.def("conditional_operators", [](double alpha, double beta) { return implemented_operators(make_damping_params(alpha, beta)); },
        py::arg("alpha"), py::arg("beta"), "Heralded operators sqrt(p_i) M_i of the ideal optical setup.");
  m.def(
      "simulate_transmission",
      [](double alpha, double beta, std::uint64_t shots, std::uint64_t seed) {
        const TransmissionEstimate e = simulate_transmission(make_damping_params(alpha, beta),
                                                             DensityMatrix(ComplexMatrix(Mat2::Identity() / 2.0)), shots,
                                                             std::nullopt, seed);
        return py::make_tuple(e.value, e.sigma);
      },
      py::arg("alpha"), py::arg("beta"), py::arg("shots") = 1000000, py::arg("seed") = 1, "(value, binomial sigma)");

  m.def("tangle", [](const ComplexMatrix& rho) { return tangle(DensityMatrix(rho)); }, py::arg("rho"));
  m.def("concurrence", [](const ComplexMatrix& rho) { return concurrence(DensityMatrix(rho)); }, py::arg("rho"));
  m.def(
      "process_fidelity",
      [](const Mat4& a, const Mat4& b) { return process_fidelity(ProcessMatrix(a), ProcessMatrix(b)); },
      py::arg("chi_exp"), py::arg("chi_id"));
  m.def(
      "max_trace_distance",
      [](const Mat4& a, const Mat4& b) {
        const TraceDistanceResult r = max_trace_distance(ProcessMatrix(a), ProcessMatrix(b));
        return py::make_tuple(r.distance, Mat2(r.input));
      },
      py::arg("chi_exp"), py::arg("chi_id"), "(distance, maximizing input state)");

  m.def(
      "reconstruct_channel",
      [](double alpha, double beta, double flux, std::optional<std::uint64_t> seed, bool ideal_input) {
        const DampingParams p = make_damping_params(alpha, beta);
        const KrausSet k = damping_kraus(p);
        DatasetSpec spec;
        spec.flux = flux;
        spec.output_transmission = analytic_success(p).success;
        spec.seed = seed;
        const ReconstructionResult r = reconstruct_process(synthesize_dataset(k, phi_plus_state(), spec), ideal_input);
        const ProcessMatrix truth = chi_from_kraus(k);
        py::dict out;
        out["chi"] = Mat4(r.chi.matrix());
        out["fidelity"] = process_fidelity(r.chi, truth);
        out["trace_distance"] = max_trace_distance(r.chi, truth).distance;
        out["tp_residual"] = r.tp_residual;
        out["converged"] = r.converged;
        out["n_estimate"] = r.n_estimate;
        return out;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("flux") = 5e4, py::arg("seed") = py::none(),
      py::arg("ideal_input") = false,
      "Simulate both tomography blocks and reconstruct chi; seed None gives noiseless counts.");

  m.def(
      "run_figure",
      [](const std::string& figure, const std::string& config_text) {
        std::istringstream in(config_text);
        const ExperimentRun run = run_named(figure, parse_config(in));
        std::ostringstream csv;
        write_results_csv(csv, run);
        py::dict out;
        out["csv"] = csv.str();
        out["json"] = run_to_json(run);
        out["failures"] = run.failure_count();
        return out;
      },
      py::arg("figure"), py::arg("config") = "", "Run fig2, fig3 or psucc from key = value config text.");
}
