// dampchan: figure pipelines and tomography from the command line.
//
//   dampchan fig2 --config run.cfg --out out/fig2
//   dampchan fig3 --noiseless --trials 20
//   dampchan synth --alpha 0 --beta 1.5707963 --out data.txt
//   dampchan tomo --data data.txt --alpha 0 --beta 1.5707963
//   dampchan psucc
//
// Exit status: 0 success, 1 configuration or input error, 2 reconstruction
// failures.

#include <CLI11/CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "dampchan/errors.hpp"
#include "dampchan/experiment.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/report.hpp"
#include "dampchan/tomography.hpp"

namespace {

using namespace dampchan;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitReconstruction = 2;

struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> trials;
  std::optional<std::string> channel_case;
  bool noiseless = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_path, "flat key = value configuration file");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--trials", f.trials, "Monte-Carlo trials per point");
  cmd->add_option("--case", f.channel_case, "amplitude_damping | bitflip | intermediate");
  cmd->add_flag("--noiseless", f.noiseless, "use exact expected counts");
}

RunConfig resolve(const RunFlags& f) {
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.trials) c.trials = *f.trials;
  if (f.channel_case) c.channel_case = parse_case(*f.channel_case);
  if (f.noiseless) c.noiseless = true;
  c.validate();
  return c;
}

int finish(const ExperimentRun& run) {
  const auto files = emit_outputs(run, run.config.output_dir);
  std::cout << summarize(run);
  for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
  if (run.failure_count() > 0) {
    std::cerr << "dampchan: " << run.failure_count() << " reconstruction failure(s)\n";
    for (const auto& p : run.points) {
      if (!p.error.empty()) std::cerr << "  beta=" << format_value(p.beta) << ": " << p.error << '\n';
    }
    return kExitReconstruction;
  }
  return kExitOk;
}

void print_matrix(const char* label, const Mat4& m) {
  std::cout << label << '\n';
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::printf(" %+.5f%+.5fi", m(r, c).real(), m(r, c).imag());
    }
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-parameter damping channel: simulation and process tomography"};
  app.set_version_flag("--version", software_version());
  app.require_subcommand(1);

  RunFlags fig2_flags, fig3_flags, psucc_flags;
  add_run_flags(app.add_subcommand("fig2", "success probability and tangle versus damping"), fig2_flags);
  add_run_flags(app.add_subcommand("fig3", "process fidelity and trace distance versus damping"), fig3_flags);
  add_run_flags(app.add_subcommand("psucc", "analytic success-probability table"), psucc_flags);

  std::string data_path;
  bool ideal_input = false;
  std::optional<double> alpha, beta;
  auto* tomo = app.add_subcommand("tomo", "reconstruct a process from a dataset file");
  tomo->add_option("--data", data_path, "dataset file")->required();
  tomo->add_flag("--ideal-input", ideal_input, "assume |phi+> instead of using the input block");
  tomo->add_option("--alpha", alpha, "reference channel alpha (radians)");
  tomo->add_option("--beta", beta, "reference channel beta (radians)");

  double synth_alpha = 0.0, synth_beta = 0.0, synth_flux = 5e4;
  std::uint64_t synth_seed = 1;
  bool synth_noiseless = false;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "write a simulated tomography dataset");
  synth->add_option("--alpha", synth_alpha, "alpha (radians)")->required();
  synth->add_option("--beta", synth_beta, "beta (radians)")->required();
  synth->add_option("--flux", synth_flux, "expected coincidences per setting");
  synth->add_option("--seed", synth_seed, "seed");
  synth->add_flag("--noiseless", synth_noiseless, "exact expected counts");
  synth->add_option("--out", synth_out, "dataset file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand("fig2")) return finish(run_fig2(resolve(fig2_flags)));
    if (app.got_subcommand("fig3")) return finish(run_fig3(resolve(fig3_flags)));
    if (app.got_subcommand("psucc")) return finish(run_psucc(resolve(psucc_flags)));

    if (app.got_subcommand("synth")) {
      const DampingParams p = make_damping_params(synth_alpha, synth_beta);
      DatasetSpec spec;
      spec.flux = synth_flux;
      spec.output_transmission = analytic_success(p).success;
      if (!synth_noiseless) spec.seed = synth_seed;
      std::ofstream out(synth_out);
      if (!out) throw OutputError("cannot write '" + synth_out + "'");
      write_dataset(out, synthesize_dataset(damping_kraus(p), phi_plus_state(), spec));
      std::cout << "wrote " << synth_out << '\n';
      return kExitOk;
    }

    std::ifstream in(data_path);
    if (!in) throw ConfigError("cannot open dataset '" + data_path + "'");
    const TomographyDataset dataset = read_dataset(in);
    const ReconstructionResult r = reconstruct_process(dataset, ideal_input);
    print_matrix("chi (real + imag)", r.chi.matrix());
    std::printf("objective %.6g  tp_residual %.3e  N %.6g  lambda %.6g  iterations %d\n", r.objective_value,
                r.tp_residual, r.n_estimate, r.lambda, r.iterations);
    if (alpha || beta) {
      const ProcessMatrix truth = chi_from_kraus(damping_kraus(make_damping_params(alpha.value_or(0.0), beta.value_or(0.0))));
      const TraceDistanceResult d = max_trace_distance(r.chi, truth);
      std::printf("fidelity %.8f  trace_distance %.3e\n", process_fidelity(r.chi, truth), d.distance);
    }
    if (!r.converged) {
      std::cerr << "dampchan: reconstruction did not converge\n";
      return kExitReconstruction;
    }
    return kExitOk;
  } catch (const ReconstructionError& e) {
    std::cerr << "dampchan: " << e.what() << '\n';
    return kExitReconstruction;
  } catch (const std::exception& e) {
    std::cerr << "dampchan: " << e.what() << '\n';
    return kExitConfig;
  }
}
