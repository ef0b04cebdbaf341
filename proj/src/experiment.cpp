#include "dampchan/experiment.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "dampchan/errors.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/optics.hpp"
#include "dampchan/rng.hpp"
#include "dampchan/stats.hpp"
#include "dampchan/tomography.hpp"

namespace dampchan {

namespace {

// Random-stream identifiers; every (stream, grid index) pair is independent.
enum Stream : std::uint64_t {
  kInputCounts = 30,
  kTransmission = 31,
  kOutputCounts = 32,
  kTangleResample = 33,
  kProcessCounts = 34,
  kProcessResample = 35,
};

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::size_t index) {
  return seeded_engine(seed, stream, index)();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ExperimentRun start_run(const char* figure, const RunConfig& config) {
  config.validate();
  ExperimentRun run;
  run.figure = figure;
  run.config = config;
  run.version = software_version();
  return run;
}

PointResult base_point(const RunConfig& config, double beta) {
  const DampingParams p = params_for(config.channel_case, beta);
  PointResult r;
  r.alpha = p.alpha;
  r.beta = p.beta;
  r.psucc_analytic = analytic_success(p).success;
  return r;
}

bool is_full_amplitude_damping(const DampingParams& p) {
  return p.alpha == 0.0 && std::abs(p.beta - std::numbers::pi / 2.0) < 1e-9;
}

}  // namespace

int ExperimentRun::failure_count() const {
  int n = 0;
  for (const auto& p : points) n += p.failures + (p.error.empty() ? 0 : 1);
  return n;
}

std::string software_version() { return DAMPCHAN_VERSION; }

DensityMatrix source_state(double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) throw DomainError("source_state: visibility must lie in [0, 1]");
  const ComplexMatrix mixed = Mat4::Identity() / 4.0;
  return DensityMatrix(visibility * phi_plus_state().matrix() + (1.0 - visibility) * mixed);
}

DensityMatrix channel_input(const RunConfig& config) {
  if (config.input_model == InputModel::Ideal) return phi_plus_state();
  const DensityMatrix source = source_state(config.input_visibility);
  if (config.noiseless) return source;
  return mle_state(simulate_counts(source, config.flux, derive_seed(config.seed, kInputCounts, 0)), config.flux);
}

ExperimentRun run_psucc(const RunConfig& config) {
  const Stopwatch clock;
  ExperimentRun run = start_run("psucc", config);
  for (const double beta : config.beta_grid) run.points.push_back(base_point(config, beta));
  run.wall_clock_seconds = clock.seconds();
  return run;
}

ExperimentRun run_fig2(const RunConfig& config) {
  const Stopwatch clock;
  ExperimentRun run = start_run("fig2", config);
  const DensityMatrix rho_ab = channel_input(config);
  const DensityMatrix rho_a = partial_trace(rho_ab, Subsystem::B);
  run.input_state = Mat4(rho_ab.matrix());

  std::vector<DampingParams> grid;
  for (const double beta : config.beta_grid) grid.push_back(params_for(config.channel_case, beta));
  const std::vector<BandPoint> band = sensitivity_band(grid, config.perturbation, config.band_trials, rho_ab);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const DampingParams& p = grid[i];
    PointResult r = base_point(config, p.beta);
    r.band_psucc_mean = band[i].transmission_mean;
    r.band_psucc_std = band[i].transmission_std;
    r.band_tangle_mean = band[i].tangle_mean;
    r.band_tangle_std = band[i].tangle_std;

    if (config.noiseless) {
      r.psucc_sim = exact_transmission(implemented_operators(p), rho_a);
      r.psucc_sigma = 0.0;
    } else {
      const TransmissionEstimate est =
          simulate_transmission(p, rho_a, config.shots, std::nullopt, derive_seed(config.seed, kTransmission, i));
      r.psucc_sim = est.value;
      r.psucc_sigma = est.sigma;
    }

    const DensityMatrix out_true = apply_channel(damping_kraus(p), rho_ab, ApplyMode::AOnly);
    r.tangle_theory = tangle(out_true);
    const double out_flux = config.flux * r.psucc_analytic;
    try {
      if (config.noiseless) {
        r.tangle = tangle(mle_state(expected_counts(out_true, out_flux), out_flux));
        r.tangle_sigma = 0.0;
      } else {
        const auto counts = simulate_counts(out_true, out_flux, derive_seed(config.seed, kOutputCounts, i));
        r.tangle = tangle(mle_state(counts, out_flux));
        auto gen = seeded_engine(config.seed, kTangleResample, i);
        RunningStats spread;
        for (int t = 0; t < config.trials; ++t) {
          try {
            spread.add(tangle(mle_state(poisson_resample(counts, gen), out_flux)));
          } catch (const ReconstructionError&) {
            ++r.failures;
          }
        }
        r.tangle_sigma = spread.count() >= 2 ? spread.stddev() : kMissing;
      }
    } catch (const ReconstructionError& e) {
      r.error = e.what();
    } catch (const InvalidStateError& e) {
      r.error = e.what();
    }
    run.points.push_back(r);
  }
  run.wall_clock_seconds = clock.seconds();
  return run;
}

ExperimentRun run_fig3(const RunConfig& config) {
  const Stopwatch clock;
  ExperimentRun run = start_run("fig3", config);
  const bool ideal_input = config.input_model == InputModel::Ideal;
  const DensityMatrix true_input = ideal_input ? phi_plus_state() : source_state(config.input_visibility);

  for (std::size_t i = 0; i < config.beta_grid.size(); ++i) {
    const DampingParams p = params_for(config.channel_case, config.beta_grid[i]);
    PointResult r = base_point(config, p.beta);
    const KrausSet kraus = damping_kraus(p);
    const ProcessMatrix truth = chi_from_kraus(kraus);

    DatasetSpec spec;
    spec.flux = config.flux;
    spec.output_transmission = r.psucc_analytic;
    if (!config.noiseless) spec.seed = derive_seed(config.seed, kProcessCounts, i);
    const TomographyDataset dataset = synthesize_dataset(kraus, true_input, spec);

    const auto reconstruct = [&](const TomographyDataset& d) {
      ReconstructionResult rec = reconstruct_process(d, ideal_input);
      if (!rec.converged) {
        throw ReconstructionError("reconstruction did not converge (tp residual " + std::to_string(rec.tp_residual) +
                                  ")");
      }
      return rec;
    };
    const DatasetMetrics metrics = [&](const TomographyDataset& d) {
      const ReconstructionResult rec = reconstruct(d);
      return std::vector<double>{process_fidelity(rec.chi, truth), max_trace_distance(rec.chi, truth).distance};
    };

    try {
      const ReconstructionResult central = reconstruct(dataset);
      r.fidelity = process_fidelity(central.chi, truth);
      r.trace_distance = max_trace_distance(central.chi, truth).distance;
      if (is_full_amplitude_damping(p)) {
        run.chi_dump = ChiDump{p.alpha, p.beta, central.chi.matrix(), truth.matrix()};
      }
      if (config.noiseless) {
        r.fidelity_sigma = 0.0;
        r.trace_distance_sigma = 0.0;
      } else {
        const std::vector<ErrorBar> bars = monte_carlo_errorbars(dataset, metrics, 2, config.trials,
                                                                 derive_seed(config.seed, kProcessResample, i));
        r.fidelity_sigma = bars[0].stddev;
        r.trace_distance_sigma = bars[1].stddev;
        r.failures = bars[0].failures;
      }
    } catch (const ReconstructionError& e) {
      r.error = e.what();
    } catch (const InvalidStateError& e) {
      r.error = e.what();
    }
    run.points.push_back(r);
  }
  run.wall_clock_seconds = clock.seconds();
  return run;
}

}  // namespace dampchan
