#pragma once

// Figure pipelines: success probability and tangle versus damping, and
// process fidelity / trace distance of the reconstructed channel.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dampchan/qmath.hpp"
#include "dampchan/run_config.hpp"

namespace dampchan {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// One grid point. Columns that a pipeline does not produce stay NaN.
struct PointResult {
  double alpha = 0.0;
  double beta = 0.0;
  double psucc_analytic = 0.0;
  double psucc_sim = kMissing;
  double psucc_sigma = kMissing;  // binomial standard error of the simulated transmission
  double tangle = kMissing;
  double tangle_sigma = kMissing;  // Monte-Carlo spread over Poisson resamplings
  double fidelity = kMissing;
  double fidelity_sigma = kMissing;
  double trace_distance = kMissing;
  double trace_distance_sigma = kMissing;

  // Theory and sensitivity band (perturbed-setup mean and spread).
  double tangle_theory = kMissing;
  double band_psucc_mean = kMissing;
  double band_psucc_std = kMissing;
  double band_tangle_mean = kMissing;
  double band_tangle_std = kMissing;

  int failures = 0;  // failed reconstructions at this point
  std::string error;  // set when the point could not be evaluated at all
};

struct ChiDump {
  double alpha = 0.0;
  double beta = 0.0;
  Mat4 reconstructed = Mat4::Zero();
  Mat4 ideal = Mat4::Zero();
};

struct ExperimentRun {
  std::string figure;  // fig2, fig3 or psucc
  RunConfig config;
  std::vector<PointResult> points;
  std::optional<Mat4> input_state;  // two-photon state the channel acted on (fig2)
  std::optional<ChiDump> chi_dump;  // reconstructed vs ideal chi at alpha = 0, beta = pi/2 (fig3)
  std::string version;
  double wall_clock_seconds = 0.0;

  int failure_count() const;
};

std::string software_version();

// Source state V |phi+><phi+| + (1 - V) I/4.
DensityMatrix source_state(double visibility);

// Input state the channel acts on: |phi+> for the ideal model; otherwise the
// maximum likelihood estimate of source_state(input_visibility) from a
// simulated tomography block (exact in noiseless mode).
DensityMatrix channel_input(const RunConfig& config);

// Analytic success probability only.
ExperimentRun run_psucc(const RunConfig& config);

// Simulated transmission with binomial error, sensitivity band, and the
// tangle of the channel output reconstructed from simulated counts.
ExperimentRun run_fig2(const RunConfig& config);

// Full tomography pipeline per point with Monte-Carlo error bars.
ExperimentRun run_fig3(const RunConfig& config);

}  // namespace dampchan
