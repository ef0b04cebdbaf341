#pragma once

// Figures of merit for reconstructed channels and states.

#include <cstdint>
#include <functional>
#include <vector>

#include "dampchan/channel.hpp"
#include "dampchan/qmath.hpp"
#include "dampchan/tomography.hpp"

namespace dampchan {

// Tr sqrt(sqrt(a) b sqrt(a)) for PSD a, b (not squared).
double uhlmann_fidelity(const ComplexMatrix& a, const ComplexMatrix& b);

// Uhlmann fidelity of the unit-trace process matrices.
double process_fidelity(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_id);

// Pure single-qubit state at Bloch angles (theta, phi), shrunk to `radius`.
Mat2 bloch_state(double theta, double phi, double radius = 1.0);

// 1/2 || chi_a(rho) - chi_b(rho) ||_1 for a single-qubit input.
double trace_distance_at(const ProcessMatrix& chi_a, const ProcessMatrix& chi_b, const Mat2& rho_in);

struct TraceDistanceOptions {
  int theta_points = 64;   // including both poles
  int phi_points = 128;    // over [0, 2 pi)
  bool allow_mixed = false;  // also search the interior of the Bloch ball
  bool refine = true;        // simplex polish from the best grid point
};

struct TraceDistanceResult {
  double distance = 0.0;
  Mat2 input = Mat2::Zero();
  double theta = 0.0;
  double phi = 0.0;
  double radius = 1.0;
};

/// Largest output trace distance over single-qubit inputs. The objective is
/// convex in the input, so pure states suffice; allow_mixed searches the
/// whole ball as a check.
TraceDistanceResult max_trace_distance(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_id,
                                       const TraceDistanceOptions& opts = {});

// Wootters concurrence of a two-qubit state.
double concurrence(const DensityMatrix& rho);
// Squared concurrence.
double tangle(const DensityMatrix& rho);

struct ErrorBar {
  double mean = 0.0;
  double stddev = 0.0;
  int trials = 0;    // successful trials
  int failures = 0;  // trials whose pipeline threw
  std::uint64_t seed = 0;
};

using DatasetMetric = std::function<double(const TomographyDataset&)>;

/// Reruns `pipeline` on `trials` Poisson resamplings of every recorded count
/// (or on the recorded data itself when resample is false). Failed trials
/// are counted and excluded; fewer than two successes throws
/// ReconstructionError.
ErrorBar monte_carlo_errorbar(const TomographyDataset& recorded, const DatasetMetric& pipeline, int trials,
                              std::uint64_t seed, bool resample = true);

using DatasetMetrics = std::function<std::vector<double>(const TomographyDataset&)>;

// Several metrics from one reconstruction per trial; `count` metrics expected.
std::vector<ErrorBar> monte_carlo_errorbars(const TomographyDataset& recorded, const DatasetMetrics& pipeline,
                                            std::size_t count, int trials, std::uint64_t seed, bool resample = true);

}  // namespace dampchan
