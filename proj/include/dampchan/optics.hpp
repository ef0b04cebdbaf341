#pragma once

// Jones-calculus model of the beam-displacer interferometer that realizes the
// damping channel probabilistically.
//
// Modes are path (upper, lower) x polarization (H, V). A photon enters the
// upper path; the heralded output is the upper path after the second beam
// displacer. Everything else is loss.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "dampchan/channel.hpp"
#include "dampchan/qmath.hpp"

namespace dampchan {

enum class Path { Upper = 0, Lower = 1 };

/// Amplitudes indexed 2*path + polarization. Postselection only removes
/// amplitude, so squared_norm() <= 1 along any ideal pipeline.
struct ModeState {
  Vec4 amplitudes = Vec4::Zero();

  static ModeState entering(const Vec2& polarization);
  Vec2 polarization_at(Path p) const;
  double squared_norm() const { return amplitudes.squaredNorm(); }
};

/// Fast-axis angles (radians) of the four half-wave plates as given by the
/// experiment's angle relations.
struct HwpAngles {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

enum class LcrSetting { Identity, PauliX };

struct LcrConfig {
  LcrSetting lcr1 = LcrSetting::PauliX;
  LcrSetting lcr2 = LcrSetting::Identity;
  // Fractional retardance error per retarder, 0 = ideal.
  std::array<double, 2> retardance_error{0.0, 0.0};
};

// (X, I) realizes A0, (I, X) realizes A1.
LcrConfig kraus_configuration(int which, std::array<double, 2> retardance_error = {0.0, 0.0});

/// Gaussian setup errors: HWP angle jitter in degrees, LCR retardance
/// as a fraction of pi.
struct SetupPerturbation {
  double hwp_sigma_deg = 1.0;
  double lcr_sigma = 0.01;
  std::uint64_t seed = 7;
};

/// Switching between the two LCR configurations, drawn i.i.d. per shot. The
/// rate is recorded for reference only.
struct SwitchingSchedule {
  double p_a0 = 1.0;
  double p_a1 = 0.0;
  double rate_hz = 10.0;
};
SwitchingSchedule make_schedule(const DampingParams& p);

// [[cos 2t, sin 2t], [sin 2t, -cos 2t]]
Mat2 hwp_jones(double theta);
// Retarder with fast axis at 45 degrees and retardance delta:
// ((1 + e^{i delta}) I + (1 - e^{i delta}) X) / 2, so delta = pi gives X.
Mat2 retarder_jones(double retardance);
// Identity setting has retardance pi*err, PauliX setting pi*(1 + err).
Mat2 lcr_jones(LcrSetting s, double retardance_error);

// Principal-branch solution of sin 4a = cos b/cos a, b = a - pi/4,
// sin 4c = -sin a/sin b, d = pi/2 - c. When sin(beta) = 0 the A1 branch is
// never used and c = 0, d = pi/2.
HwpAngles solve_hwp_angles(const DampingParams& p);

enum class Span { Both, Upper, Lower };

struct HalfWavePlate {
  double angle = 0.0;
  Span span = Span::Both;
};

// Switchable retarder; `slot` selects lcr1 (0) or lcr2 (1) of the LcrConfig.
struct LiquidCrystalRetarder {
  int slot = 0;
  Span span = Span::Both;
};

// Displaces V by `shift` paths; amplitude pushed outside the two paths is lost.
struct BeamDisplacer {
  int shift = 1;
};

using OpticalElement = std::variant<HalfWavePlate, LiquidCrystalRetarder, BeamDisplacer>;

/// Angles of the canonical layout's waveplates, in pipeline order.
struct LayoutAngles {
  double flip = 0.0;          // whole beam, before LCR1
  double upper = 0.0;         // upper arm compensator
  double lower_first = 0.0;   // lower arm, before LCR2
  double lower_second = 0.0;  // lower arm, after LCR2
};

// lower_first = a + c - pi/8, lower_second = c - a + pi/8, flip = pi/4, upper = 0.
LayoutAngles canonical_layout_angles(const HwpAngles& hwp);

class OpticalLayout {
 public:
  OpticalLayout(std::vector<OpticalElement> elements, Path output);

  // HWP(flip) -> LCR1 -> BD(+1) -> [upper: HWP(upper)] [lower: HWP -> LCR2 -> HWP] -> BD(-1)
  static OpticalLayout canonical(const DampingParams& p);
  static OpticalLayout canonical(const LayoutAngles& angles);

  const std::vector<OpticalElement>& elements() const { return elements_; }
  Path output() const { return output_; }
  int waveplate_count() const;

  // Copy with the i-th half-wave plate rotated by offsets[i] radians.
  OpticalLayout with_waveplate_offsets(std::span<const double> offsets) const;

  ModeState propagate(ModeState state, const LcrConfig& cfg) const;

 private:
  std::vector<OpticalElement> elements_;
  Path output_;
};

// Heralded 2x2 map from input polarization to output polarization. Throws
// DomainError unless the LCRs are anti-correlated.
Mat2 conditional_operator(const OpticalLayout& layout, const LcrConfig& cfg);

/// One draw of setup errors.
struct PerturbedSetup {
  std::vector<double> waveplate_offsets;  // radians
  std::array<double, 2> retardance_error{0.0, 0.0};
};

// Heralded operators sqrt(p_i) M_i of the (possibly perturbed) setup; the
// channel they implement is trace-decreasing, with mean transmission
// Tr(sum_i K_i rho K_i^dagger).
std::vector<Mat2> implemented_operators(const DampingParams& p, const PerturbedSetup* setup = nullptr);

double exact_transmission(std::span<const Mat2> heralded, const DensityMatrix& rho);

struct TransmissionEstimate {
  double value = 0.0;
  double sigma = 0.0;  // binomial standard error
  std::uint64_t accepted = 0;
  std::uint64_t shots = 0;
};

// Per shot: choose configuration i with probability p_{A_i}, then herald the
// photon with probability Tr(M_i rho M_i^dagger).
TransmissionEstimate simulate_transmission(const DampingParams& p, const DensityMatrix& rho_in, std::uint64_t shots,
                                           const std::optional<SetupPerturbation>& perturb, std::uint64_t seed);

struct BandPoint {
  double transmission_mean = 0.0;
  double transmission_std = 0.0;
  double tangle_mean = 0.0;
  double tangle_std = 0.0;
};

// Exact transmission (of the reduced input seen by the channel) and output
// tangle of `rho_ab` for `trials` perturbed setups at each grid point.
std::vector<BandPoint> sensitivity_band(std::span<const DampingParams> grid, const SetupPerturbation& perturb,
                                        int trials, const DensityMatrix& rho_ab);

// Independent Gaussian jitter of every waveplate angle and of both retarders.
template <class Gen>
PerturbedSetup draw_perturbation(const OpticalLayout& layout, const SetupPerturbation& perturb, Gen& gen) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  PerturbedSetup out;
  const double hwp_sigma = perturb.hwp_sigma_deg * std::numbers::pi / 180.0;
  out.waveplate_offsets.resize(static_cast<std::size_t>(layout.waveplate_count()));
  for (auto& off : out.waveplate_offsets) off = hwp_sigma * gauss(gen);
  for (auto& err : out.retardance_error) err = perturb.lcr_sigma * gauss(gen);
  return out;
}

}  // namespace dampchan
