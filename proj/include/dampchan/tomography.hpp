#pragma once

// Ancilla-assisted process tomography from two-qubit polarization counts.
//
// Both photons are analyzed in all 36 combinations of the Pauli eigenstates
// H, V, D, A, R, L. One block of counts characterizes the input state (channel
// set to identity); a second block characterizes the output state.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "dampchan/channel.hpp"
#include "dampchan/qmath.hpp"

namespace dampchan {

enum class Polarization { H, V, D, A, R, L };

char polarization_symbol(Polarization p);
Polarization parse_polarization(char symbol);
// D = (H+V)/sqrt2, A = (H-V)/sqrt2, R = (H+iV)/sqrt2, L = (H-iV)/sqrt2
Vec2 polarization_ket(Polarization p);

struct MeasurementSetting {
  Polarization a = Polarization::H;
  Polarization b = Polarization::H;

  friend bool operator==(const MeasurementSetting&, const MeasurementSetting&) = default;
};

// A-major over H, V, D, A, R, L.
const std::vector<MeasurementSetting>& enumerate_settings();
std::size_t setting_index(const MeasurementSetting& s);

// |a><a| x |b><b|
Mat4 projector(const MeasurementSetting& s);

/// Coincidences recorded in one setting. Counts are non-negative; simulated
/// Poisson data is integral, noiseless expectation data may be fractional.
struct CountRecord {
  MeasurementSetting setting;
  double count = 0.0;
  double duration = 5.0;  // seconds
};

struct TomographyDataset {
  std::vector<CountRecord> input_counts;
  std::vector<CountRecord> output_counts;
  double flux = 5e4;  // expected coincidences per setting

  // Throws DomainError unless both blocks hold each of the 36 settings once.
  void validate() const;
};

// Count vector reordered into enumerate_settings() order; throws if a
// setting is missing or repeated.
Eigen::VectorXd ordered_counts(std::span<const CountRecord> records);

std::vector<CountRecord> expected_counts(const DensityMatrix& rho, double flux);

// count_i ~ Poisson(flux * Tr[M_i rho]), reproducible per seed.
std::vector<CountRecord> simulate_counts(const DensityMatrix& rho, double flux, std::uint64_t seed);

// Each count redrawn as Poisson(recorded count).
std::vector<CountRecord> poisson_resample(std::span<const CountRecord> records, std::mt19937_64& gen);

struct DatasetSpec {
  double flux = 5e4;
  // Output block flux is flux * transmission when set; the heralded channel
  // loses photons.
  std::optional<double> output_transmission;
  std::optional<std::uint64_t> seed;  // nullopt: noiseless expected counts
};

TomographyDataset synthesize_dataset(const KrausSet& channel, const DensityMatrix& true_input, const DatasetSpec& spec);

// Least-squares inversion of per-basis frequencies, Hermitian unit trace,
// not necessarily PSD.
ComplexMatrix linear_invert_state(std::span<const CountRecord> counts);

// Poisson maximum likelihood over rho = L L^dagger / Tr(L L^dagger) with L
// lower triangular (16 real parameters). The flux drops out of the
// per-basis likelihood; flux_hint only validates the data scale.
DensityMatrix mle_state(std::span<const CountRecord> counts, double flux_hint = 0.0);

// Smallest singular value of the realigned matrix R[(a a'),(b b')] =
// rho[(a b),(a' b')]. Positive iff the input is faithful for AAQPT.
double faithfulness(const DensityMatrix& rho_ab);

inline constexpr double kFaithfulnessFloor = 1e-6;

struct LinearInversion {
  Mat4 chi;  // Hermitian, possibly not PSD
  double residual = 0.0;
};

// Exact solve of rho_out = sum_mn chi_mn (E_m x I) rho_in (E_n x I)^dagger.
LinearInversion linear_invert_process(const DensityMatrix& rho_in, const DensityMatrix& rho_out);

struct MleOptions {
  // Trace-preservation penalty weight; <= 0 selects 1e3 x mean output count.
  double lambda = 0.0;
  int max_iterations = 5000;
  double rel_tol = 1e-10;
  // Denominator floor for predicted probabilities.
  double probability_floor = 1e-12;
  // Weight of I/4 mixed into the start point.
  double start_mixing = 1e-9;
};

struct ReconstructionResult {
  ProcessMatrix chi;  // unit-trace normalization of raw_chi
  Mat4 raw_chi;
  double objective_value = 0.0;
  double tp_residual = 0.0;  // || sum_mn chi_mn E_n^dag E_m - I ||_F on raw_chi
  int iterations = 0;
  double n_estimate = 0.0;
  double lambda = 0.0;
  bool converged = false;
};

inline constexpr double kTpResidualLimit = 1e-3;

/// Weighted least-squares objective over the output counts,
///
///   f = sum_i (n_i - N p_i)^2 / (2 N p_i) + lambda sum_k [Tr((S - I) E_k)]^2,
///
/// with p_i = Tr[M_i rho'] for rho' the chi-predicted output of rho_in and
/// S = sum_mn chi_mn E_n^dag E_m. Parameters are the 16 reals of a lower
/// triangular L (chi = L L^dagger) followed by u = log(N / n_scale).
class ProcessLikelihood {
 public:
  ProcessLikelihood(std::span<const CountRecord> output_counts, const DensityMatrix& rho_in, double lambda,
                    double probability_floor = 1e-12, double n_scale = 1.0);

  double operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const;

  Mat4 chi_of(const Eigen::VectorXd& x) const;
  double n_of(const Eigen::VectorXd& x) const;
  Eigen::VectorXd parameters_for(const Mat4& chi, double n) const;

  // Predicted probabilities Tr[M_i rho'(chi)] in settings order.
  Eigen::VectorXd predicted(const Mat4& chi) const;
  double lambda() const { return lambda_; }

 private:
  Eigen::VectorXd counts_;
  std::vector<Mat4> coupling_;  // C_i[m,n] = Tr[M_i (E_m x I) rho_in (E_n x I)^dag]
  std::array<Mat4, 4> tp_;      // D_k[m,n] = Tr(E_n^dag E_m E_k)
  double lambda_;
  double floor_;
  double n_scale_;
};

// Trace-preservation residual of a (raw) process matrix.
double tp_residual(const Mat4& chi);

ReconstructionResult mle_process(const TomographyDataset& dataset, const DensityMatrix& rho_in,
                                 const MleOptions& opts = {});

// Estimates rho_in from the input block (or assumes |phi+> when
// ideal_input), then runs mle_process.
ReconstructionResult reconstruct_process(const TomographyDataset& dataset, bool ideal_input = false,
                                         const MleOptions& opts = {});

// Whitespace table, one record per line:
//   block projector_A projector_B count duration
// with block in {input, output}; '#' lines are comments except "# flux <v>".
void write_dataset(std::ostream& os, const TomographyDataset& d);
TomographyDataset read_dataset(std::istream& is);

}  // namespace dampchan
