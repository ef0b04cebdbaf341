#pragma once

// The two-parameter single-qubit damping family
//
//   A0 = [[cos a, 0], [0, cos b]],   A1 = [[0, sin b], [sin a, 0]],
//
// with amplitude damping at a = 0 and bit flip at a = b, plus the generic
// Kraus / process-matrix machinery used by tomography and metrics.

#include <cstdint>
#include <span>
#include <vector>

#include "dampchan/qmath.hpp"

namespace dampchan {

/// Channel parameters in radians. Valid iff 0 <= alpha <= beta <= pi/2,
/// which is the ordering cos(alpha) >= cos(beta) the optimality formula needs.
struct DampingParams {
  double alpha = 0.0;
  double beta = 0.0;
};

// Throws DomainError unless 0 <= alpha <= beta <= pi/2 (1e-12 slack).
DampingParams make_damping_params(double alpha, double beta);
void validate(const DampingParams& p);

inline constexpr double kCompletenessTol = 1e-10;

/// Ordered Kraus operators of a trace-preserving single-qubit map.
class KrausSet {
 public:
  explicit KrausSet(std::vector<Mat2> ops);

  const std::vector<Mat2>& operators() const { return ops_; }
  std::size_t size() const { return ops_.size(); }
  const Mat2& operator[](std::size_t i) const { return ops_[i]; }

 private:
  std::vector<Mat2> ops_;
};

/// Pauli-basis process matrix, Hermitian PSD with unit trace. For the
/// unnormalized Pauli basis unit trace is exactly the trace-preserving
/// normalization.
class ProcessMatrix {
 public:
  explicit ProcessMatrix(const Mat4& chi);
  // Rescales a Hermitian PSD matrix to unit trace first.
  static ProcessMatrix normalized(const Mat4& chi);

  const Mat4& matrix() const { return chi_; }
  cplx operator()(int m, int n) const { return chi_(m, n); }

 private:
  Mat4 chi_;
};

inline constexpr double kProcessPsdTol = 1e-8;

enum class ApplyMode {
  Single,  // 2x2 state, E(rho)
  AOnly,   // 4x4 state, (E x I)(rho)
};

KrausSet damping_kraus(const DampingParams& p);

DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho, ApplyMode mode);

// sum_mn chi_mn E_m rho E_n^dagger, on qubit A when mode == AOnly. The result
// is not renormalized; a non-trace-preserving chi gives a non-unit trace.
ComplexMatrix apply_process(const Mat4& chi, const ComplexMatrix& rho, ApplyMode mode);

// Largest singular value.
double operator_norm(const Mat2& m);

// (sum_i ||A_i||_inf^2)^-1 for a probabilistic implementation of the set.
double success_probability(std::span<const Mat2> ops);

struct AnalyticSuccess {
  double success = 0.0;  // 1/(cos^2 a + sin^2 b)
  double p_a0 = 0.0;     // cos^2 a/(cos^2 a + sin^2 b)
  double p_a1 = 0.0;     // sin^2 b/(cos^2 a + sin^2 b)
};
AnalyticSuccess analytic_success(const DampingParams& p);

// Per-operator selection probabilities ||A_i||^2 * p_succ.
std::vector<double> kraus_selection_probabilities(std::span<const Mat2> ops);

// B_j = sum_i u_ji A_i, zero-padding {A_i} up to u.rows() operators.
KrausSet remix(const KrausSet& k, const ComplexMatrix& u);

// U(2) from four angles (global phase, theta, psi, chi); all zeros give I.
Mat2 unitary_from_angles(std::span<const double, 4> angles);

struct OptimalDecomposition {
  double success = 0.0;
  KrausSet decomposition;
};

// Multi-start simplex search over unitary remixings of `k` (padded to
// `rank` operators, 0 meaning k.size()). The unmixed set is always one
// start, so the result never falls below success_probability(k).
OptimalDecomposition optimal_success_probability(const KrausSet& k, int restarts = 32, std::uint64_t seed = 1,
                                                 int rank = 0);

ProcessMatrix chi_from_kraus(const KrausSet& k);

// (E x I)(|phi+><phi+|)
DensityMatrix choi_state(const KrausSet& k);

// Columns (E_m x I)|phi+>; orthonormal, so choi = U chi U^dagger.
const Mat4& choi_chi_basis();
DensityMatrix choi_from_chi(const ProcessMatrix& chi);
ProcessMatrix chi_from_choi(const DensityMatrix& choi);

}  // namespace dampchan
