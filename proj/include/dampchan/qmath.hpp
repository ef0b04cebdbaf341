#pragma once

// Dense complex linear algebra for one- and two-qubit polarization states.
//
// Basis ordering is shared by every module: qubit A is the major index,
// |H> = (1, 0), |V> = (0, 1), and two-qubit kets run |HH>, |HV>, |VH>, |VV>.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <random>

namespace dampchan {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using Vec2 = Eigen::Vector2cd;
using Vec4 = Eigen::Vector4cd;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kEigenFloor = 1e-10;
inline constexpr double kTraceTol = 1e-10;

enum class Subsystem { A, B };

/// Hermitian, positive semidefinite, unit-trace state of one or two qubits.
///
/// Construction validates the invariants (Hermitian to 1e-12, eigenvalues
/// >= -1e-10, trace 1 +- 1e-10) and stores the exactly Hermitian part.
class DensityMatrix {
 public:
  explicit DensityMatrix(const ComplexMatrix& m);

  static DensityMatrix pure(const Eigen::VectorXcd& ket);
  // Rescales a PSD matrix to unit trace before validating.
  static DensityMatrix normalized(const ComplexMatrix& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const ComplexMatrix& matrix() const { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }

 private:
  ComplexMatrix m_;
};

// Pauli operators E_0..E_3 = I, X, Y, Z in this fixed order.
const std::array<Mat2, 4>& pauli_basis();
const Mat2& pauli(int k);

Vec2 ket_h();
Vec2 ket_v();
// (|HH> + |VV>)/sqrt(2)
Vec4 ket_phi_plus();
DensityMatrix phi_plus_state();

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

// Traces out `traced` and returns the reduced state of the other qubit.
DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced);

bool is_hermitian(const ComplexMatrix& m, double tol = kHermitianTol);

struct HermitianSpectrum {
  Eigen::VectorXd values;  // ascending
  ComplexMatrix vectors;
};

// Eigendecomposition of a Hermitian matrix; throws InvalidStateError otherwise.
HermitianSpectrum hermitian_eigen(const ComplexMatrix& m, double tol = kHermitianTol);

// Hermitian PSD square root. Eigenvalues in [-1e-10, 0) are clamped to zero,
// anything more negative is rejected.
ComplexMatrix psd_sqrt(const ComplexMatrix& m, double tol = kHermitianTol);

// Sum of singular values.
double trace_norm(const ComplexMatrix& m);

// Nearest PSD matrix in Frobenius norm (negative eigenvalues set to zero),
// rescaled to unit trace.
ComplexMatrix project_psd_unit_trace(const ComplexMatrix& m);

// Haar random unitary from the phase-corrected QR of a complex Ginibre matrix.
template <class Gen>
ComplexMatrix random_unitary(int n, Gen& gen) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix z(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) z(r, c) = cplx(gauss(gen), gauss(gen));
  }
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix rmat = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    const cplx d = rmat(c, c);
    q.col(c) *= d / std::abs(d);
  }
  return q;
}

}  // namespace dampchan
