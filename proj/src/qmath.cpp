#include "dampchan/qmath.hpp"

#include <cmath>
#include <string>

#include "dampchan/errors.hpp"

namespace dampchan {

namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a non-empty square matrix");
  }
}

}  // namespace

DensityMatrix::DensityMatrix(const ComplexMatrix& m) {
  if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4)) {
    throw DimensionError("DensityMatrix: dimension must be 2 or 4");
  }
  if (!m.allFinite()) throw InvalidStateError("DensityMatrix: non-finite entries");
  if (!is_hermitian(m)) throw InvalidStateError("DensityMatrix: not Hermitian");
  m_ = 0.5 * (m + m.adjoint());
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > kTraceTol) {
    throw InvalidStateError("DensityMatrix: trace " + std::to_string(tr) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kEigenFloor) {
    throw InvalidStateError("DensityMatrix: negative eigenvalue " +
                            std::to_string(es.eigenvalues().minCoeff()));
  }
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& ket) {
  const double n = ket.norm();
  if (n == 0.0) throw InvalidStateError("DensityMatrix::pure: zero ket");
  const Eigen::VectorXcd k = ket / n;
  return DensityMatrix(k * k.adjoint());
}

DensityMatrix DensityMatrix::normalized(const ComplexMatrix& m) {
  const double tr = m.trace().real();
  if (!(tr > 0.0)) throw InvalidStateError("DensityMatrix::normalized: non-positive trace");
  return DensityMatrix(m / tr);
}

const std::array<Mat2, 4>& pauli_basis() {
  static const std::array<Mat2, 4> basis = [] {
    const cplx i(0.0, 1.0);
    std::array<Mat2, 4> b;
    b[0] << 1, 0, 0, 1;
    b[1] << 0, 1, 1, 0;
    b[2] << 0, -i, i, 0;
    b[3] << 1, 0, 0, -1;
    return b;
  }();
  return basis;
}

const Mat2& pauli(int k) { return pauli_basis().at(static_cast<std::size_t>(k)); }

Vec2 ket_h() { return Vec2(1.0, 0.0); }
Vec2 ket_v() { return Vec2(0.0, 1.0); }

Vec4 ket_phi_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return Vec4(s, 0.0, 0.0, s);
}

DensityMatrix phi_plus_state() { return DensityMatrix::pure(ket_phi_plus()); }

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    }
  }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, Subsystem traced) {
  if (rho.dim() != 4) throw DimensionError("partial_trace: expected a two-qubit state");
  const ComplexMatrix& m = rho.matrix();
  Mat2 out = Mat2::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        // index = 2*a + b
        out(i, j) += traced == Subsystem::B ? m(2 * i + k, 2 * j + k) : m(2 * k + i, 2 * k + j);
      }
    }
  }
  return DensityMatrix(out);
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

HermitianSpectrum hermitian_eigen(const ComplexMatrix& m, double tol) {
  require_square(m, "hermitian_eigen");
  if (!is_hermitian(m, tol)) throw InvalidStateError("hermitian_eigen: matrix is not Hermitian");
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw InvalidStateError("hermitian_eigen: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m, double tol) {
  const HermitianSpectrum spec = hermitian_eigen(m, tol);
  Eigen::VectorXd roots(spec.values.size());
  for (Eigen::Index k = 0; k < spec.values.size(); ++k) {
    const double v = spec.values(k);
    if (v < -kEigenFloor) {
      throw InvalidStateError("psd_sqrt: eigenvalue " + std::to_string(v) + " below -1e-10");
    }
    roots(k) = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  return spec.vectors * roots.asDiagonal() * spec.vectors.adjoint();
}

double trace_norm(const ComplexMatrix& m) {
  require_square(m, "trace_norm");
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues().sum();
}

ComplexMatrix project_psd_unit_trace(const ComplexMatrix& m) {
  const HermitianSpectrum spec = hermitian_eigen(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd clipped = spec.values.cwiseMax(0.0);
  const double total = clipped.sum();
  if (!(total > 0.0)) throw InvalidStateError("project_psd_unit_trace: no positive spectrum");
  return spec.vectors * (clipped / total).asDiagonal() * spec.vectors.adjoint();
}

}  // namespace dampchan
