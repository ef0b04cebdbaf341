#include "test_util.hpp"

#include "dampchan/errors.hpp"
#include "dampchan/qmath.hpp"

namespace dampchan {
namespace {

using testing::max_abs_diff;

Mat2 pauli_x() { return pauli(1); }

TEST(PauliBasis, OrderAndOrthogonality) {
  EXPECT_EQ(pauli(0), Mat2::Identity());
  EXPECT_EQ(pauli(3), (Mat2() << 1, 0, 0, -1).finished());
  for (int j = 0; j < 4; ++j) {
    EXPECT_LT(max_abs_diff(pauli(j).adjoint() * pauli(j), Mat2::Identity()), 1e-15);
    for (int k = 0; k < 4; ++k) {
      const cplx ip = (pauli(j).adjoint() * pauli(k)).trace();
      EXPECT_NEAR(std::abs(ip - cplx(j == k ? 2.0 : 0.0)), 0.0, 1e-15);
    }
  }
}

TEST(Tensor, Examples) {
  EXPECT_EQ(tensor(Mat2::Identity(), Mat2::Identity()), ComplexMatrix(Mat4::Identity()));

  ComplexMatrix xi = ComplexMatrix::Zero(4, 4);
  xi.block(0, 2, 2, 2) = Mat2::Identity();
  xi.block(2, 0, 2, 2) = Mat2::Identity();
  EXPECT_EQ(tensor(pauli_x(), Mat2::Identity()), xi);

  ComplexMatrix zx = ComplexMatrix::Zero(4, 4);
  zx.block(0, 0, 2, 2) = pauli_x();
  zx.block(2, 2, 2, 2) = -pauli_x();
  EXPECT_EQ(tensor(pauli(3), pauli_x()), zx);
}

TEST(Tensor, AssociativeAndBilinear) {
  std::mt19937_64 gen(11);
  for (int t = 0; t < 20; ++t) {
    const ComplexMatrix a = testing::random_matrix(2, gen);
    const ComplexMatrix b = testing::random_matrix(2, gen);
    const ComplexMatrix c = testing::random_matrix(2, gen);
    const cplx s(0.3, -1.7);
    EXPECT_LT(max_abs_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))), 1e-12);
    EXPECT_LT(max_abs_diff(tensor(a + s * c, b), tensor(a, b) + s * tensor(c, b)), 1e-12);
    EXPECT_LT(max_abs_diff(tensor(a, b + s * c), tensor(a, b) + s * tensor(a, c)), 1e-12);
  }
}

TEST(PartialTrace, Examples) {
  const DensityMatrix reduced = partial_trace(phi_plus_state(), Subsystem::B);
  EXPECT_LT(max_abs_diff(reduced.matrix(), Mat2::Identity() / 2.0), 1e-15);

  Mat4 mixed = Mat4::Zero();
  mixed(0, 0) = mixed(1, 1) = 0.5;
  EXPECT_LT(max_abs_diff(partial_trace(DensityMatrix(mixed), Subsystem::B).matrix(),
                         (Mat2() << 1, 0, 0, 0).finished()),
            1e-15);
}

TEST(PartialTrace, ProductStatesExact) {
  std::mt19937_64 gen(12);
  for (int t = 0; t < 20; ++t) {
    const DensityMatrix a = testing::random_state(2, gen);
    const DensityMatrix b = testing::random_state(2, gen);
    const DensityMatrix ab(tensor(a.matrix(), b.matrix()));
    EXPECT_LT(max_abs_diff(partial_trace(ab, Subsystem::A).matrix(), b.matrix()), 1e-15);
    EXPECT_LT(max_abs_diff(partial_trace(ab, Subsystem::B).matrix(), a.matrix()), 1e-15);
  }
}

TEST(PartialTrace, RejectsSingleQubit) {
  EXPECT_THROW(partial_trace(DensityMatrix(Mat2::Identity() / 2.0), Subsystem::A), DimensionError);
}

TEST(DensityMatrix, ValidatesInvariants) {
  EXPECT_THROW(DensityMatrix(Mat2::Identity()), InvalidStateError);
  EXPECT_THROW(DensityMatrix((Mat2() << 1.5, 0, 0, -0.5).finished()), InvalidStateError);
  EXPECT_THROW(DensityMatrix((Mat2() << 0.5, 1, 0, 0.5).finished()), InvalidStateError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(3, 3) / 3.0), DimensionError);
  EXPECT_NO_THROW(DensityMatrix((Mat2() << 1.0 + 5e-11, 0, 0, -5e-11).finished()));
}

TEST(PsdSqrt, Examples) {
  EXPECT_LT(max_abs_diff(psd_sqrt(Mat2::Identity()), Mat2::Identity()), 1e-15);
  EXPECT_LT(max_abs_diff(psd_sqrt((Mat2() << 4, 0, 0, 9).finished()), (Mat2() << 2, 0, 0, 3).finished()), 1e-14);
  const Mat2 ones = (Mat2() << 1, 1, 1, 1).finished();
  EXPECT_LT(max_abs_diff(psd_sqrt(ones / 4.0 * 2.0), ones / 2.0), 1e-14);
  EXPECT_LT(max_abs_diff(psd_sqrt(ones), ones / std::sqrt(2.0)), 1e-14);
}

TEST(PsdSqrt, SquaresBack) {
  std::mt19937_64 gen(13);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix g = testing::random_matrix(4, gen);
    const ComplexMatrix m = g * g.adjoint();
    const ComplexMatrix s = psd_sqrt(m);
    EXPECT_LT(max_abs_diff(s * s, m), 1e-10);
  }
}

TEST(PsdSqrt, ClampsRoundoffRejectsNegative) {
  EXPECT_NO_THROW(psd_sqrt((Mat2() << 1, 0, 0, -5e-11).finished()));
  EXPECT_THROW(psd_sqrt((Mat2() << 1, 0, 0, -1e-6).finished()), InvalidStateError);
  EXPECT_THROW(psd_sqrt((Mat2() << 1, 1, 0, 1).finished()), InvalidStateError);
}

TEST(TraceNorm, Examples) {
  EXPECT_NEAR(trace_norm(pauli(3)), 2.0, 1e-15);
  EXPECT_EQ(trace_norm(Mat2::Zero()), 0.0);
  const Mat2 hh = ket_h() * ket_h().adjoint();
  const Mat2 vv = ket_v() * ket_v().adjoint();
  EXPECT_NEAR(0.5 * trace_norm(hh - vv), 1.0, 1e-15);
}

TEST(TraceNorm, NormAxioms) {
  std::mt19937_64 gen(14);
  for (int t = 0; t < 50; ++t) {
    const ComplexMatrix a = testing::random_matrix(4, gen);
    const ComplexMatrix b = testing::random_matrix(4, gen);
    const cplx s(-2.5, 0.8);
    EXPECT_LE(trace_norm(a + b), trace_norm(a) + trace_norm(b) + 1e-12);
    EXPECT_NEAR(trace_norm(s * a), std::abs(s) * trace_norm(a), 1e-11);
  }
}

TEST(ProjectPsd, ClipsNegativeSpectrum) {
  const Mat2 m = (Mat2() << 1.2, 0, 0, -0.2).finished();
  EXPECT_LT(max_abs_diff(project_psd_unit_trace(m), (Mat2() << 1, 0, 0, 0).finished()), 1e-15);
}

TEST(RandomUnitary, IsUnitary) {
  std::mt19937_64 gen(15);
  for (int n : {2, 4, 8}) {
    const ComplexMatrix u = random_unitary(n, gen);
    EXPECT_LT(max_abs_diff(u.adjoint() * u, ComplexMatrix::Identity(n, n)), 1e-13);
  }
}

}  // namespace
}  // namespace dampchan
