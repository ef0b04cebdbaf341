#include "test_util.hpp"

#include <algorithm>
#include <complex>

#include "dampchan/errors.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/stats.hpp"

namespace dampchan {
namespace {

using testing::kPi;
using testing::max_abs_diff;

ProcessMatrix chi_of(const DampingParams& p) { return chi_from_kraus(damping_kraus(p)); }

ProcessMatrix random_chi(std::mt19937_64& gen) { return chi_from_kraus(testing::random_channel(4, gen)); }

// Concurrence from the eigenvalues of the non-Hermitian product rho (Y x Y) rho* (Y x Y).
double concurrence_oracle(const DensityMatrix& rho) {
  const Mat4 yy = tensor(pauli(2), pauli(2));
  const Mat4 r = rho.matrix();
  const Mat4 flipped = yy * r.conjugate() * yy;
  const Eigen::ComplexEigenSolver<Mat4> es(r * flipped);
  std::array<double, 4> l{};
  for (int i = 0; i < 4; ++i) l[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, es.eigenvalues()(i).real()));
  std::sort(l.begin(), l.end(), std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

// Brute-force largest output trace distance over a dense grid of pure inputs.
double grid_distance(const KrausSet& a, const KrausSet& b, int n) {
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j < 2 * n; ++j) {
      const double th = kPi * i / n, ph = kPi * j / n;
      const Vec2 ket = (Vec2() << std::cos(th / 2), std::polar(std::sin(th / 2), ph)).finished();
      const DensityMatrix rho = DensityMatrix::pure(ket);
      const ComplexMatrix diff =
          apply_channel(a, rho, ApplyMode::Single).matrix() - apply_channel(b, rho, ApplyMode::Single).matrix();
      best = std::max(best, 0.5 * trace_norm(diff));
    }
  }
  return best;
}

TEST(ProcessFidelity, SelfIsOne) {
  std::mt19937_64 gen(61);
  for (int t = 0; t < 100; ++t) {
    const ProcessMatrix chi = random_chi(gen);
    EXPECT_NEAR(process_fidelity(chi, chi), 1.0, 1e-9);
  }
  for (double b : {0.0, 0.5, kPi / 2}) {
    const ProcessMatrix chi = chi_of({0.0, b});
    EXPECT_NEAR(process_fidelity(chi, chi), 1.0, 1e-12);
  }
}

TEST(ProcessFidelity, SymmetricAndBounded) {
  std::mt19937_64 gen(62);
  for (int t = 0; t < 50; ++t) {
    const ProcessMatrix a = random_chi(gen), b = random_chi(gen);
    const double f = process_fidelity(a, b);
    EXPECT_NEAR(f, process_fidelity(b, a), 1e-9);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-9);
  }
}

TEST(ProcessFidelity, IdentityVersusFullDamping) {
  // The identity chi is the projector onto E_0, so the fidelity is sqrt(chi_00).
  const ProcessMatrix full = chi_of({0.0, kPi / 2});
  const double f = process_fidelity(chi_of({0.0, 0.0}), full);
  EXPECT_NEAR(f, std::sqrt(full(0, 0).real()), 1e-12);
  EXPECT_NEAR(f, 0.5, 1e-12);
}

TEST(UhlmannFidelity, PureStateOverlap) {
  std::mt19937_64 gen(63);
  for (int t = 0; t < 20; ++t) {
    const Vec4 ket = testing::random_matrix(4, gen).col(0).normalized();
    const DensityMatrix sigma = testing::random_state(4, gen);
    const double overlap = (ket.adjoint() * sigma.matrix() * ket)(0, 0).real();
    EXPECT_NEAR(uhlmann_fidelity(ket * ket.adjoint(), sigma.matrix()), std::sqrt(overlap), 1e-10);
  }
}

TEST(UhlmannFidelity, RejectsNonPsd) {
  Mat2 bad = Mat2::Zero();
  bad(0, 0) = 1.2;
  bad(1, 1) = -0.2;
  EXPECT_THROW(uhlmann_fidelity(bad, Mat2::Identity() / 2.0), InvalidStateError);
}

TEST(BlochState, Poles) {
  EXPECT_LT(max_abs_diff(bloch_state(0.0, 0.0), ket_h() * ket_h().adjoint()), 1e-15);
  EXPECT_LT(max_abs_diff(bloch_state(kPi, 0.0), ket_v() * ket_v().adjoint()), 1e-15);
  EXPECT_LT(max_abs_diff(bloch_state(1.0, 2.0, 0.0), Mat2::Identity() / 2.0), 1e-15);
}

TEST(MaxTraceDistance, IdenticalChannels) {
  std::mt19937_64 gen(64);
  const ProcessMatrix chi = random_chi(gen);
  EXPECT_LT(max_trace_distance(chi, chi).distance, 1e-6);
  for (int t = 0; t < 20; ++t) EXPECT_LT(trace_distance_at(chi, chi, testing::random_pure(2, gen).matrix()), 1e-14);
}

TEST(MaxTraceDistance, IdentityVersusFullDamping) {
  const TraceDistanceResult r = max_trace_distance(chi_of({0.0, kPi / 2}), chi_of({0.0, 0.0}));
  EXPECT_NEAR(r.distance, 1.0, 1e-6);
  EXPECT_LT(max_abs_diff(r.input, ket_v() * ket_v().adjoint()), 1e-3);
}

TEST(MaxTraceDistance, BitFlipAgainstGridOracle) {
  const double a = kPi / 8;
  const KrausSet flip = damping_kraus({a, a});
  const KrausSet id({Mat2::Identity()});
  const double oracle = grid_distance(flip, id, 200);
  const double d = max_trace_distance(chi_from_kraus(flip), chi_from_kraus(id)).distance;
  EXPECT_GE(d, oracle - 1e-12);
  EXPECT_NEAR(d, oracle, 1e-6);
  EXPECT_NEAR(d, std::sin(a) * std::sin(a), 1e-6);
}

TEST(MaxTraceDistance, RandomChannelsAgainstGridOracle) {
  std::mt19937_64 gen(65);
  for (int t = 0; t < 3; ++t) {
    const KrausSet a = testing::random_channel(2, gen), b = testing::random_channel(3, gen);
    const double d = max_trace_distance(chi_from_kraus(a), chi_from_kraus(b)).distance;
    const double oracle = grid_distance(a, b, 120);
    EXPECT_GE(d, oracle - 1e-12);
    EXPECT_LT(d - oracle, 1e-3);
  }
}

TEST(MaxTraceDistance, Maximality) {
  std::mt19937_64 gen(66);
  for (int t = 0; t < 5; ++t) {
    const ProcessMatrix a = random_chi(gen), b = random_chi(gen);
    const double d = max_trace_distance(a, b).distance;
    for (int k = 0; k < 20; ++k) EXPECT_GE(d, trace_distance_at(a, b, testing::random_pure(2, gen).matrix()) - 1e-12);
  }
}

TEST(MaxTraceDistance, StableUnderGridDoubling) {
  std::mt19937_64 gen(67);
  for (int t = 0; t < 5; ++t) {
    const ProcessMatrix a = random_chi(gen), b = random_chi(gen);
    TraceDistanceOptions fine;
    fine.theta_points = 128;
    fine.phi_points = 256;
    EXPECT_NEAR(max_trace_distance(a, b).distance, max_trace_distance(a, b, fine).distance, 1e-6);
  }
}

TEST(MaxTraceDistance, MixedInputsNeverWin) {
  std::mt19937_64 gen(68);
  for (int t = 0; t < 5; ++t) {
    const ProcessMatrix a = random_chi(gen), b = random_chi(gen);
    TraceDistanceOptions mixed;
    mixed.allow_mixed = true;
    const TraceDistanceResult pure = max_trace_distance(a, b);
    const TraceDistanceResult ball = max_trace_distance(a, b, mixed);
    EXPECT_NEAR(ball.distance, pure.distance, 1e-6);
    EXPECT_GE(ball.radius, 0.0);
  }
}

TEST(MaxTraceDistance, ReportedInputAttainsDistance) {
  std::mt19937_64 gen(69);
  const ProcessMatrix a = random_chi(gen), b = random_chi(gen);
  const TraceDistanceResult r = max_trace_distance(a, b);
  EXPECT_NEAR(trace_distance_at(a, b, r.input), r.distance, 1e-12);
  EXPECT_LT(max_abs_diff(r.input, bloch_state(r.theta, r.phi, r.radius)), 1e-12);
}

TEST(Tangle, Examples) {
  EXPECT_NEAR(tangle(phi_plus_state()), 1.0, 1e-12);
  Mat4 sep = Mat4::Zero();
  sep(0, 0) = sep(1, 1) = 0.5;
  EXPECT_NEAR(tangle(DensityMatrix(sep)), 0.0, 1e-12);
  EXPECT_NEAR(tangle(DensityMatrix(Mat4::Identity() / 4.0)), 0.0, 1e-12);
}

TEST(Tangle, MatchesNonHermitianOracle) {
  std::mt19937_64 gen(70);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = t % 2 ? testing::random_pure(4, gen) : testing::random_state(4, gen);
    EXPECT_NEAR(concurrence(rho), concurrence_oracle(rho), 1e-7);
  }
}

TEST(Tangle, LocalUnitaryInvariant) {
  std::mt19937_64 gen(71);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = t % 2 ? testing::random_pure(4, gen) : testing::random_state(4, gen);
    const ComplexMatrix u = tensor(random_unitary(2, gen), random_unitary(2, gen));
    const DensityMatrix rotated(u * rho.matrix() * u.adjoint());
    EXPECT_NEAR(tangle(rotated), tangle(rho), 1e-9);
  }
}

TEST(Tangle, ClosedFormsOnGrid) {
  for (int i = 0; i < 50; ++i) {
    const double b = kPi / 2 * i / 49;
    const DensityMatrix damped = apply_channel(damping_kraus({0.0, b}), phi_plus_state(), ApplyMode::AOnly);
    EXPECT_NEAR(tangle(damped), std::pow(std::cos(b), 2), 1e-9);
    EXPECT_NEAR(concurrence_oracle(damped), std::cos(b), 1e-7);
    const DensityMatrix flipped = apply_channel(damping_kraus({b, b}), phi_plus_state(), ApplyMode::AOnly);
    EXPECT_NEAR(tangle(flipped), std::pow(std::cos(2 * b), 2), 1e-9);
    EXPECT_NEAR(concurrence_oracle(flipped), std::abs(std::cos(2 * b)), 1e-7);
  }
}

TomographyDataset small_dataset(double flux, std::uint64_t seed) {
  DatasetSpec spec;
  spec.flux = flux;
  spec.seed = seed;
  return synthesize_dataset(damping_kraus({0.2, 0.7}), phi_plus_state(), spec);
}

double total_output(const TomographyDataset& d) { return ordered_counts(d.output_counts).sum(); }

TEST(ErrorBar, NoResamplingIsExact) {
  DatasetSpec spec;
  const TomographyDataset d = synthesize_dataset(damping_kraus({0.2, 0.7}), phi_plus_state(), spec);
  const ErrorBar e = monte_carlo_errorbar(d, total_output, 5, 1, false);
  EXPECT_EQ(e.stddev, 0.0);
  EXPECT_EQ(e.trials, 5);
  EXPECT_DOUBLE_EQ(e.mean, total_output(d));
}

TEST(ErrorBar, UnbiasedForLinearMetric) {
  const TomographyDataset d = small_dataset(5e4, 3);
  const ErrorBar e = monte_carlo_errorbar(d, total_output, 200, 9);
  EXPECT_NEAR(e.mean, total_output(d), 3 * e.stddev / std::sqrt(200.0));
  EXPECT_NEAR(e.stddev, std::sqrt(total_output(d)), 0.15 * std::sqrt(total_output(d)));
}

TEST(ErrorBar, DeterministicPerSeed) {
  const TomographyDataset d = small_dataset(1e3, 4);
  const ErrorBar a = monte_carlo_errorbar(d, total_output, 20, 77);
  const ErrorBar b = monte_carlo_errorbar(d, total_output, 20, 77);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.stddev, b.stddev);
  EXPECT_EQ(a.seed, 77u);
  EXPECT_NE(a.mean, monte_carlo_errorbar(d, total_output, 20, 78).mean);
}

TEST(ErrorBar, PoissonScalingOfFrequency) {
  auto frequency = [](const TomographyDataset& d) {
    const Eigen::VectorXd n = ordered_counts(d.output_counts);
    return n(0) / n.sum();
  };
  const double s1 = monte_carlo_errorbar(small_dataset(5e4, 5), frequency, 400, 1).stddev;
  const double s2 = monte_carlo_errorbar(small_dataset(1e5, 5), frequency, 400, 1).stddev;
  EXPECT_NEAR(s2 / s1, 1 / std::sqrt(2.0), 0.2 / std::sqrt(2.0));
}

TEST(ErrorBar, CountsFailures) {
  const TomographyDataset d = small_dataset(1e3, 6);
  int calls = 0;
  const DatasetMetric flaky = [&calls](const TomographyDataset& s) {
    if (++calls % 3 == 0) throw ReconstructionError("synthetic failure");
    return total_output(s);
  };
  const ErrorBar e = monte_carlo_errorbar(d, flaky, 9, 1);
  EXPECT_EQ(e.failures, 3);
  EXPECT_EQ(e.trials, 6);

  const DatasetMetric broken = [](const TomographyDataset&) -> double { throw ReconstructionError("always"); };
  EXPECT_THROW(monte_carlo_errorbar(d, broken, 5, 1), ReconstructionError);
  EXPECT_THROW(monte_carlo_errorbar(d, total_output, 1, 1), DomainError);
}

TEST(ErrorBar, SharedReconstructionMetrics) {
  const TomographyDataset d = small_dataset(1e3, 7);
  const DatasetMetrics both = [](const TomographyDataset& s) {
    return std::vector<double>{total_output(s), 2 * total_output(s)};
  };
  const auto bars = monte_carlo_errorbars(d, both, 2, 10, 3);
  ASSERT_EQ(bars.size(), 2u);
  EXPECT_NEAR(bars[1].mean, 2 * bars[0].mean, 1e-9);
  EXPECT_NEAR(bars[1].stddev, 2 * bars[0].stddev, 1e-9);
}

}  // namespace
}  // namespace dampchan
