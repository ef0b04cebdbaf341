#include "dampchan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dampchan/errors.hpp"
#include "dampchan/optimize.hpp"
#include "dampchan/rng.hpp"
#include "dampchan/stats.hpp"

namespace dampchan {

namespace {

// Eigenvalues this far below the largest are round-off; their square roots
// would otherwise add ~1e-8 to fidelities of rank-deficient matrices.
constexpr double kRelativeZero = 1e-14;

Eigen::VectorXd zero_roundoff(const Eigen::VectorXd& v) {
  const double cut = kRelativeZero * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  return v.unaryExpr([cut](double x) { return x > cut ? x : 0.0; });
}

// Square root that tolerates the -1e-8 eigenvalue slack of process matrices.
ComplexMatrix clamped_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (m + m.adjoint()));
  const Eigen::VectorXd& v = es.eigenvalues();
  if (v.minCoeff() < -kProcessPsdTol * std::max(1.0, v.cwiseAbs().maxCoeff())) {
    throw InvalidStateError("matrix is not positive semidefinite");
  }
  return es.eigenvectors() * zero_roundoff(v).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double uhlmann_fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("uhlmann_fidelity: dimension mismatch");
  const ComplexMatrix sa = clamped_sqrt(a);
  (void)clamped_sqrt(b);
  const ComplexMatrix inner = sa * b * sa;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
  return zero_roundoff(es.eigenvalues()).cwiseSqrt().sum();
}

double process_fidelity(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_id) {
  return uhlmann_fidelity(chi_exp.matrix() / chi_exp.matrix().trace().real(),
                          chi_id.matrix() / chi_id.matrix().trace().real());
}

Mat2 bloch_state(double theta, double phi, double radius) {
  const double x = radius * std::sin(theta) * std::cos(phi);
  const double y = radius * std::sin(theta) * std::sin(phi);
  const double z = radius * std::cos(theta);
  return 0.5 * (Mat2::Identity() + x * pauli(1) + y * pauli(2) + z * pauli(3));
}

double trace_distance_at(const ProcessMatrix& chi_a, const ProcessMatrix& chi_b, const Mat2& rho_in) {
  const ComplexMatrix diff =
      apply_process(chi_a.matrix(), rho_in, ApplyMode::Single) - apply_process(chi_b.matrix(), rho_in, ApplyMode::Single);
  return 0.5 * trace_norm(diff);
}

TraceDistanceResult max_trace_distance(const ProcessMatrix& chi_exp, const ProcessMatrix& chi_id,
                                       const TraceDistanceOptions& opts) {
  if (opts.theta_points < 2 || opts.phi_points < 1) throw DomainError("max_trace_distance: grid too small");
  constexpr double kPi = std::numbers::pi;

  // The output difference is linear in the Bloch vector:
  // delta(rho) = (delta(I) + x delta(X) + y delta(Y) + z delta(Z)) / 2.
  const Mat4 dchi = chi_exp.matrix() - chi_id.matrix();
  std::array<Mat2, 4> parts;
  for (int k = 0; k < 4; ++k) parts[static_cast<std::size_t>(k)] = apply_process(dchi, pauli(k), ApplyMode::Single);
  const auto distance = [&parts](double theta, double phi, double radius) {
    const double x = radius * std::sin(theta) * std::cos(phi);
    const double y = radius * std::sin(theta) * std::sin(phi);
    const double z = radius * std::cos(theta);
    const Mat2 d = 0.5 * (parts[0] + x * parts[1] + y * parts[2] + z * parts[3]);
    const double a = d(0, 0).real();
    const double b = d(1, 1).real();
    const double mean = 0.5 * (a + b);
    const double spread = std::hypot(0.5 * (a - b), std::abs(0.5 * (d(0, 1) + std::conj(d(1, 0)))));
    return 0.5 * (std::abs(mean + spread) + std::abs(mean - spread));
  };

  TraceDistanceResult best;
  best.distance = -1.0;
  const auto consider = [&](double theta, double phi, double radius) {
    const double d = distance(theta, phi, radius);
    if (d > best.distance) {
      best.distance = d;
      best.theta = theta;
      best.phi = phi;
      best.radius = radius;
    }
  };

  std::vector<double> radii{1.0};
  if (opts.allow_mixed) radii = {0.0, 0.25, 0.5, 0.75, 1.0};
  for (const double r : radii) {
    for (int i = 0; i < opts.theta_points; ++i) {
      const double theta = kPi * i / (opts.theta_points - 1);
      for (int j = 0; j < opts.phi_points; ++j) consider(theta, 2.0 * kPi * j / opts.phi_points, r);
    }
  }

  if (opts.refine) {
    // radius = cos^2(s) keeps mixed searches inside the ball.
    const auto radius_of = [&](const Eigen::VectorXd& x) {
      if (!opts.allow_mixed) return 1.0;
      const double c = std::cos(x(2));
      return c * c;
    };
    const optim::Objective neg = [&](const Eigen::VectorXd& x) { return -distance(x(0), x(1), radius_of(x)); };
    const int dims = opts.allow_mixed ? 3 : 2;
    Eigen::VectorXd x0(dims);
    x0(0) = best.theta;
    x0(1) = best.phi;
    if (opts.allow_mixed) x0(2) = std::acos(std::sqrt(std::clamp(best.radius, 0.0, 1.0)));
    const Eigen::VectorXd step = Eigen::VectorXd::Constant(dims, kPi / opts.phi_points);
    const optim::Result res = optim::simplex_minimize(neg, x0, step, {.max_iterations = 2000, .size_tol = 1e-10});
    if (-res.value > best.distance) consider(res.x(0), res.x(1), radius_of(res.x));
  }
  best.distance = std::max(best.distance, 0.0);
  best.input = bloch_state(best.theta, best.phi, best.radius);
  return best;
}

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw DimensionError("concurrence: two-qubit state required");
  const Mat4 yy = tensor(pauli(2), pauli(2));
  const Mat4 m = rho.matrix();
  const Mat4 flipped = yy * m.conjugate() * yy;
  // sqrt(rho) rho~ sqrt(rho) is Hermitian with the same spectrum as rho rho~.
  const Mat4 s = clamped_sqrt(m);
  const Mat4 r = s * flipped * s;
  Eigen::SelfAdjointEigenSolver<Mat4> es(0.5 * (r + r.adjoint()), Eigen::EigenvaluesOnly);
  const Eigen::Vector4d roots = zero_roundoff(es.eigenvalues()).cwiseSqrt();
  std::array<double, 4> l{roots(0), roots(1), roots(2), roots(3)};
  std::sort(l.begin(), l.end(), std::greater<>());
  return std::max(0.0, l[0] - l[1] - l[2] - l[3]);
}

double tangle(const DensityMatrix& rho) {
  const double c = concurrence(rho);
  return c * c;
}

std::vector<ErrorBar> monte_carlo_errorbars(const TomographyDataset& recorded, const DatasetMetrics& pipeline,
                                            std::size_t count, int trials, std::uint64_t seed, bool resample) {
  if (trials < 2) throw DomainError("monte_carlo_errorbar: at least two trials required");
  if (count == 0) throw DomainError("monte_carlo_errorbar: no metrics requested");
  recorded.validate();
  std::vector<RunningStats> stats(count);
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    TomographyDataset sample = recorded;
    if (resample) {
      auto gen = seeded_engine(seed, 20, static_cast<std::uint64_t>(t));
      sample.input_counts = poisson_resample(recorded.input_counts, gen);
      sample.output_counts = poisson_resample(recorded.output_counts, gen);
    }
    try {
      const std::vector<double> v = pipeline(sample);
      if (v.size() != count) throw DimensionError("monte_carlo_errorbar: pipeline returned wrong metric count");
      for (const double x : v) {
        if (!std::isfinite(x)) throw ReconstructionError("non-finite metric");
      }
      for (std::size_t k = 0; k < count; ++k) stats[k].add(v[k]);
    } catch (const ReconstructionError&) {
      ++failures;
    } catch (const InvalidStateError&) {
      ++failures;
    }
  }
  const int ok = trials - failures;
  if (ok < 2) throw ReconstructionError("monte_carlo_errorbar: fewer than two successful trials");
  std::vector<ErrorBar> out;
  for (const auto& s : stats) out.push_back({s.mean(), s.stddev(), ok, failures, seed});
  return out;
}

ErrorBar monte_carlo_errorbar(const TomographyDataset& recorded, const DatasetMetric& pipeline, int trials,
                              std::uint64_t seed, bool resample) {
  const DatasetMetrics wrapped = [&pipeline](const TomographyDataset& d) { return std::vector<double>{pipeline(d)}; };
  return monte_carlo_errorbars(recorded, wrapped, 1, trials, seed, resample).front();
}

}  // namespace dampchan
