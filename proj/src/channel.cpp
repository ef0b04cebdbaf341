#include "dampchan/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "dampchan/errors.hpp"
#include "dampchan/optimize.hpp"

namespace dampchan {

namespace {

constexpr double kParamSlack = 1e-12;

ComplexMatrix embed_a(const Mat2& op) { return tensor(op, Mat2::Identity()); }

// Hermitian generator parameterization for remix ranks above two.
ComplexMatrix unitary_from_generator(const Eigen::VectorXd& x, int r) {
  ComplexMatrix h = ComplexMatrix::Zero(r, r);
  int idx = 0;
  for (int d = 0; d < r; ++d) h(d, d) = x(idx++);
  for (int a = 0; a < r; ++a) {
    for (int b = a + 1; b < r; ++b) {
      h(a, b) = cplx(x(idx), x(idx + 1));
      h(b, a) = std::conj(h(a, b));
      idx += 2;
    }
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  Eigen::VectorXcd phases(r);
  for (int d = 0; d < r; ++d) phases(d) = std::exp(cplx(0.0, es.eigenvalues()(d)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

double norm_sum(const KrausSet& k) {
  double total = 0.0;
  for (const auto& op : k.operators()) {
    const double n = operator_norm(op);
    total += n * n;
  }
  return total;
}

}  // namespace

DampingParams make_damping_params(double alpha, double beta) {
  DampingParams p{alpha, beta};
  validate(p);
  return p;
}

void validate(const DampingParams& p) {
  const double half_pi = std::numbers::pi / 2.0;
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || p.alpha < -kParamSlack ||
      p.alpha > p.beta + kParamSlack || p.beta > half_pi + kParamSlack) {
    throw DomainError("damping parameters must satisfy 0 <= alpha <= beta <= pi/2 (got alpha=" +
                      std::to_string(p.alpha) + ", beta=" + std::to_string(p.beta) + ")");
  }
}

KrausSet::KrausSet(std::vector<Mat2> ops) : ops_(std::move(ops)) {
  if (ops_.empty()) throw DomainError("KrausSet: at least one operator required");
  Mat2 total = Mat2::Zero();
  for (const auto& op : ops_) {
    if (!op.allFinite()) throw DomainError("KrausSet: non-finite operator");
    total += op.adjoint() * op;
  }
  const double err = (total - Mat2::Identity()).cwiseAbs().maxCoeff();
  if (err > kCompletenessTol) {
    throw DomainError("KrausSet: completeness violated by " + std::to_string(err));
  }
}

ProcessMatrix::ProcessMatrix(const Mat4& chi) {
  if (!chi.allFinite()) throw InvalidStateError("ProcessMatrix: non-finite entries");
  if (!is_hermitian(chi, 1e-10)) throw InvalidStateError("ProcessMatrix: not Hermitian");
  chi_ = 0.5 * (chi + chi.adjoint());
  const double tr = chi_.trace().real();
  if (std::abs(tr - 1.0) > kProcessPsdTol) {
    throw InvalidStateError("ProcessMatrix: trace " + std::to_string(tr) + " != 1");
  }
  Eigen::SelfAdjointEigenSolver<Mat4> es(chi_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -kProcessPsdTol) {
    throw InvalidStateError("ProcessMatrix: eigenvalue " + std::to_string(es.eigenvalues().minCoeff()) +
                            " below -1e-8");
  }
}

ProcessMatrix ProcessMatrix::normalized(const Mat4& chi) {
  const double tr = chi.trace().real();
  if (!(tr > 0.0)) throw InvalidStateError("ProcessMatrix::normalized: non-positive trace");
  return ProcessMatrix(chi / tr);
}

KrausSet damping_kraus(const DampingParams& p) {
  validate(p);
  Mat2 a0;
  a0 << std::cos(p.alpha), 0.0, 0.0, std::cos(p.beta);
  Mat2 a1;
  a1 << 0.0, std::sin(p.beta), std::sin(p.alpha), 0.0;
  return KrausSet({a0, a1});
}

DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho, ApplyMode mode) {
  const int want = mode == ApplyMode::Single ? 2 : 4;
  if (rho.dim() != want) {
    throw DimensionError("apply_channel: state dimension " + std::to_string(rho.dim()) + " does not match mode");
  }
  ComplexMatrix out = ComplexMatrix::Zero(want, want);
  for (const auto& op : k.operators()) {
    const ComplexMatrix full = mode == ApplyMode::Single ? ComplexMatrix(op) : embed_a(op);
    out += full * rho.matrix() * full.adjoint();
  }
  return DensityMatrix(out);
}

ComplexMatrix apply_process(const Mat4& chi, const ComplexMatrix& rho, ApplyMode mode) {
  const int want = mode == ApplyMode::Single ? 2 : 4;
  if (rho.rows() != want || rho.cols() != want) throw DimensionError("apply_process: dimension mismatch");
  std::array<ComplexMatrix, 4> ops;
  for (int m = 0; m < 4; ++m) ops[m] = mode == ApplyMode::Single ? ComplexMatrix(pauli(m)) : embed_a(pauli(m));
  ComplexMatrix out = ComplexMatrix::Zero(want, want);
  for (int m = 0; m < 4; ++m) {
    const ComplexMatrix left = ops[m] * rho;
    for (int n = 0; n < 4; ++n) {
      if (chi(m, n) == cplx(0.0)) continue;
      out += chi(m, n) * left * ops[n].adjoint();
    }
  }
  return out;
}

double operator_norm(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m);
  return svd.singularValues()(0);
}

double success_probability(std::span<const Mat2> ops) {
  if (ops.empty()) throw DomainError("success_probability: empty operator set");
  double total = 0.0;
  for (const auto& op : ops) {
    const double n = operator_norm(op);
    total += n * n;
  }
  if (!(total > 0.0)) throw DomainError("success_probability: all operators are zero");
  return 1.0 / total;
}

AnalyticSuccess analytic_success(const DampingParams& p) {
  validate(p);
  const double c = std::cos(p.alpha);
  const double s = std::sin(p.beta);
  const double denom = c * c + s * s;
  return {1.0 / denom, c * c / denom, s * s / denom};
}

std::vector<double> kraus_selection_probabilities(std::span<const Mat2> ops) {
  const double p_succ = success_probability(ops);
  std::vector<double> probs;
  probs.reserve(ops.size());
  for (const auto& op : ops) {
    const double n = operator_norm(op);
    probs.push_back(n * n * p_succ);
  }
  return probs;
}

KrausSet remix(const KrausSet& k, const ComplexMatrix& u) {
  const auto r = static_cast<std::size_t>(u.rows());
  if (u.rows() != u.cols() || r < k.size()) throw DimensionError("remix: unitary smaller than the Kraus set");
  std::vector<Mat2> out(r, Mat2::Zero());
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < k.size(); ++i) {
      out[j] += u(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * k[i];
    }
  }
  return KrausSet(std::move(out));
}

Mat2 unitary_from_angles(std::span<const double, 4> angles) {
  const double phase = angles[0];
  const double theta = angles[1];
  const double psi = angles[2];
  const double chi = angles[3];
  const cplx g = std::exp(cplx(0.0, phase));
  Mat2 u;
  u << std::exp(cplx(0.0, psi)) * std::cos(theta), std::exp(cplx(0.0, chi)) * std::sin(theta),
      -std::exp(cplx(0.0, -chi)) * std::sin(theta), std::exp(cplx(0.0, -psi)) * std::cos(theta);
  return g * u;
}

OptimalDecomposition optimal_success_probability(const KrausSet& k, int restarts, std::uint64_t seed, int rank) {
  const int r = rank > 0 ? rank : static_cast<int>(k.size());
  if (r < static_cast<int>(k.size())) throw DimensionError("optimal_success_probability: rank below set size");
  const int dims = r == 2 ? 4 : r * r;

  const auto unitary = [r](const Eigen::VectorXd& x) -> ComplexMatrix {
    if (r == 1) return ComplexMatrix::Identity(1, 1);
    if (r == 2) {
      const std::array<double, 4> a{x(0), x(1), x(2), x(3)};
      return unitary_from_angles(std::span<const double, 4>(a));
    }
    return unitary_from_generator(x, r);
  };
  const optim::Objective cost = [&](const Eigen::VectorXd& x) { return norm_sum(remix(k, unitary(x))); };

  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(dims);
  double best = cost(best_x);
  if (r > 1) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int start = 0; start <= restarts; ++start) {
      Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dims);
      if (start > 0) {
        for (int d = 0; d < dims; ++d) x0(d) = angle(gen);
      }
      optim::Result res = optim::simplex_minimize(cost, x0, Eigen::VectorXd::Constant(dims, 0.3),
                                                  {.max_iterations = 3000, .size_tol = 1e-11});
      // One restart from the converged vertex guards against simplex collapse.
      res = optim::simplex_minimize(cost, res.x, Eigen::VectorXd::Constant(dims, 1e-3),
                                    {.max_iterations = 3000, .size_tol = 1e-12});
      if (res.value < best) {
        best = res.value;
        best_x = res.x;
      }
    }
  }
  return {1.0 / best, remix(k, unitary(best_x))};
}

ProcessMatrix chi_from_kraus(const KrausSet& k) {
  Mat4 chi = Mat4::Zero();
  for (const auto& op : k.operators()) {
    Vec4 c;
    for (int m = 0; m < 4; ++m) c(m) = (pauli(m).adjoint() * op).trace() / 2.0;
    chi += c * c.adjoint();
  }
  return ProcessMatrix::normalized(chi);
}

DensityMatrix choi_state(const KrausSet& k) { return apply_channel(k, phi_plus_state(), ApplyMode::AOnly); }

const Mat4& choi_chi_basis() {
  static const Mat4 basis = [] {
    Mat4 u;
    const Vec4 phi = ket_phi_plus();
    for (int m = 0; m < 4; ++m) u.col(m) = embed_a(pauli(m)) * phi;
    return u;
  }();
  return basis;
}

DensityMatrix choi_from_chi(const ProcessMatrix& chi) {
  const Mat4& u = choi_chi_basis();
  return DensityMatrix(u * chi.matrix() * u.adjoint());
}

ProcessMatrix chi_from_choi(const DensityMatrix& choi) {
  if (choi.dim() != 4) throw DimensionError("chi_from_choi: expected a two-qubit state");
  const Mat4& u = choi_chi_basis();
  return ProcessMatrix(u.adjoint() * Mat4(choi.matrix()) * u);
}

}  // namespace dampchan
