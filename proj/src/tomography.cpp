#include "dampchan/tomography.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dampchan/errors.hpp"
#include "dampchan/optimize.hpp"
#include "dampchan/rng.hpp"

namespace dampchan {

namespace {

constexpr std::array<Polarization, 6> kAllPolarizations{Polarization::H, Polarization::V, Polarization::D,
                                                         Polarization::A, Polarization::R, Polarization::L};
constexpr int kSettings = 36;

// Pauli basis an eigenstate belongs to: 0 = Z (H, V), 1 = X (D, A), 2 = Y (R, L).
int analysis_basis(Polarization p) { return static_cast<int>(p) / 2; }

int basis_pair(const MeasurementSetting& s) { return 3 * analysis_basis(s.a) + analysis_basis(s.b); }

// Lower-triangular factor with real diagonal: x = (L00..L33, Re/Im of
// L10, L20, L21, L30, L31, L32).
constexpr std::array<std::pair<int, int>, 6> kLowerPairs{{{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

Mat4 lower_from_params(const Eigen::VectorXd& x) {
  Mat4 l = Mat4::Zero();
  for (int d = 0; d < 4; ++d) l(d, d) = x(d);
  int idx = 4;
  for (const auto& [r, c] : kLowerPairs) {
    l(r, c) = cplx(x(idx), x(idx + 1));
    idx += 2;
  }
  return l;
}

Eigen::VectorXd params_from_lower(const Mat4& l) {
  Eigen::VectorXd x(16);
  for (int d = 0; d < 4; ++d) x(d) = l(d, d).real();
  int idx = 4;
  for (const auto& [r, c] : kLowerPairs) {
    x(idx) = l(r, c).real();
    x(idx + 1) = l(r, c).imag();
    idx += 2;
  }
  return x;
}

// d/dx of f where df = Tr(G dH), H = L L^dagger, G Hermitian.
void lower_gradient(const Mat4& l, const Mat4& g, Eigen::Ref<Eigen::VectorXd> out) {
  const Mat4 k = l.adjoint() * g;
  for (int d = 0; d < 4; ++d) out(d) = 2.0 * k(d, d).real();
  int idx = 4;
  for (const auto& [r, c] : kLowerPairs) {
    out(idx) = 2.0 * k(c, r).real();
    out(idx + 1) = -2.0 * k(c, r).imag();
    idx += 2;
  }
}

// Cholesky start point for a PSD matrix, mixed slightly with the identity
// so every parameter starts away from the rank-deficient boundary.
Eigen::VectorXd start_parameters(const ComplexMatrix& psd_unit_trace, double mix) {
  const Mat4 m = (1.0 - mix) * Mat4(psd_unit_trace) + mix * Mat4::Identity() / 4.0;
  Eigen::LLT<Mat4> llt(0.5 * (m + m.adjoint()));
  if (llt.info() != Eigen::Success) throw ReconstructionError("start_parameters: Cholesky failed");
  return params_from_lower(llt.matrixL());
}

const std::array<Mat4, 36>& projectors() {
  static const std::array<Mat4, 36> all = [] {
    std::array<Mat4, 36> p;
    const auto& settings = enumerate_settings();
    for (std::size_t i = 0; i < settings.size(); ++i) p[i] = projector(settings[i]);
    return p;
  }();
  return all;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

char polarization_symbol(Polarization p) { return "HVDARL"[static_cast<int>(p)]; }

Polarization parse_polarization(char symbol) {
  for (const auto p : kAllPolarizations) {
    if (polarization_symbol(p) == symbol) return p;
  }
  throw DomainError(std::string("unknown polarization symbol '") + symbol + "'");
}

Vec2 polarization_ket(Polarization p) {
  const double s = 1.0 / std::sqrt(2.0);
  const cplx i(0.0, 1.0);
  switch (p) {
    case Polarization::H:
      return Vec2(1.0, 0.0);
    case Polarization::V:
      return Vec2(0.0, 1.0);
    case Polarization::D:
      return Vec2(s, s);
    case Polarization::A:
      return Vec2(s, -s);
    case Polarization::R:
      return Vec2(s, s * i);
    case Polarization::L:
      return Vec2(s, -s * i);
  }
  throw DomainError("polarization_ket: invalid polarization");
}

const std::vector<MeasurementSetting>& enumerate_settings() {
  static const std::vector<MeasurementSetting> settings = [] {
    std::vector<MeasurementSetting> out;
    for (const auto a : kAllPolarizations) {
      for (const auto b : kAllPolarizations) out.push_back({a, b});
    }
    return out;
  }();
  return settings;
}

std::size_t setting_index(const MeasurementSetting& s) {
  return static_cast<std::size_t>(6 * static_cast<int>(s.a) + static_cast<int>(s.b));
}

Mat4 projector(const MeasurementSetting& s) {
  const Vec2 ka = polarization_ket(s.a);
  const Vec2 kb = polarization_ket(s.b);
  return tensor(ka * ka.adjoint(), kb * kb.adjoint());
}

void TomographyDataset::validate() const {
  (void)ordered_counts(input_counts);
  (void)ordered_counts(output_counts);
  if (!(flux > 0.0)) throw DomainError("TomographyDataset: flux must be positive");
}

Eigen::VectorXd ordered_counts(std::span<const CountRecord> records) {
  if (records.size() != kSettings) {
    throw DomainError("expected 36 count records, got " + std::to_string(records.size()));
  }
  Eigen::VectorXd n = Eigen::VectorXd::Constant(kSettings, -1.0);
  for (const auto& r : records) {
    const auto idx = static_cast<Eigen::Index>(setting_index(r.setting));
    if (n(idx) >= 0.0) throw DomainError("duplicate measurement setting in count block");
    if (!(r.count >= 0.0) || !std::isfinite(r.count)) throw DomainError("counts must be finite and non-negative");
    n(idx) = r.count;
  }
  return n;
}

std::vector<CountRecord> expected_counts(const DensityMatrix& rho, double flux) {
  if (!(flux > 0.0)) throw DomainError("expected_counts: flux must be positive");
  if (rho.dim() != 4) throw DimensionError("expected_counts: two-qubit state required");
  std::vector<CountRecord> out;
  const auto& settings = enumerate_settings();
  for (std::size_t i = 0; i < settings.size(); ++i) {
    const double p = std::max(0.0, (projectors()[i] * rho.matrix()).trace().real());
    out.push_back({settings[i], flux * p, 5.0});
  }
  return out;
}

std::vector<CountRecord> simulate_counts(const DensityMatrix& rho, double flux, std::uint64_t seed) {
  std::vector<CountRecord> out = expected_counts(rho, flux);
  auto gen = seeded_engine(seed, 10);
  return poisson_resample(out, gen);
}

std::vector<CountRecord> poisson_resample(std::span<const CountRecord> records, std::mt19937_64& gen) {
  std::vector<CountRecord> out(records.begin(), records.end());
  for (auto& r : out) {
    if (r.count <= 0.0) {
      r.count = 0.0;
      continue;
    }
    std::poisson_distribution<long long> poisson(r.count);
    r.count = static_cast<double>(poisson(gen));
  }
  return out;
}

TomographyDataset synthesize_dataset(const KrausSet& channel, const DensityMatrix& true_input,
                                     const DatasetSpec& spec) {
  if (!(spec.flux > 0.0)) throw DomainError("synthesize_dataset: flux must be positive");
  const DensityMatrix out_state = apply_channel(channel, true_input, ApplyMode::AOnly);
  const double out_flux = spec.flux * spec.output_transmission.value_or(1.0);
  TomographyDataset d;
  d.flux = spec.flux;
  if (spec.seed) {
    d.input_counts = simulate_counts(true_input, spec.flux, *spec.seed);
    d.output_counts = simulate_counts(out_state, out_flux, *spec.seed + 0x9e3779b97f4a7c15ULL);
  } else {
    d.input_counts = expected_counts(true_input, spec.flux);
    d.output_counts = expected_counts(out_state, out_flux);
  }
  return d;
}

ComplexMatrix linear_invert_state(std::span<const CountRecord> counts) {
  const Eigen::VectorXd n = ordered_counts(counts);
  const auto& settings = enumerate_settings();
  std::array<double, 9> totals{};
  for (std::size_t i = 0; i < settings.size(); ++i) {
    totals[static_cast<std::size_t>(basis_pair(settings[i]))] += n(static_cast<Eigen::Index>(i));
  }

  // rho = (I + sum_{(j,k) != (0,0)} r_jk sigma_j x sigma_k) / 4
  std::array<Mat4, 16> pp;
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) pp[static_cast<std::size_t>(4 * j + k)] = tensor(pauli(j), pauli(k));
  }
  std::vector<int> rows;
  for (std::size_t i = 0; i < settings.size(); ++i) {
    if (totals[static_cast<std::size_t>(basis_pair(settings[i]))] > 0.0) rows.push_back(static_cast<int>(i));
  }
  if (rows.empty()) throw ReconstructionError("linear_invert_state: all counts are zero");

  Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), 15);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<std::size_t>(rows[r]);
    const Mat4& m = projectors()[i];
    const double freq = n(static_cast<Eigen::Index>(i)) / totals[static_cast<std::size_t>(basis_pair(settings[i]))];
    rhs(static_cast<Eigen::Index>(r)) = freq - m.trace().real() / 4.0;
    for (int c = 1; c < 16; ++c) {
      a(static_cast<Eigen::Index>(r), c - 1) = (m * pp[static_cast<std::size_t>(c)]).trace().real() / 4.0;
    }
  }
  const Eigen::VectorXd coeff = a.colPivHouseholderQr().solve(rhs);
  ComplexMatrix rho = Mat4::Identity() / 4.0;
  for (int c = 1; c < 16; ++c) rho += coeff(c - 1) * pp[static_cast<std::size_t>(c)] / 4.0;
  return rho;
}

DensityMatrix mle_state(std::span<const CountRecord> counts, double flux_hint) {
  if (flux_hint < 0.0 || !std::isfinite(flux_hint)) throw DomainError("mle_state: flux hint must be >= 0");
  const Eigen::VectorXd n = ordered_counts(counts);
  const double total = n.sum();
  if (!(total > 0.0)) throw ReconstructionError("mle_state: all counts are zero");

  const auto& proj = projectors();
  const optim::DifferentiableObjective nll = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const Mat4 l = lower_from_params(x);
    const Mat4 h = l * l.adjoint();
    const double tr = h.trace().real();
    if (!(tr > 0.0)) {
      if (grad) grad->setZero();
      return std::numeric_limits<double>::infinity();
    }
    const Mat4 rho = h / tr;
    double f = 0.0;
    Mat4 g = Mat4::Zero();
    for (int i = 0; i < kSettings; ++i) {
      if (n(i) <= 0.0) continue;
      const double p = std::max((proj[static_cast<std::size_t>(i)] * rho).trace().real(), 1e-300);
      f -= n(i) * std::log(p);
      if (grad) g -= (n(i) / p) * proj[static_cast<std::size_t>(i)];
    }
    if (grad) {
      const double avg = (g * rho).trace().real();
      const Mat4 gh = (g - avg * Mat4::Identity()) / tr;
      lower_gradient(l, gh / total, *grad);
    }
    return f / total;
  };

  const ComplexMatrix start = project_psd_unit_trace(linear_invert_state(counts));
  const optim::Result res = optim::quasi_newton(nll, start_parameters(start, 1e-9), {.max_iterations = 5000});
  const Mat4 l = lower_from_params(res.x);
  return DensityMatrix::normalized(l * l.adjoint());
}

double faithfulness(const DensityMatrix& rho_ab) {
  if (rho_ab.dim() != 4) throw DimensionError("faithfulness: two-qubit state required");
  Mat4 r;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int ap = 0; ap < 2; ++ap) {
        for (int bp = 0; bp < 2; ++bp) r(2 * a + ap, 2 * b + bp) = rho_ab(2 * a + b, 2 * ap + bp);
      }
    }
  }
  Eigen::JacobiSVD<Mat4> svd(r);
  return svd.singularValues().minCoeff();
}

LinearInversion linear_invert_process(const DensityMatrix& rho_in, const DensityMatrix& rho_out) {
  if (rho_in.dim() != 4 || rho_out.dim() != 4) throw DimensionError("linear_invert_process: two-qubit states required");
  const double sigma_min = faithfulness(rho_in);
  if (sigma_min <= kFaithfulnessFloor) {
    throw NonFaithfulInputError("linear_invert_process: input state is not faithful (min singular value " +
                                std::to_string(sigma_min) + ")");
  }
  std::array<Mat4, 4> ops;
  for (int m = 0; m < 4; ++m) ops[static_cast<std::size_t>(m)] = tensor(pauli(m), Mat2::Identity());

  Eigen::Matrix<cplx, 16, 16> sys;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      const Mat4 term = ops[static_cast<std::size_t>(m)] * Mat4(rho_in.matrix()) * ops[static_cast<std::size_t>(n)].adjoint();
      sys.col(4 * m + n) = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(term.data());
    }
  }
  const Mat4 out = rho_out.matrix();
  const Eigen::Matrix<cplx, 16, 1> rhs = Eigen::Map<const Eigen::Matrix<cplx, 16, 1>>(out.data());
  const Eigen::Matrix<cplx, 16, 1> sol = sys.fullPivLu().solve(rhs);

  Mat4 chi;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) chi(m, n) = sol(4 * m + n);
  }
  chi = 0.5 * (chi + chi.adjoint());
  LinearInversion li;
  li.chi = chi;
  li.residual = (apply_process(chi, rho_in.matrix(), ApplyMode::AOnly) - rho_out.matrix()).norm();
  return li;
}

ProcessLikelihood::ProcessLikelihood(std::span<const CountRecord> output_counts, const DensityMatrix& rho_in,
                                     double lambda, double probability_floor, double n_scale)
    : counts_(ordered_counts(output_counts)), lambda_(lambda), floor_(probability_floor), n_scale_(n_scale) {
  if (rho_in.dim() != 4) throw DimensionError("ProcessLikelihood: two-qubit input required");
  if (!(lambda > 0.0)) throw DomainError("ProcessLikelihood: lambda must be positive");
  if (!(n_scale > 0.0)) throw DomainError("ProcessLikelihood: n_scale must be positive");
  std::array<Mat4, 4> ops;
  for (int m = 0; m < 4; ++m) ops[static_cast<std::size_t>(m)] = tensor(pauli(m), Mat2::Identity());
  const Mat4 rho = rho_in.matrix();
  coupling_.resize(kSettings);
  for (int i = 0; i < kSettings; ++i) {
    const Mat4& proj = projectors()[static_cast<std::size_t>(i)];
    Mat4& c = coupling_[static_cast<std::size_t>(i)];
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) {
        c(m, n) = (proj * ops[static_cast<std::size_t>(m)] * rho * ops[static_cast<std::size_t>(n)].adjoint()).trace();
      }
    }
  }
  for (int k = 0; k < 4; ++k) {
    Mat4& d = tp_[static_cast<std::size_t>(k)];
    for (int m = 0; m < 4; ++m) {
      for (int n = 0; n < 4; ++n) d(m, n) = (pauli(n).adjoint() * pauli(m) * pauli(k)).trace();
    }
  }
}

Mat4 ProcessLikelihood::chi_of(const Eigen::VectorXd& x) const {
  const Mat4 l = lower_from_params(x);
  return l * l.adjoint();
}

double ProcessLikelihood::n_of(const Eigen::VectorXd& x) const { return n_scale_ * std::exp(x(16)); }

Eigen::VectorXd ProcessLikelihood::parameters_for(const Mat4& chi, double n) const {
  Eigen::VectorXd x(17);
  Eigen::LLT<Mat4> llt(0.5 * (chi + chi.adjoint()));
  if (llt.info() != Eigen::Success) throw ReconstructionError("parameters_for: chi is not positive definite");
  x.head(16) = params_from_lower(llt.matrixL());
  x(16) = std::log(n / n_scale_);
  return x;
}

Eigen::VectorXd ProcessLikelihood::predicted(const Mat4& chi) const {
  Eigen::VectorXd p(kSettings);
  for (int i = 0; i < kSettings; ++i) {
    p(i) = chi.cwiseProduct(coupling_[static_cast<std::size_t>(i)]).sum().real();
  }
  return p;
}

double ProcessLikelihood::operator()(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
  const Mat4 l = lower_from_params(x);
  const Mat4 chi = l * l.adjoint();
  const double big_n = n_of(x);
  const Eigen::VectorXd p = predicted(chi);

  double f = 0.0;
  double df_dn = 0.0;
  Mat4 g = Mat4::Zero();
  for (int i = 0; i < kSettings; ++i) {
    const double pi = p(i);
    const double pd = std::max(pi, floor_);
    const double resid = counts_(i) - big_n * pi;
    f += resid * resid / (2.0 * big_n * pd);
    if (grad) {
      const double df_dp = pi >= floor_ ? -resid / pi - resid * resid / (2.0 * big_n * pi * pi) : -resid / floor_;
      df_dn += -pi * resid / (big_n * pd) - resid * resid / (2.0 * big_n * big_n * pd);
      g += df_dp * coupling_[static_cast<std::size_t>(i)].transpose();
    }
  }
  for (int k = 0; k < 4; ++k) {
    const double target = k == 0 ? 2.0 : 0.0;
    const double h = chi.cwiseProduct(tp_[static_cast<std::size_t>(k)]).sum().real() - target;
    f += lambda_ * h * h;
    if (grad) g += 2.0 * lambda_ * h * tp_[static_cast<std::size_t>(k)].transpose();
  }
  if (grad) {
    grad->resize(17);
    lower_gradient(l, 0.5 * (g + g.adjoint()), grad->head(16));
    (*grad)(16) = df_dn * big_n;
  }
  return f;
}

double tp_residual(const Mat4& chi) {
  Mat2 s = Mat2::Zero();
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) s += chi(m, n) * pauli(n).adjoint() * pauli(m);
  }
  return (s - Mat2::Identity()).norm();
}

ReconstructionResult mle_process(const TomographyDataset& dataset, const DensityMatrix& rho_in,
                                 const MleOptions& opts) {
  dataset.validate();
  if (rho_in.dim() != 4) throw DimensionError("mle_process: two-qubit input state required");
  const Eigen::VectorXd n = ordered_counts(dataset.output_counts);
  if (!(n.sum() > 0.0)) throw ReconstructionError("mle_process: output counts are all zero");

  // Start from the PSD projection of the linear inversion when it exists.
  Mat4 chi0 = Mat4::Identity() / 4.0;
  if (faithfulness(rho_in) > kFaithfulnessFloor) {
    const DensityMatrix rho_out = mle_state(dataset.output_counts, dataset.flux);
    chi0 = project_psd_unit_trace(linear_invert_process(rho_in, rho_out).chi);
  }
  chi0 = (1.0 - opts.start_mixing) * chi0 + opts.start_mixing * Mat4::Identity() / 4.0;

  const double lambda = opts.lambda > 0.0 ? opts.lambda : 1e3 * n.mean();
  const ProcessLikelihood probe(dataset.output_counts, rho_in, lambda, opts.probability_floor, 1.0);
  const double p_total = probe.predicted(chi0).sum();
  const double n_scale = n.sum() / p_total;
  const ProcessLikelihood objective(dataset.output_counts, rho_in, lambda, opts.probability_floor, n_scale);

  const optim::DifferentiableObjective f = [&objective](const Eigen::VectorXd& x, Eigen::VectorXd* g) {
    return objective(x, g);
  };
  const optim::Result res = optim::quasi_newton(
      f, objective.parameters_for(chi0, n_scale), {.max_iterations = opts.max_iterations, .rel_tol = opts.rel_tol});

  const Mat4 raw = objective.chi_of(res.x);
  const double residual = tp_residual(raw);
  return ReconstructionResult{
      .chi = ProcessMatrix::normalized(raw),
      .raw_chi = raw,
      .objective_value = res.value,
      .tp_residual = residual,
      .iterations = res.iterations,
      .n_estimate = objective.n_of(res.x),
      .lambda = lambda,
      .converged = res.status != optim::Status::MaxIterations && residual < kTpResidualLimit,
  };
}

ReconstructionResult reconstruct_process(const TomographyDataset& dataset, bool ideal_input, const MleOptions& opts) {
  dataset.validate();
  const DensityMatrix rho_in = ideal_input ? phi_plus_state() : mle_state(dataset.input_counts, dataset.flux);
  return mle_process(dataset, rho_in, opts);
}

void write_dataset(std::ostream& os, const TomographyDataset& d) {
  os << "# dampchan tomography dataset\n";
  os << "# flux " << format_number(d.flux) << "\n";
  os << "# block projector_A projector_B count duration\n";
  const auto emit = [&os](const char* tag, const std::vector<CountRecord>& block) {
    for (const auto& r : block) {
      os << tag << ' ' << polarization_symbol(r.setting.a) << ' ' << polarization_symbol(r.setting.b) << ' '
         << format_number(r.count) << ' ' << format_number(r.duration) << '\n';
    }
  };
  emit("input", d.input_counts);
  emit("output", d.output_counts);
}

TomographyDataset read_dataset(std::istream& is) {
  TomographyDataset d;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string key;
      if (first == "#" && (ls >> key) && key == "flux") ls >> d.flux;
      continue;
    }
    std::string pa, pb, count, duration;
    if (!(ls >> pa >> pb >> count >> duration) || pa.size() != 1 || pb.size() != 1) {
      throw DomainError("read_dataset: malformed line " + std::to_string(line_no));
    }
    CountRecord r;
    r.setting = {parse_polarization(pa[0]), parse_polarization(pb[0])};
    try {
      r.count = std::stod(count);
      r.duration = std::stod(duration);
    } catch (const std::exception&) {
      throw DomainError("read_dataset: bad number on line " + std::to_string(line_no));
    }
    if (first == "input") {
      d.input_counts.push_back(r);
    } else if (first == "output") {
      d.output_counts.push_back(r);
    } else {
      throw DomainError("read_dataset: unknown block tag '" + first + "' on line " + std::to_string(line_no));
    }
  }
  d.validate();
  return d;
}

}  // namespace dampchan
