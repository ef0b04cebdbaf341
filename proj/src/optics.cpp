#include "dampchan/optics.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "dampchan/errors.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/rng.hpp"
#include "dampchan/stats.hpp"

namespace dampchan {

namespace {

constexpr double kPi = std::numbers::pi;

bool touches(Span span, int path) {
  switch (span) {
    case Span::Both:
      return true;
    case Span::Upper:
      return path == 0;
    case Span::Lower:
      return path == 1;
  }
  return false;
}

void apply_polarization(ModeState& s, const Mat2& jones, Span span) {
  for (int path = 0; path < 2; ++path) {
    if (!touches(span, path)) continue;
    const Vec2 in = s.amplitudes.segment<2>(2 * path);
    s.amplitudes.segment<2>(2 * path) = jones * in;
  }
}

void apply_displacer(ModeState& s, int shift) {
  Vec4 out = Vec4::Zero();
  for (int path = 0; path < 2; ++path) {
    out(2 * path) += s.amplitudes(2 * path);  // H is undeviated
    const int dest = path + shift;
    if (dest >= 0 && dest < 2) out(2 * dest + 1) += s.amplitudes(2 * path + 1);
  }
  s.amplitudes = out;
}

double clamp_unit(double x) { return std::max(-1.0, std::min(1.0, x)); }

}  // namespace

ModeState ModeState::entering(const Vec2& polarization) {
  ModeState s;
  s.amplitudes.segment<2>(0) = polarization;
  return s;
}

Vec2 ModeState::polarization_at(Path p) const { return amplitudes.segment<2>(2 * static_cast<int>(p)); }

LcrConfig kraus_configuration(int which, std::array<double, 2> retardance_error) {
  if (which != 0 && which != 1) throw DomainError("kraus_configuration: index must be 0 or 1");
  LcrConfig cfg;
  cfg.lcr1 = which == 0 ? LcrSetting::PauliX : LcrSetting::Identity;
  cfg.lcr2 = which == 0 ? LcrSetting::Identity : LcrSetting::PauliX;
  cfg.retardance_error = retardance_error;
  return cfg;
}

SwitchingSchedule make_schedule(const DampingParams& p) {
  const AnalyticSuccess a = analytic_success(p);
  return {a.p_a0, a.p_a1, 10.0};
}

Mat2 hwp_jones(double theta) {
  const double c = std::cos(2.0 * theta);
  const double s = std::sin(2.0 * theta);
  Mat2 m;
  m << c, s, s, -c;
  return m;
}

Mat2 retarder_jones(double retardance) {
  const cplx e = std::exp(cplx(0.0, retardance));
  return 0.5 * (1.0 + e) * Mat2::Identity() + 0.5 * (1.0 - e) * pauli(1);
}

Mat2 lcr_jones(LcrSetting s, double retardance_error) {
  const double delta = s == LcrSetting::PauliX ? kPi * (1.0 + retardance_error) : kPi * retardance_error;
  return retarder_jones(delta);
}

HwpAngles solve_hwp_angles(const DampingParams& p) {
  validate(p);
  HwpAngles h;
  h.a = 0.25 * std::asin(clamp_unit(std::cos(p.beta) / std::cos(p.alpha)));
  h.b = h.a - kPi / 4.0;
  const double sb = std::sin(p.beta);
  h.c = sb > 0.0 ? 0.25 * std::asin(clamp_unit(-std::sin(p.alpha) / sb)) : 0.0;
  h.d = kPi / 2.0 - h.c;
  return h;
}

LayoutAngles canonical_layout_angles(const HwpAngles& hwp) {
  LayoutAngles l;
  l.flip = kPi / 4.0;
  l.upper = 0.0;
  l.lower_first = hwp.a + hwp.c - kPi / 8.0;
  l.lower_second = hwp.c - hwp.a + kPi / 8.0;
  return l;
}

OpticalLayout::OpticalLayout(std::vector<OpticalElement> elements, Path output)
    : elements_(std::move(elements)), output_(output) {
  for (const auto& e : elements_) {
    if (const auto* lcr = std::get_if<LiquidCrystalRetarder>(&e); lcr && (lcr->slot < 0 || lcr->slot > 1)) {
      throw DomainError("OpticalLayout: retarder slot must be 0 or 1");
    }
  }
}

OpticalLayout OpticalLayout::canonical(const DampingParams& p) {
  return canonical(canonical_layout_angles(solve_hwp_angles(p)));
}

OpticalLayout OpticalLayout::canonical(const LayoutAngles& angles) {
  return OpticalLayout(
      {
          HalfWavePlate{angles.flip, Span::Both},
          LiquidCrystalRetarder{0, Span::Both},
          BeamDisplacer{+1},
          HalfWavePlate{angles.upper, Span::Upper},
          HalfWavePlate{angles.lower_first, Span::Lower},
          LiquidCrystalRetarder{1, Span::Lower},
          HalfWavePlate{angles.lower_second, Span::Lower},
          BeamDisplacer{-1},
      },
      Path::Upper);
}

int OpticalLayout::waveplate_count() const {
  int n = 0;
  for (const auto& e : elements_) n += std::holds_alternative<HalfWavePlate>(e) ? 1 : 0;
  return n;
}

OpticalLayout OpticalLayout::with_waveplate_offsets(std::span<const double> offsets) const {
  if (static_cast<int>(offsets.size()) != waveplate_count()) {
    throw DimensionError("with_waveplate_offsets: one offset per half-wave plate required");
  }
  OpticalLayout copy = *this;
  std::size_t k = 0;
  for (auto& e : copy.elements_) {
    if (auto* hwp = std::get_if<HalfWavePlate>(&e)) hwp->angle += offsets[k++];
  }
  return copy;
}

ModeState OpticalLayout::propagate(ModeState state, const LcrConfig& cfg) const {
  const std::array<LcrSetting, 2> settings{cfg.lcr1, cfg.lcr2};
  for (const auto& e : elements_) {
    if (const auto* hwp = std::get_if<HalfWavePlate>(&e)) {
      apply_polarization(state, hwp_jones(hwp->angle), hwp->span);
    } else if (const auto* lcr = std::get_if<LiquidCrystalRetarder>(&e)) {
      const auto slot = static_cast<std::size_t>(lcr->slot);
      apply_polarization(state, lcr_jones(settings[slot], cfg.retardance_error[slot]), lcr->span);
    } else {
      apply_displacer(state, std::get<BeamDisplacer>(e).shift);
    }
  }
  return state;
}

Mat2 conditional_operator(const OpticalLayout& layout, const LcrConfig& cfg) {
  if (cfg.lcr1 == cfg.lcr2) throw DomainError("conditional_operator: LCR settings must be anti-correlated");
  Mat2 m;
  m.col(0) = layout.propagate(ModeState::entering(ket_h()), cfg).polarization_at(layout.output());
  m.col(1) = layout.propagate(ModeState::entering(ket_v()), cfg).polarization_at(layout.output());
  return m;
}

std::vector<Mat2> implemented_operators(const DampingParams& p, const PerturbedSetup* setup) {
  const SwitchingSchedule sched = make_schedule(p);
  OpticalLayout layout = OpticalLayout::canonical(p);
  std::array<double, 2> errors{0.0, 0.0};
  if (setup != nullptr) {
    layout = layout.with_waveplate_offsets(setup->waveplate_offsets);
    errors = setup->retardance_error;
  }
  return {std::sqrt(sched.p_a0) * conditional_operator(layout, kraus_configuration(0, errors)),
          std::sqrt(sched.p_a1) * conditional_operator(layout, kraus_configuration(1, errors))};
}

double exact_transmission(std::span<const Mat2> heralded, const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("exact_transmission: single-qubit state required");
  double t = 0.0;
  for (const auto& k : heralded) t += (k * rho.matrix() * k.adjoint()).trace().real();
  return t;
}

TransmissionEstimate simulate_transmission(const DampingParams& p, const DensityMatrix& rho_in, std::uint64_t shots,
                                           const std::optional<SetupPerturbation>& perturb, std::uint64_t seed) {
  if (shots == 0) throw DomainError("simulate_transmission: shots must be positive");
  if (rho_in.dim() != 2) throw DimensionError("simulate_transmission: single-qubit input required");
  const SwitchingSchedule sched = make_schedule(p);

  OpticalLayout layout = OpticalLayout::canonical(p);
  std::array<double, 2> errors{0.0, 0.0};
  if (perturb) {
    auto gen = seeded_engine(perturb->seed, 0);
    const PerturbedSetup setup = draw_perturbation(layout, *perturb, gen);
    layout = layout.with_waveplate_offsets(setup.waveplate_offsets);
    errors = setup.retardance_error;
  }
  std::array<double, 2> herald{};
  for (int i = 0; i < 2; ++i) {
    const Mat2 m = conditional_operator(layout, kraus_configuration(i, errors));
    herald[static_cast<std::size_t>(i)] = (m * rho_in.matrix() * m.adjoint()).trace().real();
  }

  auto gen = seeded_engine(seed, 1);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uint64_t accepted = 0;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    const std::size_t cfg = uniform(gen) < sched.p_a0 ? 0 : 1;
    if (uniform(gen) < herald[cfg]) ++accepted;
  }
  TransmissionEstimate est;
  est.shots = shots;
  est.accepted = accepted;
  est.value = static_cast<double>(accepted) / static_cast<double>(shots);
  est.sigma = std::sqrt(est.value * (1.0 - est.value) / static_cast<double>(shots));
  return est;
}

std::vector<BandPoint> sensitivity_band(std::span<const DampingParams> grid, const SetupPerturbation& perturb,
                                        int trials, const DensityMatrix& rho_ab) {
  if (trials < 2) throw DomainError("sensitivity_band: at least two trials required");
  if (perturb.hwp_sigma_deg < 0.0 || perturb.lcr_sigma < 0.0) throw DomainError("sensitivity_band: negative sigma");
  if (rho_ab.dim() != 4) throw DimensionError("sensitivity_band: two-qubit input required");
  const DensityMatrix rho_a = partial_trace(rho_ab, Subsystem::B);

  std::vector<BandPoint> out;
  out.reserve(grid.size());
  for (std::size_t point = 0; point < grid.size(); ++point) {
    const OpticalLayout layout = OpticalLayout::canonical(grid[point]);
    auto gen = seeded_engine(perturb.seed, 2, point);
    RunningStats transmission, entanglement;
    for (int trial = 0; trial < trials; ++trial) {
      const PerturbedSetup setup = draw_perturbation(layout, perturb, gen);
      const std::vector<Mat2> ops = implemented_operators(grid[point], &setup);
      transmission.add(exact_transmission(ops, rho_a));
      ComplexMatrix out_ab = ComplexMatrix::Zero(4, 4);
      for (const auto& k : ops) {
        const ComplexMatrix full = tensor(k, Mat2::Identity());
        out_ab += full * rho_ab.matrix() * full.adjoint();
      }
      entanglement.add(tangle(DensityMatrix::normalized(out_ab)));
    }
    const BandPoint bp{transmission.mean(), transmission.stddev(), entanglement.mean(), entanglement.stddev()};
    out.push_back(bp);
  }
  return out;
}

}  // namespace dampchan
