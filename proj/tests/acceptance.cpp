// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dampchan/channel.hpp"
#include "dampchan/experiment.hpp"
#include "dampchan/metrics.hpp"
#include "dampchan/optics.hpp"
#include "dampchan/report.hpp"
#include "dampchan/rng.hpp"
#include "dampchan/tomography.hpp"

namespace {

using namespace dampchan;
constexpr double kPi = std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(const char* id, const std::function<Verdict()>& check, double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (s > budget_s) {
    v.pass = false;
    v.detail += " (over time budget)";
  }
  if (!v.pass) ++failures;
  std::printf("%s %s  %s  [%.1fs]\n", id, v.pass ? "PASS" : "FAIL", v.detail.c_str(), s);
  std::fflush(stdout);
}

double eq2(const DampingParams& p) {
  return 1.0 / (std::pow(std::cos(p.alpha), 2) + std::pow(std::sin(p.beta), 2));
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict success_law() {
  const DensityMatrix rho(Mat2::Identity() / 2.0);
  const std::uint64_t shots = 1000000;
  double worst_z = 0.0, full = 0.0, flip_dev = 0.0;
  std::uint64_t seed = 100;
  for (const auto c : {ChannelCase::AmplitudeDamping, ChannelCase::BitFlip, ChannelCase::Intermediate}) {
    for (const double b : uniform_beta_grid(13)) {
      const DampingParams p = params_for(c, b);
      const double expect = eq2(p);
      const TransmissionEstimate e = simulate_transmission(p, rho, shots, std::nullopt, seed++);
      const double sigma = std::sqrt(expect * (1 - expect) / static_cast<double>(shots));
      const double dev = std::abs(e.value - expect);
      if (sigma > 0) worst_z = std::max(worst_z, dev / sigma);
      else if (dev > 0) worst_z = INFINITY;
      if (c == ChannelCase::AmplitudeDamping && b == kPi / 2) full = e.value;
      if (c == ChannelCase::BitFlip) flip_dev = std::max(flip_dev, std::abs(e.value - 1.0));
    }
  }
  const bool ok = worst_z <= 4.0 && std::abs(full - 0.5) <= 0.002 && flip_dev < 5e-4;
  return {ok, fmt("max |z| %.2f (<= 4), full damping %.4f, bit-flip max |p-1| %.1e", worst_z, full, flip_dev)};
}

Verdict optimality() {
  std::mt19937_64 gen(7);
  double worst_excess = -1.0, worst_recovery = 0.0;
  int points = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double a = kPi / 2 * i / 9, b = kPi / 2 * j / 9;
      if (a > b) continue;
      ++points;
      const DampingParams p{a, b};
      const KrausSet k = damping_kraus(p);
      const double best = optimal_success_probability(k).success;
      worst_excess = std::max(worst_excess, best - eq2(p));
      const KrausSet mixed = remix(k, random_unitary(2, gen));
      worst_recovery = std::max(worst_recovery, std::abs(optimal_success_probability(mixed).success - eq2(p)));
    }
  }
  const bool ok = worst_excess <= 1e-6 && worst_recovery <= 1e-6;
  return {ok, fmt("%g points, max excess over closed form %.1e, max recovery error %.1e", points, worst_excess,
                  worst_recovery)};
}

Verdict optics_contract() {
  double worst = 0.0, worst_norm = 0.0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double b = kPi / 2 * j / 19, a = b * i / 19;
      const DampingParams p{a, b};
      const KrausSet k = damping_kraus(p);
      const OpticalLayout layout = OpticalLayout::canonical(p);
      for (int c = 0; c < 2; ++c) {
        const Mat2& target = k[static_cast<std::size_t>(c)];
        const double n = operator_norm(target);
        if (n < 1e-12) continue;
        const Mat2 m = conditional_operator(layout, kraus_configuration(c));
        Eigen::Index r = 0, col = 0;
        target.cwiseAbs().maxCoeff(&r, &col);
        const cplx phase = (target(r, col) / n) / m(r, col);
        worst = std::max(worst, (m * (phase / std::abs(phase)) - target / n).cwiseAbs().maxCoeff());
        worst_norm = std::max(worst_norm, std::abs(operator_norm(m) - 1.0));
      }
    }
  }
  const Vec2 d = (ket_h() + ket_v()) / std::sqrt(2.0);
  const Vec2 rc = (ket_h() + cplx(0, 1) * ket_v()) / std::sqrt(2.0);
  double worst_z = 0.0;
  std::uint64_t seed = 300;
  for (const DampingParams p : {DampingParams{0.0, kPi / 3}, DampingParams{0.4, 1.2}, DampingParams{0.2, 0.5}}) {
    const double expect = eq2(p);
    const double sigma = std::sqrt(expect * (1 - expect) / 1e6);
    for (const Vec2& ket : {ket_h(), ket_v(), d, rc}) {
      const double v = simulate_transmission(p, DensityMatrix::pure(ket), 1000000, std::nullopt, seed++).value;
      worst_z = std::max(worst_z, std::abs(v - expect) / sigma);
    }
  }
  const bool ok = worst <= 1e-9 && worst_norm <= 1e-9 && worst_z <= 4.0;
  return {ok, fmt("max |M - A/||A|||  %.1e, max | ||M|| - 1 | %.1e, input-independence max |z| %.2f", worst,
                  worst_norm, worst_z)};
}

Verdict tomography_oracle() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, kPi / 2);
  double worst_f = 1.0, worst_tp = 0.0, worst_lin = 0.0;
  int compared = 0;
  for (int t = 0; t < 10; ++t) {
    double a = u(gen), b = u(gen);
    if (a > b) std::swap(a, b);
    const DampingParams p{a, b};
    const KrausSet k = damping_kraus(p);
    DatasetSpec spec;
    spec.output_transmission = eq2(p);
    const TomographyDataset data = synthesize_dataset(k, phi_plus_state(), spec);
    const ReconstructionResult r = reconstruct_process(data);
    worst_f = std::min(worst_f, process_fidelity(r.chi, chi_from_kraus(k)));
    worst_tp = std::max(worst_tp, r.tp_residual);
    const DensityMatrix in = mle_state(data.input_counts);
    const LinearInversion lin = linear_invert_process(in, mle_state(data.output_counts));
    if (Eigen::SelfAdjointEigenSolver<Mat4>(lin.chi).eigenvalues().minCoeff() >= 0.0) {
      ++compared;
      worst_lin = std::max(worst_lin, (r.chi.matrix() - lin.chi / lin.chi.trace().real()).norm());
    }
  }
  const bool ok = 1 - worst_f < 1e-5 && worst_tp < 1e-3 && worst_lin < 1e-5;
  return {ok, fmt("min fidelity 1 - %.1e, max tp residual %.1e, MLE vs inversion %.1e", 1 - worst_f, worst_tp,
                  worst_lin) +
                  " over " + std::to_string(compared) + " PSD inversions"};
}

double fidelity_sigma(double beta, double flux, std::uint64_t seed) {
  const DampingParams p{0.0, beta};
  const KrausSet k = damping_kraus(p);
  const ProcessMatrix truth = chi_from_kraus(k);
  DatasetSpec spec;
  spec.flux = flux;
  spec.output_transmission = eq2(p);
  spec.seed = seed;
  const TomographyDataset data = synthesize_dataset(k, source_state(1.0), spec);
  const DatasetMetric f = [&](const TomographyDataset& d) { return process_fidelity(reconstruct_process(d).chi, truth); };
  return monte_carlo_errorbar(data, f, 100, seed + 1).stddev;
}

// The error bar of one recorded dataset scatters by an order of magnitude
// between datasets (the true chi is rank deficient), so the flux dependence
// is read off the RMS error bar over independent recorded datasets.
double expected_sigma(double beta, double flux) {
  constexpr int kDatasets = 30;
  double sum2 = 0.0;
  for (int r = 0; r < kDatasets; ++r) {
    const double s = fidelity_sigma(beta, flux, 1000 + 10 * static_cast<std::uint64_t>(r));
    sum2 += s * s;
  }
  return std::sqrt(sum2 / kDatasets);
}

Verdict statistical_regime() {
  bool ok = true;
  std::string detail;
  for (const double b : {kPi / 8, kPi / 4, 3 * kPi / 8}) {
    const double s1 = expected_sigma(b, 5e4);
    const double s2 = expected_sigma(b, 1e5);
    const double ratio = s2 / s1;
    ok = ok && s1 >= 2e-4 && s1 <= 5e-3 && std::abs(ratio * std::sqrt(2.0) - 1.0) <= 0.2;
    detail += fmt("beta %.3f: sigma %.2e, ratio %.3f; ", b, s1, ratio);
  }
  // Not scored: at beta = 0 and pi/2 the ideal chi is rank one and the
  // fidelity loss is quadratic in the noise.
  detail += fmt("beta 0: sigma %.1e, beta pi/2: sigma %.1e", fidelity_sigma(0.0, 5e4, 47),
                fidelity_sigma(kPi / 2, 5e4, 47));
  return {ok, detail};
}

Verdict tangle_curves() {
  double worst_closed = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double b = kPi / 2 * i / 49;
    const double damp = tangle(apply_channel(damping_kraus({0.0, b}), phi_plus_state(), ApplyMode::AOnly));
    const double flip = tangle(apply_channel(damping_kraus({b, b}), phi_plus_state(), ApplyMode::AOnly));
    worst_closed = std::max({worst_closed, std::abs(damp - std::pow(std::cos(b), 2)),
                             std::abs(flip - std::pow(std::cos(2 * b), 2))});
  }
  double worst_z = 0.0;
  for (const auto c : {ChannelCase::AmplitudeDamping, ChannelCase::BitFlip}) {
    RunConfig cfg;
    cfg.channel_case = c;
    cfg.input_model = InputModel::Ideal;
    cfg.band_trials = 2;
    cfg.shots = 1000;
    cfg.seed = 17;
    for (const auto& pt : run_fig2(cfg).points) {
      const double dev = std::abs(pt.tangle - pt.tangle_theory);
      worst_z = std::max(worst_z, dev <= 1e-9 ? 0.0 : dev / pt.tangle_sigma);
    }
  }
  const bool ok = worst_closed <= 1e-9 && worst_z <= 3.0;
  return {ok, fmt("closed-form error %.1e, reconstructed tangle max |dev|/sigma %.2f", worst_closed, worst_z)};
}

Verdict trace_distance_extremes() {
  const ProcessMatrix id = chi_from_kraus(damping_kraus({0.0, 0.0}));
  const ProcessMatrix full = chi_from_kraus(damping_kraus({0.0, kPi / 2}));
  const ProcessMatrix mid = chi_from_kraus(damping_kraus({0.3, 0.8}));
  const double same = std::max(max_trace_distance(id, id).distance, max_trace_distance(mid, mid).distance);
  const TraceDistanceResult r = max_trace_distance(full, id);
  const Mat2 vv = ket_v() * ket_v().adjoint();
  const double at_v = (r.input - vv).cwiseAbs().maxCoeff();
  const bool ok = same < 1e-6 && std::abs(r.distance - 1.0) <= 1e-6 && at_v < 1e-3;
  return {ok, fmt("identical %.1e, identity vs full damping %.9f, argmax distance from |V><V| %.1e", same, r.distance,
                  at_v)};
}

Verdict sensitivity() {
  bool ok = true;
  std::string detail;
  for (const double b : {kPi / 8, kPi / 4, 3 * kPi / 8}) {
    const std::vector<DampingParams> damping{{0.0, b}}, flip{{b, b}};
    const SetupPerturbation perturb;
    const double sd = sensitivity_band(damping, perturb, 10000, phi_plus_state())[0].transmission_std;
    const double sf = sensitivity_band(flip, perturb, 10000, phi_plus_state())[0].transmission_std;
    ok = ok && sf < sd;
    detail += fmt("beta %.3f: bit-flip %.2e < damping %.2e; ", b, sf, sd);
  }
  return {ok, detail};
}

Verdict determinism() {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.beta_grid = {kPi / 4, kPi / 2};
  cfg.trials = 20;
  cfg.seed = 23;
  const fs::path a = fs::temp_directory_path() / "dampchan_acceptance_a";
  const fs::path b = fs::temp_directory_path() / "dampchan_acceptance_b";
  const ExperimentRun first = run_fig3(cfg);
  emit_outputs(first, a);
  emit_outputs(run_fig3(cfg), b);
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const bool same = slurp(a / "results.csv") == slurp(b / "results.csv");
  fs::remove_all(a);
  fs::remove_all(b);
  if (!first.chi_dump) return {false, "no chi dump at full damping"};

  // Entry-wise reconstruction noise from Poisson resamplings of the same
  // recorded data the dump came from.
  const DampingParams p{0.0, kPi / 2};
  DatasetSpec spec;
  spec.flux = cfg.flux;
  spec.output_transmission = eq2(p);
  spec.seed = seeded_engine(cfg.seed, 34, 1)();
  const KrausSet k = damping_kraus(p);
  Eigen::Matrix<double, 4, 8> sum = Eigen::Matrix<double, 4, 8>::Zero(), sum2 = sum;
  const int trials = 100;
  {
    const TomographyDataset data = synthesize_dataset(k, source_state(cfg.input_visibility), spec);
    for (int t = 0; t < trials; ++t) {
      auto gen = seeded_engine(99, 0, static_cast<std::uint64_t>(t));
      TomographyDataset s = data;
      s.input_counts = poisson_resample(data.input_counts, gen);
      s.output_counts = poisson_resample(data.output_counts, gen);
      const Mat4 chi = reconstruct_process(s, false).chi.matrix();
      Eigen::Matrix<double, 4, 8> v;
      v << chi.real(), chi.imag();
      sum += v;
      sum2 += v.cwiseProduct(v);
    }
  }
  const Eigen::Matrix<double, 4, 8> mean = sum / trials;
  const Eigen::Matrix<double, 4, 8> sd =
      ((sum2 / trials - mean.cwiseProduct(mean)) * trials / (trials - 1.0)).cwiseMax(0.0).cwiseSqrt();

  const Mat4& rec = first.chi_dump->reconstructed;
  const Mat4& ideal = first.chi_dump->ideal;
  double pattern = 0.0, worst_z = 0.0, worst = 0.0;
  for (int m = 0; m < 4; ++m) {
    for (int n = 0; n < 4; ++n) {
      const double mag = std::abs(ideal(m, n));
      pattern = std::max(pattern, std::abs(mag - (mag > 0.1 ? 0.25 : 0.0)));
      const cplx d = rec(m, n) - ideal(m, n);
      worst = std::max(worst, std::abs(d));
      worst_z = std::max({worst_z, std::abs(d.real()) / std::max(sd(m, n), 1e-12),
                          std::abs(d.imag()) / std::max(sd(m, n + 4), 1e-12)});
    }
  }
  const bool ok = same && pattern < 1e-12 && worst_z <= 4.0;
  return {ok, std::string(same ? "results.csv byte-identical" : "results.csv differs") +
                  fmt(", chi dump max entry error %.1e, max %.2f entry sigmas (<= 4)", worst, worst_z)};
}

}  // namespace

int main() {
  run("AC1", success_law, 60);
  run("AC2", optimality, 300);
  run("AC3", optics_contract, 120);
  run("AC4", tomography_oracle, 120);
  run("AC5", statistical_regime, 600);
  run("AC6", tangle_curves, 300);
  run("AC7", trace_distance_extremes, 60);
  run("AC8", sensitivity, 120);
  run("AC9", determinism, 300);
  return failures == 0 ? 0 : 1;
}
