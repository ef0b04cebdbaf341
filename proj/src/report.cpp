#include "dampchan/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dampchan/metrics.hpp"

namespace dampchan {

namespace {

using nlohmann::json;

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr int kTheorySamples = 201;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_nan(const json& j) { return j.is_number() ? j.get<double>() : kMissing; }

json matrix_json(const Mat4& m) {
  json re = json::array(), im = json::array();
  for (int r = 0; r < 4; ++r) {
    json rr = json::array(), ii = json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return json{{"real", re}, {"imag", im}};
}

Mat4 matrix_from_json(const json& j) {
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = cplx(j.at("real").at(r).at(c).get<double>(), j.at("imag").at(r).at(c).get<double>());
  }
  return m;
}

json config_json(const RunConfig& c) {
  return json{
      {"case", case_name(c.channel_case)},
      {"beta_grid", c.beta_grid},
      {"flux", c.flux},
      {"trials", c.trials},
      {"shots", c.shots},
      {"band_trials", c.band_trials},
      {"perturbation",
       {{"hwp_sigma_deg", c.perturbation.hwp_sigma_deg},
        {"lcr_sigma", c.perturbation.lcr_sigma},
        {"seed", c.perturbation.seed}}},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"noiseless", c.noiseless},
      {"input_state", input_model_name(c.input_model)},
      {"input_visibility", c.input_visibility},
  };
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.channel_case = parse_case(j.at("case").get<std::string>());
  c.beta_grid = j.at("beta_grid").get<std::vector<double>>();
  c.flux = j.at("flux").get<double>();
  c.trials = j.at("trials").get<int>();
  c.shots = j.at("shots").get<std::uint64_t>();
  c.band_trials = j.at("band_trials").get<int>();
  c.perturbation.hwp_sigma_deg = j.at("perturbation").at("hwp_sigma_deg").get<double>();
  c.perturbation.lcr_sigma = j.at("perturbation").at("lcr_sigma").get<double>();
  c.perturbation.seed = j.at("perturbation").at("seed").get<std::uint64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.output_dir = j.at("output_dir").get<std::string>();
  c.noiseless = j.at("noiseless").get<bool>();
  c.input_model = parse_input_model(j.at("input_state").get<std::string>());
  c.input_visibility = j.at("input_visibility").get<double>();
  return c;
}

// Every PointResult field, in one place, for JSON in both directions.
template <class F>
void for_each_field(PointResult& p, F&& f) {
  f("alpha", p.alpha);
  f("beta", p.beta);
  f("psucc_analytic", p.psucc_analytic);
  f("psucc_sim", p.psucc_sim);
  f("psucc_sigma", p.psucc_sigma);
  f("tangle", p.tangle);
  f("tangle_sigma", p.tangle_sigma);
  f("fidelity", p.fidelity);
  f("fidelity_sigma", p.fidelity_sigma);
  f("trace_distance", p.trace_distance);
  f("trace_distance_sigma", p.trace_distance_sigma);
  f("tangle_theory", p.tangle_theory);
  f("band_psucc_mean", p.band_psucc_mean);
  f("band_psucc_std", p.band_psucc_std);
  f("band_tangle_mean", p.band_tangle_mean);
  f("band_tangle_std", p.band_tangle_std);
}

// Fixed two-decimal coordinates keep SVG output byte-stable.
std::string coord(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (const char ch : s) {
    switch (ch) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += ch;
    }
  }
  return out;
}

std::vector<double> theory_grid() {
  std::vector<double> xs;
  for (int i = 0; i < kTheorySamples; ++i) xs.push_back(kHalfPi * i / (kTheorySamples - 1));
  return xs;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw OutputError("write failed for '" + path.string() + "'");
}

Panel make_panel(std::string title, std::string y_label) {
  Panel p;
  p.title = std::move(title);
  p.x_label = "β (rad)";
  p.y_label = std::move(y_label);
  return p;
}

void write_chi_csv(std::ostream& os, const ChiDump& dump) {
  static constexpr const char* kNames = "IXYZ";
  os << "matrix,part,row,col,value\n";
  for (const auto& [name, m] : {std::pair{"reconstructed", dump.reconstructed}, std::pair{"ideal", dump.ideal}}) {
    for (const char* part : {"re", "im"}) {
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const double v = part[0] == 'r' ? m(r, c).real() : m(r, c).imag();
          os << name << ',' << part << ',' << kNames[r] << ',' << kNames[c] << ',' << format_value(v) << '\n';
        }
      }
    }
  }
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& os, const ExperimentRun& run) {
  os << kCsvHeader << '\n';
  const std::string_view name = case_name(run.config.channel_case);
  for (const auto& p : run.points) {
    os << name;
    for (const double v : {p.alpha, p.beta, p.psucc_analytic, p.psucc_sim, p.psucc_sigma, p.tangle, p.tangle_sigma,
                           p.fidelity, p.fidelity_sigma, p.trace_distance, p.trace_distance_sigma}) {
      os << ',' << format_value(v);
    }
    os << '\n';
  }
}

std::string run_to_json(const ExperimentRun& run) {
  json points = json::array();
  for (PointResult p : run.points) {
    json jp = json::object();
    for_each_field(p, [&jp](const char* key, double& v) { jp[key] = number(v); });
    jp["failures"] = p.failures;
    jp["error"] = p.error;
    points.push_back(jp);
  }
  json j{
      {"software", "dampchan"},
      {"version", run.version},
      {"figure", run.figure},
      {"wall_clock_seconds", run.wall_clock_seconds},
      {"config", config_json(run.config)},
      {"points", points},
      {"input_state", run.input_state ? matrix_json(*run.input_state) : json(nullptr)},
      {"chi_dump", nullptr},
  };
  if (run.chi_dump) {
    j["chi_dump"] = json{{"alpha", run.chi_dump->alpha},
                         {"beta", run.chi_dump->beta},
                         {"reconstructed", matrix_json(run.chi_dump->reconstructed)},
                         {"ideal", matrix_json(run.chi_dump->ideal)}};
  }
  return j.dump(2) + "\n";
}

ExperimentRun run_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ExperimentRun run;
    run.version = j.at("version").get<std::string>();
    run.figure = j.at("figure").get<std::string>();
    run.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    run.config = config_from_json(j.at("config"));
    for (const auto& jp : j.at("points")) {
      PointResult p;
      for_each_field(p, [&jp](const char* key, double& v) { v = number_or_nan(jp.at(key)); });
      p.failures = jp.at("failures").get<int>();
      p.error = jp.at("error").get<std::string>();
      run.points.push_back(p);
    }
    if (!j.at("input_state").is_null()) run.input_state = matrix_from_json(j.at("input_state"));
    if (const json& d = j.at("chi_dump"); !d.is_null()) {
      run.chi_dump = ChiDump{d.at("alpha").get<double>(), d.at("beta").get<double>(),
                             matrix_from_json(d.at("reconstructed")), matrix_from_json(d.at("ideal"))};
    }
    return run;
  } catch (const json::exception& e) {
    throw OutputError(std::string("malformed run.json: ") + e.what());
  }
}

ExperimentRun load_run(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError("cannot open '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return run_from_json(ss.str());
}

std::string summarize(const ExperimentRun& run) {
  std::ostringstream os;
  os << "figure: " << run.figure << '\n';
  os << "case: " << case_name(run.config.channel_case) << '\n';
  os << "points: " << run.points.size() << '\n';
  os << "failures: " << run.failure_count() << '\n';
  for (PointResult p : run.points) {
    const char* sep = "";
    for_each_field(p, [&os, &sep](const char* key, double& v) {
      if (std::isnan(v)) return;
      os << sep << key << '=' << format_value(v);
      sep = " ";
    });
    os << '\n';
  }
  return os.str();
}

void write_panel_svg(std::ostream& os, const Panel& panel) {
  constexpr double kWidth = 640, kHeight = 420;
  constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const auto extend = [&](double v) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  for (const double v : panel.theory_y) extend(v);
  for (std::size_t i = 0; i < panel.y.size(); ++i) {
    const double e = i < panel.y_err.size() && std::isfinite(panel.y_err[i]) ? panel.y_err[i] : 0.0;
    extend(panel.y[i] - e);
    extend(panel.y[i] + e);
  }
  for (const double v : panel.band_lo) extend(v);
  for (const double v : panel.band_hi) extend(v);
  if (!std::isfinite(lo)) {
    lo = 0.0;
    hi = 1.0;
  }
  const double pad = std::max(0.05 * (hi - lo), 1e-3);
  lo -= pad;
  hi += pad;

  const auto px = [&](double x) { return kLeft + plot_w * x / kHalfPi; };
  const auto py = [&](double y) { return kTop + plot_h * (hi - y) / (hi - lo); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(kWidth) << "\" height=\"" << coord(kHeight)
     << "\" viewBox=\"0 0 " << coord(kWidth) << ' ' << coord(kHeight) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << coord(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
     << escape_xml(panel.title) << "</text>\n";

  // Axes with ticks at multiples of pi/8 and five y ticks.
  os << "<g id=\"axes\" stroke=\"black\" fill=\"none\">\n";
  os << "<rect x=\"" << coord(kLeft) << "\" y=\"" << coord(kTop) << "\" width=\"" << coord(plot_w) << "\" height=\""
     << coord(plot_h) << "\"/>\n";
  os << "</g>\n<g id=\"ticks\" font-size=\"11\">\n";
  static constexpr const char* kXTicks[] = {"0", "π/8", "π/4", "3π/8", "π/2"};
  for (int k = 0; k <= 4; ++k) {
    const double x = px(kHalfPi * k / 4);
    os << "<line x1=\"" << coord(x) << "\" y1=\"" << coord(kTop + plot_h) << "\" x2=\"" << coord(x) << "\" y2=\""
       << coord(kTop + plot_h + 5) << "\" stroke=\"black\"/>";
    os << "<text x=\"" << coord(x) << "\" y=\"" << coord(kTop + plot_h + 18) << "\" text-anchor=\"middle\">"
       << kXTicks[k] << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4;
    os << "<line x1=\"" << coord(kLeft - 5) << "\" y1=\"" << coord(py(v)) << "\" x2=\"" << coord(kLeft) << "\" y2=\""
       << coord(py(v)) << "\" stroke=\"black\"/>";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 3);
    os << "<text x=\"" << coord(kLeft - 8) << "\" y=\"" << coord(py(v) + 4) << "\" text-anchor=\"end\">"
       << std::string(buf, res.ptr) << "</text>\n";
  }
  os << "</g>\n";
  os << "<text x=\"" << coord(kLeft + plot_w / 2) << "\" y=\"" << coord(kHeight - 12)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape_xml(panel.x_label) << "</text>\n";
  os << "<text x=\"18\" y=\"" << coord(kTop + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << coord(kTop + plot_h / 2) << ")\">" << escape_xml(panel.y_label) << "</text>\n";

  std::vector<std::size_t> band_idx;
  for (std::size_t i = 0; i < panel.band_x.size(); ++i) {
    if (std::isfinite(panel.band_lo[i]) && std::isfinite(panel.band_hi[i])) band_idx.push_back(i);
  }
  if (!band_idx.empty()) {
    os << "<polygon id=\"band\" class=\"band\" fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\" points=\"";
    for (const auto i : band_idx) os << coord(px(panel.band_x[i])) << ',' << coord(py(panel.band_hi[i])) << ' ';
    for (auto it = band_idx.rbegin(); it != band_idx.rend(); ++it) {
      os << coord(px(panel.band_x[*it])) << ',' << coord(py(panel.band_lo[*it])) << ' ';
    }
    os << "\"/>\n";
  }

  if (!panel.theory_x.empty()) {
    os << "<polyline id=\"theory\" class=\"theory\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < panel.theory_x.size(); ++i) {
      if (i) os << ' ';
      os << coord(px(panel.theory_x[i])) << ',' << coord(py(panel.theory_y[i]));
    }
    os << "\"/>\n";
  }

  os << "<g id=\"data\" class=\"data\" fill=\"black\" stroke=\"black\">\n";
  for (std::size_t i = 0; i < panel.x.size(); ++i) {
    if (!std::isfinite(panel.y[i])) continue;
    const double e = i < panel.y_err.size() && std::isfinite(panel.y_err[i]) ? panel.y_err[i] : 0.0;
    if (e > 0.0) {
      os << "<line x1=\"" << coord(px(panel.x[i])) << "\" y1=\"" << coord(py(panel.y[i] - e)) << "\" x2=\""
         << coord(px(panel.x[i])) << "\" y2=\"" << coord(py(panel.y[i] + e)) << "\"/>";
    }
    os << "<circle cx=\"" << coord(px(panel.x[i])) << "\" cy=\"" << coord(py(panel.y[i])) << "\" r=\"3\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

void write_chi_svg(std::ostream& os, const ChiDump& dump) {
  static constexpr const char* kNames[] = {"I", "X", "Y", "Z"};
  constexpr double kCell = 40, kGap = 60, kLeft = 40, kTop = 60;
  const double block = 4 * kCell;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << coord(2 * kLeft + 2 * block + kGap) << "\" height=\""
     << coord(kTop + 2 * block + kGap + 20) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const std::array<std::pair<const char*, const Mat4*>, 2> mats{{{"reconstructed", &dump.reconstructed},
                                                                 {"ideal", &dump.ideal}}};
  for (int which = 0; which < 2; ++which) {
    for (int part = 0; part < 2; ++part) {
      const double x0 = kLeft + part * (block + kGap);
      const double y0 = kTop + which * (block + kGap);
      os << "<g id=\"" << mats[static_cast<std::size_t>(which)].first << (part ? "_imag" : "_real") << "\">\n";
      os << "<text x=\"" << coord(x0 + block / 2) << "\" y=\"" << coord(y0 - 22) << "\" text-anchor=\"middle\" font-size=\"13\">"
         << (part ? "Im " : "Re ") << mats[static_cast<std::size_t>(which)].first << " χ</text>\n";
      for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
          const cplx z = (*mats[static_cast<std::size_t>(which)].second)(r, c);
          const double v = std::clamp(part ? z.imag() : z.real(), -0.5, 0.5);
          // White at zero, red for positive, blue for negative entries.
          const int fade = static_cast<int>(std::lround(255.0 * (1.0 - 2.0 * std::abs(v))));
          const int red = v >= 0 ? 255 : fade;
          const int blue = v >= 0 ? fade : 255;
          os << "<rect x=\"" << coord(x0 + c * kCell) << "\" y=\"" << coord(y0 + r * kCell) << "\" width=\""
             << coord(kCell) << "\" height=\"" << coord(kCell) << "\" fill=\"rgb(" << red << ',' << fade << ',' << blue
             << ")\" stroke=\"gray\"/>";
          char buf[32];
          const auto res = std::to_chars(buf, buf + sizeof buf, part ? z.imag() : z.real(), std::chars_format::fixed, 3);
          os << "<text x=\"" << coord(x0 + (c + 0.5) * kCell) << "\" y=\"" << coord(y0 + (r + 0.5) * kCell + 4)
             << "\" text-anchor=\"middle\" font-size=\"9\">" << std::string(buf, res.ptr) << "</text>\n";
        }
        os << "<text x=\"" << coord(x0 - 8) << "\" y=\"" << coord(y0 + (r + 0.5) * kCell + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << kNames[r] << "</text>";
        os << "<text x=\"" << coord(x0 + (r + 0.5) * kCell) << "\" y=\"" << coord(y0 - 6)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << kNames[r] << "</text>\n";
      }
      os << "</g>\n";
    }
  }
  os << "</svg>\n";
}

std::vector<std::pair<std::string, Panel>> figure_panels(const ExperimentRun& run) {
  const ChannelCase cc = run.config.channel_case;
  const std::vector<double> fine = theory_grid();
  const std::string case_label = std::string(case_name(cc));
  std::vector<std::pair<std::string, Panel>> panels;

  const auto collect = [&run](Panel& p, double PointResult::*value, double PointResult::*err) {
    for (const auto& r : run.points) {
      p.x.push_back(r.beta);
      p.y.push_back(r.*value);
      p.y_err.push_back(err ? r.*err : 0.0);
    }
  };
  const auto psucc_theory = [&](Panel& p) {
    for (const double b : fine) {
      p.theory_x.push_back(b);
      p.theory_y.push_back(analytic_success(params_for(cc, b)).success);
    }
  };

  if (run.figure == "psucc") {
    Panel p = make_panel("Success probability (" + case_label + ")", "p_succ");
    psucc_theory(p);
    collect(p, &PointResult::psucc_analytic, nullptr);
    panels.emplace_back("psucc.svg", std::move(p));
  } else if (run.figure == "fig2") {
    Panel a = make_panel("Success probability (" + case_label + ")", "p_succ");
    psucc_theory(a);
    collect(a, &PointResult::psucc_sim, &PointResult::psucc_sigma);
    Panel b = make_panel("Output tangle (" + case_label + ")", "tangle");
    const DensityMatrix input = run.input_state ? DensityMatrix(*run.input_state) : phi_plus_state();
    for (const double beta : fine) {
      b.theory_x.push_back(beta);
      b.theory_y.push_back(tangle(apply_channel(damping_kraus(params_for(cc, beta)), input, ApplyMode::AOnly)));
    }
    collect(b, &PointResult::tangle, &PointResult::tangle_sigma);
    for (const auto& r : run.points) {
      a.band_x.push_back(r.beta);
      a.band_lo.push_back(r.band_psucc_mean - r.band_psucc_std);
      a.band_hi.push_back(r.band_psucc_mean + r.band_psucc_std);
      b.band_x.push_back(r.beta);
      b.band_lo.push_back(r.band_tangle_mean - r.band_tangle_std);
      b.band_hi.push_back(r.band_tangle_mean + r.band_tangle_std);
    }
    panels.emplace_back("fig2a_psucc.svg", std::move(a));
    panels.emplace_back("fig2b_tangle.svg", std::move(b));
  } else if (run.figure == "fig3") {
    Panel f = make_panel("Process fidelity (" + case_label + ")", "F");
    Panel d = make_panel("Maximum trace distance (" + case_label + ")", "D");
    for (const double beta : fine) {
      f.theory_x.push_back(beta);
      f.theory_y.push_back(1.0);
      d.theory_x.push_back(beta);
      d.theory_y.push_back(0.0);
    }
    collect(f, &PointResult::fidelity, &PointResult::fidelity_sigma);
    collect(d, &PointResult::trace_distance, &PointResult::trace_distance_sigma);
    panels.emplace_back("fig3a_fidelity.svg", std::move(f));
    panels.emplace_back("fig3a_trace_distance.svg", std::move(d));
  }
  return panels;
}

std::vector<std::filesystem::path> emit_outputs(const ExperimentRun& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw OutputError("cannot create output directory '" + dir.string() + "'");
  }
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };

  std::ostringstream csv;
  write_results_csv(csv, run);
  emit("results.csv", csv.str());
  emit("run.json", run_to_json(run));
  for (const auto& [name, panel] : figure_panels(run)) {
    std::ostringstream svg;
    write_panel_svg(svg, panel);
    emit(name, svg.str());
  }
  if (run.chi_dump) {
    std::ostringstream chi_csv, chi_svg;
    write_chi_csv(chi_csv, *run.chi_dump);
    write_chi_svg(chi_svg, *run.chi_dump);
    emit("chi_dump.csv", chi_csv.str());
    emit("fig3b_chi.svg", chi_svg.str());
  }
  return written;
}

}  // namespace dampchan
