#include "dampchan/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace dampchan {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, int line) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": expected a number, got '" + v + "'");
  }
  return out;
}

template <class Int>
Int to_integer(const std::string& v, int line) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("line " + std::to_string(line) + ": expected an integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& v, int line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("line " + std::to_string(line) + ": expected a boolean, got '" + v + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string_view case_name(ChannelCase c) {
  switch (c) {
    case ChannelCase::AmplitudeDamping:
      return "amplitude_damping";
    case ChannelCase::BitFlip:
      return "bitflip";
    case ChannelCase::Intermediate:
      return "intermediate";
  }
  return "unknown";
}

ChannelCase parse_case(std::string_view name) {
  for (const auto c : {ChannelCase::AmplitudeDamping, ChannelCase::BitFlip, ChannelCase::Intermediate}) {
    if (case_name(c) == name) return c;
  }
  throw ConfigError("unknown case '" + std::string(name) + "'");
}

double alpha_for(ChannelCase c, double beta) {
  switch (c) {
    case ChannelCase::AmplitudeDamping:
      return 0.0;
    case ChannelCase::BitFlip:
      return beta;
    case ChannelCase::Intermediate:
      return 2.0 * beta / 3.0;
  }
  return 0.0;
}

DampingParams params_for(ChannelCase c, double beta) { return make_damping_params(alpha_for(c, beta), beta); }

std::string_view input_model_name(InputModel m) { return m == InputModel::Ideal ? "ideal" : "reconstructed"; }

InputModel parse_input_model(std::string_view name) {
  if (name == "ideal") return InputModel::Ideal;
  if (name == "reconstructed") return InputModel::Reconstructed;
  throw ConfigError("unknown input_state '" + std::string(name) + "'");
}

std::vector<double> uniform_beta_grid(int n) {
  if (n < 0) throw ConfigError("beta_points must be >= 0");
  std::vector<double> grid;
  const double half_pi = std::numbers::pi / 2.0;
  for (int i = 0; i < n; ++i) grid.push_back(n == 1 ? 0.0 : half_pi * i / (n - 1));
  return grid;
}

void RunConfig::validate() const {
  const double half_pi = std::numbers::pi / 2.0;
  for (const double b : beta_grid) {
    if (!std::isfinite(b) || b < 0.0 || b > half_pi + 1e-12) {
      throw ConfigError("beta_grid values must lie in [0, pi/2], got " + format_number(b));
    }
  }
  if (!(flux > 0.0) || !std::isfinite(flux)) throw ConfigError("flux must be positive");
  if (trials < 2) throw ConfigError("trials must be >= 2");
  if (shots == 0) throw ConfigError("shots must be positive");
  if (band_trials < 2) throw ConfigError("band_trials must be >= 2");
  if (perturbation.hwp_sigma_deg < 0.0 || perturbation.lcr_sigma < 0.0) {
    throw ConfigError("perturbation sigmas must be non-negative");
  }
  if (!(input_visibility > 1.0 / 3.0) || input_visibility > 1.0) {
    throw ConfigError("input_visibility must lie in (1/3, 1] for a faithful entangled source");
  }
  if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
}

RunConfig parse_config(std::istream& is) {
  RunConfig c;
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(std::string_view(raw).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    try {
      if (key == "case") {
        c.channel_case = parse_case(value);
      } else if (key == "beta_grid") {
        c.beta_grid.clear();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
          const std::string t = trim(item);
          if (!t.empty()) c.beta_grid.push_back(to_double(t, line));
        }
      } else if (key == "beta_points") {
        c.beta_grid = uniform_beta_grid(to_integer<int>(value, line));
      } else if (key == "flux") {
        c.flux = to_double(value, line);
      } else if (key == "trials") {
        c.trials = to_integer<int>(value, line);
      } else if (key == "shots") {
        c.shots = to_integer<std::uint64_t>(value, line);
      } else if (key == "band_trials") {
        c.band_trials = to_integer<int>(value, line);
      } else if (key == "hwp_sigma_deg") {
        c.perturbation.hwp_sigma_deg = to_double(value, line);
      } else if (key == "lcr_sigma") {
        c.perturbation.lcr_sigma = to_double(value, line);
      } else if (key == "perturbation_seed") {
        c.perturbation.seed = to_integer<std::uint64_t>(value, line);
      } else if (key == "seed") {
        c.seed = to_integer<std::uint64_t>(value, line);
      } else if (key == "output_dir") {
        c.output_dir = value;
      } else if (key == "noiseless") {
        c.noiseless = to_bool(value, line);
      } else if (key == "input_state") {
        c.input_model = parse_input_model(value);
      } else if (key == "input_visibility") {
        c.input_visibility = to_double(value, line);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      throw ConfigError("line " + std::to_string(line) + ": " + msg);
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

void write_config(std::ostream& os, const RunConfig& c) {
  os << "case = " << case_name(c.channel_case) << '\n';
  os << "beta_grid = ";
  for (std::size_t i = 0; i < c.beta_grid.size(); ++i) os << (i ? ", " : "") << format_number(c.beta_grid[i]);
  os << '\n';
  os << "flux = " << format_number(c.flux) << '\n';
  os << "trials = " << c.trials << '\n';
  os << "shots = " << c.shots << '\n';
  os << "band_trials = " << c.band_trials << '\n';
  os << "hwp_sigma_deg = " << format_number(c.perturbation.hwp_sigma_deg) << '\n';
  os << "lcr_sigma = " << format_number(c.perturbation.lcr_sigma) << '\n';
  os << "perturbation_seed = " << c.perturbation.seed << '\n';
  os << "seed = " << c.seed << '\n';
  os << "output_dir = " << c.output_dir << '\n';
  os << "noiseless = " << (c.noiseless ? "true" : "false") << '\n';
  os << "input_state = " << input_model_name(c.input_model) << '\n';
  os << "input_visibility = " << format_number(c.input_visibility) << '\n';
}

}  // namespace dampchan
