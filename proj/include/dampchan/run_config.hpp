#pragma once

// Run configuration for the figure pipelines and its flat `key = value`
// text format.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dampchan/channel.hpp"
#include "dampchan/optics.hpp"

namespace dampchan {

// Malformed or out-of-range configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ChannelCase { AmplitudeDamping, BitFlip, Intermediate };

std::string_view case_name(ChannelCase c);
ChannelCase parse_case(std::string_view name);

// alpha = 0, beta, or 2 beta / 3.
double alpha_for(ChannelCase c, double beta);
DampingParams params_for(ChannelCase c, double beta);

enum class InputModel { Ideal, Reconstructed };

std::string_view input_model_name(InputModel m);
InputModel parse_input_model(std::string_view name);

// n uniform points over [0, pi/2], both ends included.
std::vector<double> uniform_beta_grid(int n);

struct RunConfig {
  ChannelCase channel_case = ChannelCase::AmplitudeDamping;
  std::vector<double> beta_grid = uniform_beta_grid(13);
  double flux = 5e4;             // expected coincidences per tomography setting
  int trials = 100;              // Monte-Carlo resamplings per point
  std::uint64_t shots = 1000000;  // photons per point for the transmission estimate
  int band_trials = 200;         // perturbation draws per point for the sensitivity band
  SetupPerturbation perturbation;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  bool noiseless = false;
  // Ideal: the channel acts on |phi+>. Reconstructed: the input is estimated
  // from its own tomography block, as in the experiment.
  InputModel input_model = InputModel::Reconstructed;
  // Source state V |phi+><phi+| + (1 - V) I/4.
  double input_visibility = 1.0;

  // Throws ConfigError.
  void validate() const;
};

// Unknown keys, bad numbers and invalid values raise ConfigError with the
// offending line number.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
void write_config(std::ostream& os, const RunConfig& c);

}  // namespace dampchan
