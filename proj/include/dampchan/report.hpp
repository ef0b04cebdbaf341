#pragma once

// Result persistence: results.csv, run.json and SVG figure panels.

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "dampchan/experiment.hpp"

namespace dampchan {

// Output directory or file could not be written or read back.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kCsvHeader =
    "case,alpha,beta,psucc_analytic,psucc_sim,psucc_sigma,tangle,tangle_sigma,fidelity,fidelity_sigma,"
    "trace_distance,trace_distance_sigma";

// Shortest round-trip decimal, locale independent; NaN prints as "nan".
std::string format_value(double v);

void write_results_csv(std::ostream& os, const ExperimentRun& run);

std::string run_to_json(const ExperimentRun& run);
ExperimentRun run_from_json(const std::string& text);
ExperimentRun load_run(const std::filesystem::path& path);

// Deterministic digest of the result fields (not wall clock), one
// `key: value` per line.
std::string summarize(const ExperimentRun& run);

/// A single plot: optional shaded band, a theory polyline and data points
/// with vertical error bars. NaN points are skipped.
struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> theory_x, theory_y;
  std::vector<double> x, y, y_err;
  std::vector<double> band_x, band_lo, band_hi;
};

void write_panel_svg(std::ostream& os, const Panel& panel);

// Real and imaginary parts of reconstructed and ideal chi as four heat maps.
void write_chi_svg(std::ostream& os, const ChiDump& dump);

// The figure's panels, in emission order.
std::vector<std::pair<std::string, Panel>> figure_panels(const ExperimentRun& run);

// Writes results.csv, run.json, one SVG per panel and, when present, the chi
// dump (chi_dump.csv, fig3b_chi.svg). Returns the paths written.
std::vector<std::filesystem::path> emit_outputs(const ExperimentRun& run, const std::filesystem::path& dir);

}  // namespace dampchan
