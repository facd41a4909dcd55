#pragma once

// Command-line front end. Each subcommand builds its dataset in memory and
// writes it as one self-describing CSV (see csv.hpp), optionally with a
// matplotlib script that redraws the figure from that file alone.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "jchk/model.hpp"

namespace jchk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

enum class Subcommand { dispersion, spectrum, lobes, tc_sweep, ed_check };

std::string_view name(Subcommand sub);

struct RunConfig {
  Subcommand subcommand = Subcommand::spectrum;
  double g = 1.0;
  int L = 1000;
  std::vector<double> t_values;
  std::vector<double> eps_values;
  std::vector<double> gamma_values;
  std::vector<int> n_values;
  int k_samples = 201;
  std::vector<double> t_grid;    ///< lobes; empty means 0 .. 1.2 t_c(n=1)
  int lobe_points = 200;         ///< size of the automatic lobe grid
  std::vector<double> eps_grid;  ///< tc-sweep
  NumericsConfig numerics;
  int ed_sites = 2;
  int ed_n_max = 6;
  int ed_max_sector = 4;
  std::filesystem::path output_path;
  bool emit_plot_script = false;
  unsigned threads = 1;  ///< execution only; never changes the output
};

/// Defaults mirror the published figure parameters for each subcommand.
RunConfig default_config(Subcommand sub);

/// Parses argv (argv[0] is the program name). Throws UsageError on any
/// malformed or out-of-range flag; never returns a partially applied config.
RunConfig parse_args(int argc, const char* const* argv);

/// Parses "a,b,c" or the linspace form "start:stop:count".
std::vector<double> parse_real_list(std::string_view text);
std::vector<int> parse_int_list(std::string_view text);
std::vector<double> linspace(double start, double stop, int count);

std::string dispersion_csv(const RunConfig& cfg);
std::string spectrum_csv(const RunConfig& cfg);
std::string lobes_csv(const RunConfig& cfg);

struct TcSweepOutput {
  std::string csv;
  std::size_t failed_rows = 0;
  std::size_t total_rows = 0;
};
TcSweepOutput tc_sweep_csv(const RunConfig& cfg);

struct EdCheckOutput {
  std::string csv;
  std::string report;
  bool passed = true;
};
EdCheckOutput ed_check(const RunConfig& cfg);

/// Plot script for a dataset; empty for subcommands without a figure.
std::string plot_script(Subcommand sub, const std::filesystem::path& csv_path);
std::filesystem::path plot_script_path(const std::filesystem::path& csv_path);

/// Runs the configured subcommand, writes its outputs and returns the exit code.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping; the body of main().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace jchk::cli
