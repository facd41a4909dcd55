#include "jchk/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>

#include "jchk/csv.hpp"
#include "jchk/ed.hpp"
#include "jchk/errors.hpp"
#include "jchk/parallel.hpp"
#include "jchk/phase.hpp"

namespace jchk::cli {

namespace {

constexpr std::array kSubcommands = {Subcommand::dispersion, Subcommand::spectrum, Subcommand::lobes,
                                     Subcommand::tc_sweep, Subcommand::ed_check};

// Acceptance thresholds of the ED cross-check.
constexpr double kZeroHoppingTol = 1e-10;
constexpr double kCommutatorTol = 1e-12;
constexpr double kCutoffTol = 1e-8;
constexpr double kCutoffProbeHopping = 0.05;
constexpr int kCutoffProbeSectors = 2;
constexpr int kCutoffLow = 5;
constexpr int kCutoffHigh = 7;

std::string fmt(double v) { return csv::format_double(v); }

std::string short_fmt(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3g", v);
  return buf.data();
}

template <class T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_same_v<T, double>) {
      out += fmt(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

ModelParams base_params(const RunConfig& cfg) {
  ModelParams p;
  p.g = cfg.g;
  p.L = cfg.L;
  return p;
}

void echo_config(csv::Writer& w, const RunConfig& cfg) {
  w.add_metadata("generator", "jchk");
  w.add_metadata("subcommand", name(cfg.subcommand));
  w.add_metadata("energy_unit", "g");
  w.add_metadata("g", fmt(cfg.g));
  w.add_metadata("L", std::to_string(cfg.L));
  w.add_metadata("t_over_g", join(cfg.t_values));
  w.add_metadata("eps_over_g", join(cfg.eps_values));
  w.add_metadata("gamma_over_g", join(cfg.gamma_values));
  w.add_metadata("n", join(cfg.n_values));
  w.add_metadata("k_samples", std::to_string(cfg.k_samples));
  w.add_metadata("t_grid", cfg.t_grid.empty() ? "auto: 0 .. 1.2 t_c(n=1)" : join(cfg.t_grid));
  w.add_metadata("lobe_points", std::to_string(cfg.lobe_points));
  w.add_metadata("eps_grid", join(cfg.eps_grid));
  w.add_metadata("series_tol", fmt(cfg.numerics.series_tol));
  w.add_metadata("fixpoint_tol", fmt(cfg.numerics.fixpoint_tol));
  w.add_metadata("fixpoint_max_iter", std::to_string(cfg.numerics.fixpoint_max_iter));
  w.add_metadata("damping", fmt(cfg.numerics.damping));
  w.add_metadata("root_tol", fmt(cfg.numerics.root_tol));
  w.add_metadata("ed_L", std::to_string(cfg.ed_sites));
  w.add_metadata("ed_nmax", std::to_string(cfg.ed_n_max));
  w.add_metadata("ed_sectors", std::to_string(cfg.ed_max_sector));
  w.add_metadata("self_consistency", "n0 solved independently per (k, n) sector; large-L form without 1/L term");
}

std::string sanitize(std::string text) {
  std::replace_if(text.begin(), text.end(), [](char c) { return c == ',' || c == '\n' || c == '\r'; }, ';');
  return text;
}

double parse_real(std::string_view text) {
  try {
    return csv::parse_double(text);
  } catch (const InvalidArgument&) {
    throw UsageError("not a number: '" + std::string(text) + "'");
  }
}

int parse_int(std::string_view text) {
  int value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw UsageError("not an integer: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_commas(std::string_view text) {
  if (text.empty()) throw UsageError("empty value list");
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string_view part = text.substr(start, comma - start);
    if (part.empty()) throw UsageError("empty element in list '" + std::string(text) + "'");
    parts.push_back(part);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void require_nonneg(const std::vector<double>& values, const char* what) {
  for (const double v : values) require(std::isfinite(v) && v >= 0.0, std::string(what) + " values must be >= 0");
}

void require_increasing(const std::vector<double>& values, const char* what) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    require(values[i] > values[i - 1], std::string(what) + " must be strictly increasing");
  }
}

void validate(const RunConfig& cfg) {
  require(cfg.L >= 2 && cfg.L % 2 == 0, "--L must be an even integer >= 2");
  require(cfg.k_samples >= 2, "--k-samples must be at least 2");
  require(cfg.threads >= 1, "--threads must be at least 1");
  try {
    cfg.numerics.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  require_nonneg(cfg.t_values, "--t");
  require_nonneg(cfg.eps_values, "--eps");
  require_nonneg(cfg.gamma_values, "--gamma");
  require_nonneg(cfg.t_grid, "--t-grid");
  require_nonneg(cfg.eps_grid, "--eps-grid");
  require_increasing(cfg.t_grid, "--t-grid");
  require_increasing(cfg.eps_grid, "--eps-grid");

  const int n_floor = cfg.subcommand == Subcommand::spectrum ? 0 : 1;
  for (const int n : cfg.n_values) require(n >= n_floor, "--n values must be >= " + std::to_string(n_floor));

  switch (cfg.subcommand) {
    case Subcommand::dispersion:
      require(!cfg.t_values.empty(), "--t needs at least one value");
      break;
    case Subcommand::spectrum:
      require(!cfg.t_values.empty() && !cfg.eps_values.empty() && !cfg.gamma_values.empty() && !cfg.n_values.empty(),
              "spectrum needs non-empty --t, --eps, --gamma and --n");
      break;
    case Subcommand::lobes:
      require(!cfg.eps_values.empty() && !cfg.gamma_values.empty() && !cfg.n_values.empty(),
              "lobes needs non-empty --eps, --gamma and --n");
      require(cfg.lobe_points >= 1, "--lobe-points must be at least 1");
      break;
    case Subcommand::tc_sweep:
      require(!cfg.eps_grid.empty() && !cfg.gamma_values.empty() && !cfg.n_values.empty(),
              "tc-sweep needs non-empty --eps-grid, --gamma and --n");
      break;
    case Subcommand::ed_check: {
      require(cfg.ed_sites >= 1, "--ed-L must be at least 1");
      require(cfg.ed_n_max >= 0, "--ed-nmax must be >= 0");
      require(cfg.ed_max_sector >= 0, "--ed-sectors must be >= 0");
      require(!cfg.eps_values.empty() && !cfg.gamma_values.empty(), "ed-check needs non-empty --eps and --gamma");
      const auto dim_for = [&](int n_max) {
        double dim = 1.0;
        for (int j = 0; j < cfg.ed_sites; ++j) dim *= 2.0 * (n_max + 1);
        return dim;
      };
      const auto cap = static_cast<double>(ed::kMaxDenseDim);
      require(dim_for(cfg.ed_n_max) <= cap, "dimension cap exceeded: (2(n_max+1))^L_ed = " +
                                                short_fmt(dim_for(cfg.ed_n_max)) + " > " +
                                                std::to_string(ed::kMaxDenseDim));
      require(dim_for(kCutoffHigh) <= cap, "dimension cap exceeded by the n_max=" + std::to_string(kCutoffHigh) +
                                               " cutoff probe: " + short_fmt(dim_for(kCutoffHigh)) + " > " +
                                               std::to_string(ed::kMaxDenseDim));
      break;
    }
  }
}

// --- ed-check ------------------------------------------------------------

struct EdRow {
  std::string check;
  double eps;
  double gamma;
  double t;
  int sector;
  double value;
  double reference;
  double difference;
};

double mean_field_energy_per_site(const ModelParams& p, const NumericsConfig& numerics, int k_samples) {
  const std::vector<SectorState> band = spectrum_over_k(1, p, numerics, k_samples);
  double sum = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) {
    const double w = (i == 0 || i + 1 == band.size()) ? 0.5 : 1.0;
    sum += w * band[i].energy;
  }
  return sum / static_cast<double>(band.size() - 1);
}

double lowest_up_to(const std::map<int, std::vector<double>>& spectra) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& [sector, ev] : spectra) lowest = std::min(lowest, ev.front());
  return lowest;
}

}  // namespace

std::string_view name(Subcommand sub) {
  switch (sub) {
    case Subcommand::dispersion: return "dispersion";
    case Subcommand::spectrum: return "spectrum";
    case Subcommand::lobes: return "lobes";
    case Subcommand::tc_sweep: return "tc-sweep";
    case Subcommand::ed_check: return "ed-check";
  }
  return "unknown";
}

std::vector<double> linspace(double start, double stop, int count) {
  if (count < 1) throw UsageError("linspace needs a positive count");
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = start;
    return out;
  }
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = start + (stop - start) * i / (count - 1);
  out.back() = stop;
  return out;
}

std::vector<double> parse_real_list(std::string_view text) {
  if (text.find(':') != std::string_view::npos) {
    const std::size_t a = text.find(':');
    const std::size_t b = text.find(':', a + 1);
    if (b == std::string_view::npos || text.find(':', b + 1) != std::string_view::npos) {
      throw UsageError("range must look like start:stop:count, got '" + std::string(text) + "'");
    }
    return linspace(parse_real(text.substr(0, a)), parse_real(text.substr(a + 1, b - a - 1)),
                    parse_int(text.substr(b + 1)));
  }
  std::vector<double> out;
  for (const auto part : split_commas(text)) out.push_back(parse_real(part));
  return out;
}

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  for (const auto part : split_commas(text)) out.push_back(parse_int(part));
  return out;
}

RunConfig default_config(Subcommand sub) {
  RunConfig cfg;
  cfg.subcommand = sub;
  cfg.output_path = std::string(name(sub)) + ".csv";
  switch (sub) {
    case Subcommand::dispersion:
      cfg.t_values = {0.2};
      break;
    case Subcommand::spectrum:
      cfg.t_values = {0.001, 0.2};
      cfg.eps_values = {0.0};
      cfg.gamma_values = {0.0};
      cfg.n_values = {1};
      break;
    case Subcommand::lobes:
      cfg.eps_values = {0.0, 1.0};
      cfg.gamma_values = {0.0, 0.01};
      cfg.n_values = {1, 2, 3};
      break;
    case Subcommand::tc_sweep:
      cfg.gamma_values = {0.0, 0.005, 0.01};
      cfg.n_values = {1, 3, 6};
      cfg.eps_grid = linspace(0.0, 1.5, 50);
      break;
    case Subcommand::ed_check:
      cfg.t_values = {0.0, 0.01, 0.02, 0.05};
      cfg.eps_values = {0.0, 1.0};
      cfg.gamma_values = {0.0, 0.01};
      break;
  }
  return cfg;
}

namespace {

struct SubcommandOptions {
  CLI::App* app = nullptr;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool plot = false;
};

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help = {
      {"t", "hopping t/g: list a,b,c or range start:stop:count"},
      {"eps", "atomic frequency eps/g (list or range)"},
      {"gamma", "Kerr constant gamma/g (list or range)"},
      {"n", "excitation numbers, comma list"},
      {"L", "chain length (even)"},
      {"k-samples", "momentum grid points over [0, L]"},
      {"t-grid", "hopping grid for lobe tracing (list or range)"},
      {"eps-grid", "eps/g grid for the critical-hopping sweep (list or range)"},
      {"out", "output CSV path"},
      {"series-tol", "dispersion series truncation tolerance"},
      {"fixpoint-tol", "photon-density self-consistency tolerance"},
      {"root-tol", "critical hopping bracket tolerance"},
      {"ed-L", "cavities in the exact-diagonalization chain"},
      {"ed-nmax", "photon cutoff per cavity"},
      {"ed-sectors", "largest total excitation sector compared at t = 0"},
      {"lobe-points", "points of the automatic lobe grid"},
      {"threads", "worker threads for sweeps (output is unaffected)"},
  };
  return help;
}

std::vector<std::string> flags_for(Subcommand sub) {
  switch (sub) {
    case Subcommand::dispersion: return {"t", "L", "k-samples", "out", "series-tol"};
    case Subcommand::spectrum:
      return {"t", "eps", "gamma", "n", "L", "k-samples", "out", "series-tol", "fixpoint-tol", "threads"};
    case Subcommand::lobes:
      return {"eps", "gamma", "n", "L", "t-grid", "lobe-points", "out", "series-tol", "fixpoint-tol", "root-tol",
              "threads"};
    case Subcommand::tc_sweep:
      return {"gamma", "n", "L", "eps-grid", "out", "series-tol", "fixpoint-tol", "root-tol", "threads"};
    case Subcommand::ed_check:
      return {"t", "eps", "gamma", "L", "k-samples", "ed-L", "ed-nmax", "ed-sectors", "out", "series-tol",
              "fixpoint-tol"};
  }
  return {};
}

RunConfig apply(Subcommand sub, const SubcommandOptions& raw) {
  RunConfig cfg = default_config(sub);
  const auto given = [&](const std::string& flag) -> const std::string* {
    const auto it = raw.options.find(flag);
    if (it == raw.options.end() || it->second->count() == 0) return nullptr;
    return &raw.values.at(flag);
  };
  if (const auto* v = given("t")) cfg.t_values = parse_real_list(*v);
  if (const auto* v = given("eps")) cfg.eps_values = parse_real_list(*v);
  if (const auto* v = given("gamma")) cfg.gamma_values = parse_real_list(*v);
  if (const auto* v = given("n")) cfg.n_values = parse_int_list(*v);
  if (const auto* v = given("L")) cfg.L = parse_int(*v);
  if (const auto* v = given("k-samples")) cfg.k_samples = parse_int(*v);
  if (const auto* v = given("t-grid")) cfg.t_grid = parse_real_list(*v);
  if (const auto* v = given("eps-grid")) cfg.eps_grid = parse_real_list(*v);
  if (const auto* v = given("out")) {
    require(!v->empty(), "--out needs a path");
    cfg.output_path = *v;
  }
  if (const auto* v = given("series-tol")) cfg.numerics.series_tol = parse_real(*v);
  if (const auto* v = given("fixpoint-tol")) cfg.numerics.fixpoint_tol = parse_real(*v);
  if (const auto* v = given("root-tol")) cfg.numerics.root_tol = parse_real(*v);
  if (const auto* v = given("ed-L")) cfg.ed_sites = parse_int(*v);
  if (const auto* v = given("ed-nmax")) cfg.ed_n_max = parse_int(*v);
  if (const auto* v = given("ed-sectors")) cfg.ed_max_sector = parse_int(*v);
  if (const auto* v = given("lobe-points")) cfg.lobe_points = parse_int(*v);
  if (const auto* v = given("threads")) {
    const int threads = parse_int(*v);
    require(threads >= 1, "--threads must be at least 1");
    cfg.threads = static_cast<unsigned>(threads);
  }
  cfg.emit_plot_script = raw.plot;
  validate(cfg);
  return cfg;
}

// Returns nullopt when help was requested; help text goes to `help`.
std::optional<RunConfig> parse_impl(int argc, const char* const* argv, std::string& help) {
  CLI::App app{"Mott-insulator / superfluid phase diagram of the Jaynes-Cummings-Hubbard chain with Kerr term",
               "jchk"};
  app.require_subcommand(1);
  std::array<SubcommandOptions, kSubcommands.size()> raw;
  for (std::size_t i = 0; i < kSubcommands.size(); ++i) {
    const Subcommand sub = kSubcommands[i];
    raw[i].app = app.add_subcommand(std::string(name(sub)));
    for (const auto& flag : flags_for(sub)) {
      raw[i].values[flag];
      raw[i].options[flag] = raw[i].app->add_option("--" + flag, raw[i].values[flag], flag_help().at(flag));
    }
    if (sub != Subcommand::ed_check) {
      raw[i].app->add_flag("--plot-script", raw[i].plot, "also write a matplotlib script next to the CSV");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    help = app.help();
    return std::nullopt;
  } catch (const CLI::CallForAllHelp&) {
    help = app.help("", CLI::AppFormatMode::All);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (std::size_t i = 0; i < kSubcommands.size(); ++i) {
    if (raw[i].app->parsed()) {
      if (raw[i].app->get_help_ptr()->count() > 0) {
        help = raw[i].app->help();
        return std::nullopt;
      }
      return apply(kSubcommands[i], raw[i]);
    }
  }
  throw UsageError("a subcommand is required");
}

}  // namespace

RunConfig parse_args(int argc, const char* const* argv) {
  std::string help;
  auto cfg = parse_impl(argc, argv, help);
  if (!cfg) throw UsageError("help requested");
  return *cfg;
}

std::string dispersion_csv(const RunConfig& cfg) {
  csv::Writer w({"k_over_L", "t_over_g", "omega_over_g"});
  echo_config(w, cfg);
  ModelParams p = base_params(cfg);
  const auto L = static_cast<double>(cfg.L);
  for (const double t : cfg.t_values) {
    p.t = t;
    for (int i = 0; i < cfg.k_samples; ++i) {
      const double k = L * i / (cfg.k_samples - 1);
      w.add_row({fmt(k / L), fmt(t), fmt(dispersion_at(k, p, cfg.numerics))});
    }
  }
  return w.str();
}

std::string spectrum_csv(const RunConfig& cfg) {
  struct Cell {
    double t, eps, gamma;
    int n;
    std::vector<SectorState> band;
  };
  std::vector<Cell> cells;
  for (const double t : cfg.t_values) {
    for (const double eps : cfg.eps_values) {
      for (const double gamma : cfg.gamma_values) {
        for (const int n : cfg.n_values) cells.push_back({t, eps, gamma, n, {}});
      }
    }
  }
  detail::parallel_for(cells.size(), cfg.threads, [&](std::size_t i) {
    Cell& c = cells[i];
    ModelParams p = base_params(cfg);
    p.t = c.t;
    p.eps = c.eps;
    p.gamma = c.gamma;
    c.band = spectrum_over_k(c.n, p, cfg.numerics, cfg.k_samples);
  });

  csv::Writer w({"k_over_L", "t_over_g", "eps_over_g", "gamma_over_g", "n", "E_over_g"});
  echo_config(w, cfg);
  const auto L = static_cast<double>(cfg.L);
  for (const Cell& c : cells) {
    for (const SectorState& s : c.band) {
      w.add_row({fmt(s.k / L), fmt(c.t), fmt(c.eps), fmt(c.gamma), std::to_string(c.n), fmt(s.energy)});
    }
  }
  return w.str();
}

std::string lobes_csv(const RunConfig& cfg) {
  const ModelParams base = base_params(cfg);
  const std::size_t n_gamma = cfg.gamma_values.size();
  std::vector<std::vector<double>> grids(cfg.eps_values.size() * n_gamma);
  detail::parallel_for(grids.size(), cfg.threads, [&](std::size_t i) {
    if (!cfg.t_grid.empty()) {
      grids[i] = cfg.t_grid;
      return;
    }
    const double eps = cfg.eps_values[i / n_gamma];
    const double gamma = cfg.gamma_values[i % n_gamma];
    const double tc = critical_hopping(1, eps, gamma, base, cfg.numerics).t_c;
    grids[i] = linspace(0.0, 1.2 * tc, cfg.lobe_points);
  });

  const std::size_t per_n = grids.size();
  std::vector<LobeBoundary> lobes(cfg.n_values.size() * per_n);
  detail::parallel_for(lobes.size(), cfg.threads, [&](std::size_t i) {
    const std::size_t cell = i % per_n;
    lobes[i] = trace_lobe(cfg.n_values[i / per_n], cfg.eps_values[cell / n_gamma], cfg.gamma_values[cell % n_gamma],
                          grids[cell], base, cfg.numerics);
  });

  csv::Writer w({"n", "eps_over_g", "gamma_over_g", "t_over_g", "mu_plus_over_g", "mu_minus_over_g", "closed_flag"});
  echo_config(w, cfg);
  for (const LobeBoundary& lobe : lobes) {
    for (const LobePoint& pt : lobe.points) {
      w.add_row({std::to_string(lobe.n), fmt(lobe.eps), fmt(lobe.gamma), fmt(pt.t), fmt(pt.mu_plus),
                 fmt(pt.mu_minus), pt.closed ? "1" : "0"});
    }
  }
  return w.str();
}

TcSweepOutput tc_sweep_csv(const RunConfig& cfg) {
  const std::vector<TcSweepRow> rows =
      tc_sweep(cfg.n_values, cfg.eps_grid, cfg.gamma_values, base_params(cfg), cfg.numerics, cfg.threads);

  csv::Writer w({"n", "gamma_over_g", "eps_over_g", "tc_over_g", "gap_residual", "status"});
  echo_config(w, cfg);
  TcSweepOutput out;
  out.total_rows = rows.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const TcSweepRow& row : rows) {
    if (!row.point) ++out.failed_rows;
    w.add_row({std::to_string(row.n), fmt(row.gamma), fmt(row.eps), fmt(row.point ? row.point->t_c : nan),
               fmt(row.point ? row.point->gap_residual : nan), sanitize(row.status)});
  }
  out.csv = w.str();
  return out;
}

EdCheckOutput ed_check(const RunConfig& cfg) {
  EdCheckOutput out;
  std::string& report = out.report;
  report += "ed-check: L_ed=" + std::to_string(cfg.ed_sites) + " n_max=" + std::to_string(cfg.ed_n_max) +
            " sectors N<=" + std::to_string(cfg.ed_max_sector) + "\n";
  const int compared = std::min(cfg.ed_max_sector, cfg.ed_n_max);
  if (cfg.ed_max_sector > cfg.ed_n_max) {
    report += "warning: sectors N > n_max=" + std::to_string(cfg.ed_n_max) +
              " are truncated by the photon cutoff; comparing N <= " + std::to_string(compared) + " only\n";
  }

  const ed::FockBasis basis(cfg.ed_sites, cfg.ed_n_max);
  const std::vector<int> labels = ed::excitation_labels(basis);
  std::vector<EdRow> rows;
  double worst_zero = 0.0;
  double worst_comm = 0.0;
  double worst_cutoff = 0.0;
  bool counts_ok = true;

  const ed::FockBasis low(cfg.ed_sites, kCutoffLow);
  const ed::FockBasis high(cfg.ed_sites, kCutoffHigh);
  const std::vector<int> low_labels = ed::excitation_labels(low);
  const std::vector<int> high_labels = ed::excitation_labels(high);

  for (const double eps : cfg.eps_values) {
    for (const double gamma : cfg.gamma_values) {
      ModelParams p = base_params(cfg);
      p.eps = eps;
      p.gamma = gamma;

      p.t = 0.0;
      const Eigen::MatrixXd h0 = ed::build_hamiltonian(basis, p);
      const double comm0 = ed::excitation_commutator_norm(h0, basis);
      worst_comm = std::max(worst_comm, comm0);
      rows.push_back({"commutator", eps, gamma, 0.0, -1, comm0, 0.0, comm0});
      for (const auto& [sector, ev] : ed::sector_spectra(h0, labels, compared)) {
        const std::vector<double> exact = ed::zero_hopping_levels(cfg.ed_sites, sector, p);
        double diff = std::numeric_limits<double>::infinity();
        if (exact.size() == ev.size()) {
          diff = 0.0;
          for (std::size_t i = 0; i < ev.size(); ++i) diff = std::max(diff, std::abs(ev[i] - exact[i]));
        } else {
          counts_ok = false;
        }
        worst_zero = std::max(worst_zero, diff);
        rows.push_back({"zero_hopping", eps, gamma, 0.0, sector, ev.front(), exact.front(), diff});
      }

      p.t = kCutoffProbeHopping;
      const Eigen::MatrixXd h_low = ed::build_hamiltonian(low, p);
      const Eigen::MatrixXd h_high = ed::build_hamiltonian(high, p);
      worst_comm = std::max({worst_comm, ed::excitation_commutator_norm(h_low, low),
                             ed::excitation_commutator_norm(h_high, high)});
      const double e_low = lowest_up_to(ed::sector_spectra(h_low, low_labels, kCutoffProbeSectors));
      const double e_high = lowest_up_to(ed::sector_spectra(h_high, high_labels, kCutoffProbeSectors));
      worst_cutoff = std::max(worst_cutoff, std::abs(e_high - e_low));
      rows.push_back({"cutoff", eps, gamma, p.t, kCutoffProbeSectors, e_high, e_low, e_high - e_low});

      for (const double t : cfg.t_values) {
        p.t = t;
        const Eigen::MatrixXd h = ed::build_hamiltonian(basis, p);
        const double comm = ed::excitation_commutator_norm(h, basis);
        worst_comm = std::max(worst_comm, comm);
        const auto spectra = ed::sector_spectra(h, labels, cfg.ed_sites);
        const double ed_per_site = spectra.at(cfg.ed_sites).front() / cfg.ed_sites;
        const double mf_per_site = mean_field_energy_per_site(p, cfg.numerics, cfg.k_samples);
        rows.push_back({"mf_vs_ed", eps, gamma, t, cfg.ed_sites, mf_per_site, ed_per_site, mf_per_site - ed_per_site});
      }
    }
  }

  const bool zero_ok = counts_ok && worst_zero < kZeroHoppingTol;
  const bool comm_ok = worst_comm < kCommutatorTol;
  const bool cutoff_ok = worst_cutoff < kCutoffTol;
  out.passed = zero_ok && comm_ok && cutoff_ok;
  const auto verdict = [](bool ok) { return ok ? std::string("PASS") : std::string("FAIL"); };
  report += "t=0 agreement: " + verdict(zero_ok) + " (max |dE| < 1e-10, observed " + short_fmt(worst_zero) + ")\n";
  report += "excitation conservation: " + verdict(comm_ok) + " (max |[H,N]| < 1e-12, observed " +
            short_fmt(worst_comm) + ")\n";
  report += "cutoff stability: " + verdict(cutoff_ok) + " (|dE| < 1e-8 for n_max 5 -> 7 at t=0.05, observed " +
            short_fmt(worst_cutoff) + ")\n";
  report += "mean-field vs ED energy per site, one excitation per site (reported, not asserted):\n";
  for (const EdRow& r : rows) {
    if (r.check != "mf_vs_ed") continue;
    report += "  eps=" + short_fmt(r.eps) + " gamma=" + short_fmt(r.gamma) + " t=" + short_fmt(r.t) +
              ": mean-field " + short_fmt(r.value) + ", ED " + short_fmt(r.reference) + ", difference " +
              short_fmt(r.difference) + "\n";
  }

  csv::Writer w({"check", "eps_over_g", "gamma_over_g", "t_over_g", "sector", "value", "reference", "difference"});
  echo_config(w, cfg);
  for (const EdRow& r : rows) {
    w.add_row({r.check, fmt(r.eps), fmt(r.gamma), fmt(r.t), std::to_string(r.sector), fmt(r.value), fmt(r.reference),
               fmt(r.difference)});
  }
  out.csv = w.str();
  return out;
}

std::filesystem::path plot_script_path(const std::filesystem::path& csv_path) {
  std::filesystem::path script = csv_path;
  script.replace_extension(".plot.py");
  return script;
}

std::string plot_script(Subcommand sub, const std::filesystem::path& csv_path) {
  struct Layout {
    const char* x;
    std::vector<const char*> y;
    std::vector<const char*> group;
    const char* xlabel;
    const char* ylabel;
  };
  Layout layout;
  switch (sub) {
    case Subcommand::dispersion:
      layout = {"k_over_L", {"omega_over_g"}, {"t_over_g"}, "k/L", "omega_k/g"};
      break;
    case Subcommand::spectrum:
      layout = {"k_over_L", {"E_over_g"}, {"t_over_g", "eps_over_g", "gamma_over_g", "n"}, "k/L", "E_k^n/g"};
      break;
    case Subcommand::lobes:
      layout = {"t_over_g", {"mu_plus_over_g", "mu_minus_over_g"}, {"n", "eps_over_g", "gamma_over_g"}, "t/g", "mu/g"};
      break;
    case Subcommand::tc_sweep:
      layout = {"eps_over_g", {"tc_over_g"}, {"n", "gamma_over_g"}, "eps/g", "t_c/g"};
      break;
    case Subcommand::ed_check:
      return {};
  }
  const auto quoted_list = [](const std::vector<const char*>& names) {
    std::string out = "[";
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i > 0) out += ", ";
      out += '"';
      out += names[i];
      out += '"';
    }
    return out + "]";
  };

  std::string s;
  s += "#!/usr/bin/env python3\n";
  s += "# Redraws " + csv_path.filename().string() + ". Usage: python3 " + plot_script_path(csv_path).filename().string() +
       " [figure.png]\n";
  s += "import csv\nimport os\nimport sys\n\nimport matplotlib\n\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n";
  s += "DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), \"" + csv_path.filename().string() + "\")\n";
  s += "X = \"" + std::string(layout.x) + "\"\n";
  s += "Y = " + quoted_list(layout.y) + "\n";
  s += "GROUP = " + quoted_list(layout.group) + "\n";
  s += "XLABEL = \"" + std::string(layout.xlabel) + "\"\n";
  s += "YLABEL = \"" + std::string(layout.ylabel) + "\"\n\n";
  s += R"(
def load(path):
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(DATA)[0] + ".png"
    series = {}
    for row in load(DATA):
        if row.get("status", "ok") != "ok":
            continue
        series.setdefault(tuple(row[c] for c in GROUP), []).append(row)
    fig, ax = plt.subplots(figsize=(7, 5))
    for key, rows in series.items():
        label = ", ".join(f"{c}={v}" for c, v in zip(GROUP, key))
        xs = [float(r[X]) for r in rows]
        for y in Y:
            tag = label if len(Y) == 1 else f"{y}: {label}"
            ax.plot(xs, [float(r[y]) for r in rows], label=tag, linewidth=1.0)
    ax.set_xlabel(XLABEL)
    ax.set_ylabel(YLABEL)
    ax.legend(fontsize="x-small")
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main()
)";
  return s;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    std::string content;
    int code = kExitOk;
    switch (cfg.subcommand) {
      case Subcommand::dispersion: content = dispersion_csv(cfg); break;
      case Subcommand::spectrum: content = spectrum_csv(cfg); break;
      case Subcommand::lobes: content = lobes_csv(cfg); break;
      case Subcommand::tc_sweep: {
        TcSweepOutput sweep = tc_sweep_csv(cfg);
        content = std::move(sweep.csv);
        if (sweep.failed_rows == sweep.total_rows) {
          err << "error: every tc-sweep row failed\n";
          code = kExitNumerical;
        } else if (sweep.failed_rows > 0) {
          err << "warning: " << sweep.failed_rows << " of " << sweep.total_rows << " tc-sweep rows failed\n";
        }
        break;
      }
      case Subcommand::ed_check: {
        EdCheckOutput check = ed_check(cfg);
        out << check.report;
        content = std::move(check.csv);
        if (!check.passed) code = kExitNumerical;
        break;
      }
    }
    csv::write_file(cfg.output_path, content);
    out << "wrote " << cfg.output_path.string() << "\n";
    if (cfg.emit_plot_script) {
      const std::string script = plot_script(cfg.subcommand, cfg.output_path);
      if (script.empty()) {
        err << "note: no plot script for " << name(cfg.subcommand) << "\n";
      } else {
        const auto script_path = plot_script_path(cfg.output_path);
        csv::write_file(script_path, script);
        out << "wrote " << script_path.string() << "\n";
      }
    }
    return code;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> cfg;
  try {
    std::string help;
    cfg = parse_impl(argc, argv, help);
    if (!cfg) {
      out << help;
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for the list of subcommands and flags.\n";
    return kExitUsage;
  }
  return run(*cfg, out, err);
}

}  // namespace jchk::cli
