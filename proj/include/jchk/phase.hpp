#pragma once

// Mott-insulator / superfluid observables built on the sector solver:
// particle and hole chemical potentials, lobe boundaries in the (t, mu)
// plane and the critical hopping where a lobe closes.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jchk/model.hpp"

namespace jchk {

struct ChemicalPotentials {
  double mu_plus = 0.0;   ///< E_{L/2}^{n+1} - E_{L/2}^{n}
  double mu_minus = 0.0;  ///< E_0^{n} - E_0^{n-1}

  double gap() const { return mu_plus - mu_minus; }
};

/// Each of the four energies carries its own self-consistent n0.
ChemicalPotentials chemical_potentials(int n, const ModelParams& params, const NumericsConfig& cfg);

struct LobePoint {
  double t = 0.0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  bool closed = false;  ///< mu_plus <= mu_minus, i.e. past the lobe tip
};

struct LobeBoundary {
  int n = 1;
  double eps = 0.0;
  double gamma = 0.0;
  std::vector<LobePoint> points;
};

/// Chemical potentials of lobe n along t_grid (strictly increasing, >= 0).
/// eps and gamma override the values in params.
LobeBoundary trace_lobe(int n, double eps, double gamma, std::span<const double> t_grid, const ModelParams& params,
                        const NumericsConfig& cfg);

struct CriticalPoint {
  int n = 1;
  double eps = 0.0;
  double gamma = 0.0;
  double t_c = 0.0;
  double gap_residual = 0.0;   ///< |mu_plus - mu_minus| at t_c
  double bracket_width = 0.0;  ///< final bisection bracket
  int doublings = 0;
  int bisection_steps = 0;
};

/// Start of the doubling search for an upper bracket on t_c.
inline constexpr double kInitialHoppingBracket = 0.05;
inline constexpr int kMaxBracketDoublings = 40;

/// Bisection on the Mott gap G(t) = mu_plus - mu_minus. Throws BracketError
/// if G(0) <= 0 or if no sign change is found within the doubling cap.
CriticalPoint critical_hopping(int n, double eps, double gamma, const ModelParams& params,
                               const NumericsConfig& cfg);

struct TcSweepRow {
  int n = 1;
  double gamma = 0.0;
  double eps = 0.0;
  std::optional<CriticalPoint> point;
  std::string status = "ok";  ///< "ok" or the failure message
};

/// Critical hopping on the product n_list x gamma_list x eps_grid, rows in
/// that order. A failing cell records its message and the sweep continues.
/// threads > 1 evaluates cells concurrently; output is identical to serial.
std::vector<TcSweepRow> tc_sweep(std::span<const int> n_list, std::span<const double> eps_grid,
                                 std::span<const double> gamma_list, const ModelParams& params,
                                 const NumericsConfig& cfg, unsigned threads = 1);

}  // namespace jchk
