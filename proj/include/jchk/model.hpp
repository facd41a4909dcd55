#pragma once

// Mean-field model of the Jaynes-Cummings-Hubbard chain with a Kerr term.
//
// Every energy is measured in units of the atom-light coupling g. The chain
// has 1/d^3 long-range photon hopping, and after the fermionic replacement of
// the atomic operators plus a zero-momentum-transfer decoupling of the Kerr
// term the problem splits into independent two-level sectors labelled by a
// momentum index k and an excitation number n.

#include <cstdint>
#include <vector>

namespace jchk {

/// Physical couplings of the chain.
struct ModelParams {
  double g = 1.0;      ///< atom-light coupling, the energy unit
  double eps = 0.0;    ///< atomic transition frequency
  double gamma = 0.0;  ///< Kerr constant
  double t = 0.0;      ///< nearest-neighbour hopping amplitude, t_d = t/d^3
  int L = 1000;        ///< number of cavities, even

  /// Throws InvalidArgument unless g > 0, t, gamma, eps >= 0 and L >= 2 even.
  void validate() const;
};

/// Numerical tolerances shared by the solvers.
struct NumericsConfig {
  double series_tol = 1e-12;    ///< absolute truncation error of omega_k
  double fixpoint_tol = 1e-12;  ///< residual bound on the n0 self-consistency
  int fixpoint_max_iter = 10'000;
  double damping = 0.5;         ///< mixing weight in (0, 1]
  double root_tol = 1e-10;      ///< bracket width for the t_c bisection
  /// With gamma == 0 the fixed point is closed-form; disable to force the
  /// damped iteration (used to cross-check the two paths).
  bool closed_form_without_kerr = true;

  void validate() const;
};

/// How solve_sector obtained n0.
enum class FixedPointPath : std::uint8_t {
  vacuum,       ///< n == 0, nothing to solve
  closed_form,  ///< gamma == 0, one beta evaluation
  damped,       ///< damped fixed-point iteration converged
  bisection,    ///< damped iteration stalled, bracket [n-1, n] bisected
};

/// Mean-field ground state of one (k, n) sector.
struct SectorState {
  double k = 0.0;  ///< momentum index in [0, L]; may be fractional on figure grids
  int n = 0;
  double omega_k = 0.0;
  double n0 = 0.0;
  double omega_bar = 0.0;  ///< omega_k + gamma * n0
  double chi = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double energy = 0.0;
  double residual = 0.0;  ///< |n0 - (n - beta^2)| at the stored n0
  int iterations = 0;
  FixedPointPath path = FixedPointPath::vacuum;
};

/// Two-level ground state for a given effective photon frequency.
struct SectorAmplitudes {
  double chi = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double energy = 0.0;
};

/// Apery's constant zeta(3).
double zeta3();

/// Bare photon dispersion 2t[sum_d cos(theta d)/d^3 - zeta(3)] at
/// theta = 2 pi k / L. The series is cut at the first D whose tail bound
/// 1/(2D^2) is below series_tol/(2t). Rejects k outside [0, L].
double dispersion(int k, const ModelParams& params, const NumericsConfig& cfg);

/// Same as dispersion() for a real-valued momentum index k in [0, L].
double dispersion_at(double k, const ModelParams& params, const NumericsConfig& cfg);

/// Number of series terms dispersion() sums for hopping t.
std::int64_t dispersion_terms(double t, double series_tol);

/// t = omega_z^2 / (2 omega_x u^3).
double hopping_from_cavity_params(double omega_z, double omega_x, double u_mean);

/// Lower eigenpair of the sector Hamiltonian on {|0,n>, |1,n-1>}. For n == 0
/// only the vacuum exists and the energy is defined as zero.
SectorAmplitudes sector_energy_given_omegabar(int n, double omega_bar, const ModelParams& params);

/// Solves n0 = n - beta(omega_k + gamma n0)^2 for sector (k, n).
SectorState solve_sector(int k, int n, const ModelParams& params, const NumericsConfig& cfg);

/// solve_sector() with a precomputed bare dispersion value; k is recorded but
/// not re-evaluated. Lets callers share one series evaluation across sectors.
SectorState solve_sector_with_dispersion(double k, double omega_k, int n, const ModelParams& params,
                                         const NumericsConfig& cfg);

/// Sector energies on k_samples evenly spaced momenta covering [0, L].
std::vector<SectorState> spectrum_over_k(int n, const ModelParams& params, const NumericsConfig& cfg,
                                         int k_samples);

}  // namespace jchk
