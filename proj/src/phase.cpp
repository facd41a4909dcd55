#include "jchk/phase.hpp"

#include <cmath>
#include <exception>
#include <string>

#include "jchk/errors.hpp"
#include "jchk/parallel.hpp"

namespace jchk {

ChemicalPotentials chemical_potentials(int n, const ModelParams& params, const NumericsConfig& cfg) {
  if (n < 1) throw InvalidArgument("chemical potentials need n >= 1, got " + std::to_string(n));
  params.validate();

  // Band minimum at k = L/2 for the particle, maximum at k = 0 for the hole.
  const int k_min = params.L / 2;
  const double omega_min = dispersion(k_min, params, cfg);
  const double omega_max = dispersion(0, params, cfg);
  const double edge = static_cast<double>(k_min);

  const double particle_upper = solve_sector_with_dispersion(edge, omega_min, n + 1, params, cfg).energy;
  const double particle_lower = solve_sector_with_dispersion(edge, omega_min, n, params, cfg).energy;
  const double hole_upper = solve_sector_with_dispersion(0.0, omega_max, n, params, cfg).energy;
  const double hole_lower = solve_sector_with_dispersion(0.0, omega_max, n - 1, params, cfg).energy;
  return {particle_upper - particle_lower, hole_upper - hole_lower};
}

LobeBoundary trace_lobe(int n, double eps, double gamma, std::span<const double> t_grid, const ModelParams& params,
                        const NumericsConfig& cfg) {
  if (t_grid.empty()) throw InvalidArgument("hopping grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw InvalidArgument("hopping grid values must be non-negative");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("hopping grid must be strictly increasing");
  }

  LobeBoundary lobe{n, eps, gamma, {}};
  lobe.points.reserve(t_grid.size());
  ModelParams p = params;
  p.eps = eps;
  p.gamma = gamma;
  for (const double t : t_grid) {
    p.t = t;
    const ChemicalPotentials mu = chemical_potentials(n, p, cfg);
    lobe.points.push_back({t, mu.mu_plus, mu.mu_minus, !(mu.mu_plus > mu.mu_minus)});
  }
  return lobe;
}

CriticalPoint critical_hopping(int n, double eps, double gamma, const ModelParams& params,
                               const NumericsConfig& cfg) {
  if (n < 1) throw InvalidArgument("critical hopping needs n >= 1, got " + std::to_string(n));
  cfg.validate();
  ModelParams p = params;
  p.eps = eps;
  p.gamma = gamma;
  const auto gap = [&](double t) {
    p.t = t;
    return chemical_potentials(n, p, cfg).gap();
  };

  CriticalPoint cp;
  cp.n = n;
  cp.eps = eps;
  cp.gamma = gamma;

  const double gap0 = gap(0.0);
  if (!(gap0 > 0.0)) {
    throw BracketError("no Mott gap at t = 0 for n=" + std::to_string(n) + " (gap " + std::to_string(gap0) + ")");
  }

  double lo = 0.0;
  double hi = kInitialHoppingBracket;
  while (gap(hi) >= 0.0) {
    if (cp.doublings == kMaxBracketDoublings) {
      throw BracketError("lobe n=" + std::to_string(n) + " does not close below t = " + std::to_string(hi));
    }
    lo = hi;
    hi *= 2.0;
    ++cp.doublings;
  }

  while (hi - lo > cfg.root_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) >= 0.0 ? lo : hi) = mid;
    ++cp.bisection_steps;
  }

  cp.t_c = 0.5 * (lo + hi);
  cp.gap_residual = std::abs(gap(cp.t_c));
  cp.bracket_width = hi - lo;
  return cp;
}

std::vector<TcSweepRow> tc_sweep(std::span<const int> n_list, std::span<const double> eps_grid,
                                 std::span<const double> gamma_list, const ModelParams& params,
                                 const NumericsConfig& cfg, unsigned threads) {
  if (n_list.empty()) throw InvalidArgument("tc sweep needs at least one n");
  if (eps_grid.empty()) throw InvalidArgument("tc sweep needs at least one eps");
  if (gamma_list.empty()) throw InvalidArgument("tc sweep needs at least one gamma");
  for (std::size_t i = 1; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > eps_grid[i - 1])) throw InvalidArgument("eps grid must be strictly increasing");
  }
  params.validate();
  cfg.validate();

  const std::size_t per_n = gamma_list.size() * eps_grid.size();
  std::vector<TcSweepRow> rows(n_list.size() * per_n);
  detail::parallel_for(rows.size(), threads, [&](std::size_t idx) {
    TcSweepRow& row = rows[idx];
    row.n = n_list[idx / per_n];
    row.gamma = gamma_list[(idx % per_n) / eps_grid.size()];
    row.eps = eps_grid[idx % eps_grid.size()];
    try {
      row.point = critical_hopping(row.n, row.eps, row.gamma, params, cfg);
    } catch (const std::exception& e) {
      row.status = e.what();
    }
  });
  return rows;
}

}  // namespace jchk
