#include "jchk/model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "jchk/errors.hpp"

namespace jchk {

namespace {

// Terms up to this index are evaluated directly; beyond it the cosine comes
// from a recurrence and each term is below 1e-9.
constexpr std::int64_t kDirectTerms = 1024;
constexpr std::int64_t kMaxTerms = 1'000'000'000;

bool is_finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

// sum_{d > D} 1/d^3
double zeta3_tail(std::int64_t terms) {
  if (terms < 64) {
    double partial = 0.0;
    for (std::int64_t d = terms; d >= 1; --d) {
      const auto x = static_cast<double>(d);
      partial += 1.0 / (x * x * x);
    }
    return zeta3() - partial;
  }
  // Euler-Maclaurin; the next correction is O(D^-10).
  const auto x = static_cast<double>(terms);
  const double inv2 = 1.0 / (x * x);
  const double inv3 = inv2 / x;
  const double inv4 = inv2 * inv2;
  return 0.5 * inv2 - 0.5 * inv3 + 0.25 * inv4 - inv4 * inv2 / 12.0 + inv4 * inv4 / 12.0;
}

// sum_{d=1}^{D} (cos(d theta) - 1) / d^3, every term <= 0.
double reduced_cosine_series(double theta, std::int64_t terms) {
  const std::int64_t head = std::min(terms, kDirectTerms);

  double tail = 0.0;
  if (terms > head) {
    // Four interleaved Chebyshev recurrences with step 4 theta.
    constexpr int kChains = 4;
    const std::int64_t first = head + 1;
    std::array<double, kChains> cur{};
    std::array<double, kChains> prev{};
    std::array<double, kChains> acc{};
    for (int r = 0; r < kChains; ++r) {
      cur[r] = std::cos(static_cast<double>(first + r) * theta);
      prev[r] = std::cos(static_cast<double>(first + r - kChains) * theta);
    }
    const double step = 2.0 * std::cos(kChains * theta);
    std::int64_t d = first;
    for (; d + kChains - 1 <= terms; d += kChains) {
      for (int r = 0; r < kChains; ++r) {
        const auto x = static_cast<double>(d + r);
        acc[r] += (cur[r] - 1.0) / (x * x * x);
        const double next = step * cur[r] - prev[r];
        prev[r] = cur[r];
        cur[r] = next;
      }
    }
    for (int r = 0; d <= terms; ++d, ++r) {
      const auto x = static_cast<double>(d);
      acc[r] += (cur[r] - 1.0) / (x * x * x);
    }
    tail = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  }

  // Smallest terms first.
  double sum = tail;
  for (std::int64_t d = head; d >= 1; --d) {
    const auto x = static_cast<double>(d);
    const double s = std::sin(0.5 * x * theta);
    sum -= 2.0 * s * s / (x * x * x);
  }
  return sum;
}

}  // namespace

void ModelParams::validate() const {
  if (!(std::isfinite(g) && g > 0.0)) throw InvalidArgument("g must be positive, got " + std::to_string(g));
  if (!is_finite_nonneg(eps)) throw InvalidArgument("eps must be non-negative, got " + std::to_string(eps));
  if (!is_finite_nonneg(gamma)) throw InvalidArgument("gamma must be non-negative, got " + std::to_string(gamma));
  if (!is_finite_nonneg(t)) throw InvalidArgument("t must be non-negative, got " + std::to_string(t));
  if (L < 2 || L % 2 != 0) throw InvalidArgument("L must be an even integer >= 2, got " + std::to_string(L));
}

void NumericsConfig::validate() const {
  if (!(series_tol > 0.0) || !(fixpoint_tol > 0.0) || !(root_tol > 0.0)) {
    throw InvalidArgument("numerical tolerances must be strictly positive");
  }
  if (fixpoint_max_iter < 1) throw InvalidArgument("fixpoint_max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidArgument("damping must lie in (0, 1]");
}

double zeta3() {
  static const double value = std::riemann_zeta(3.0);
  return value;
}

std::int64_t dispersion_terms(double t, double series_tol) {
  if (!(series_tol > 0.0)) throw InvalidArgument("series_tol must be positive");
  if (t == 0.0) return 0;
  const double target = series_tol / (2.0 * t);
  const double estimate = std::floor(std::sqrt(t / series_tol));
  if (estimate >= static_cast<double>(kMaxTerms)) {
    throw InvalidArgument("series_tol " + std::to_string(series_tol) + " is too small for t = " + std::to_string(t));
  }
  auto terms = std::max<std::int64_t>(1, static_cast<std::int64_t>(estimate));
  while (true) {
    const auto x = static_cast<double>(terms);
    if (0.5 / (x * x) < target) return terms;
    ++terms;
  }
}

double dispersion_at(double k, const ModelParams& params, const NumericsConfig& cfg) {
  params.validate();
  cfg.validate();
  const auto L = static_cast<double>(params.L);
  if (!(k >= 0.0 && k <= L)) {
    throw InvalidArgument("momentum index " + std::to_string(k) + " outside [0, " + std::to_string(params.L) + "]");
  }
  if (params.t == 0.0) return 0.0;
  // Fold onto [0, L/2] so k and L - k share one evaluation.
  const double folded = std::min(k, L - k);
  if (folded == 0.0) return 0.0;
  const double theta = 2.0 * std::numbers::pi * folded / L;
  const std::int64_t terms = dispersion_terms(params.t, cfg.series_tol);
  return 2.0 * params.t * (reduced_cosine_series(theta, terms) - zeta3_tail(terms));
}

double dispersion(int k, const ModelParams& params, const NumericsConfig& cfg) {
  if (k < 0 || k > params.L) {
    throw InvalidArgument("momentum index " + std::to_string(k) + " outside [0, " + std::to_string(params.L) + "]");
  }
  return dispersion_at(static_cast<double>(k), params, cfg);
}

double hopping_from_cavity_params(double omega_z, double omega_x, double u_mean) {
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(omega_z) || !positive(omega_x) || !positive(u_mean)) {
    throw InvalidArgument("cavity frequencies and spacing must be strictly positive");
  }
  return omega_z * omega_z / (2.0 * omega_x * u_mean * u_mean * u_mean);
}

SectorAmplitudes sector_energy_given_omegabar(int n, double omega_bar, const ModelParams& params) {
  if (n < 0) throw InvalidArgument("excitation number must be non-negative, got " + std::to_string(n));
  const double half_detuning = 0.5 * (omega_bar - params.eps);
  if (n == 0) return {std::abs(half_detuning), 1.0, 0.0, 0.0};

  const double coupling = params.g * std::sqrt(static_cast<double>(n));
  const double chi = std::hypot(coupling, half_detuning);
  // chi + detuning/2, rewritten to avoid cancellation when the detuning is
  // large and negative.
  const double upper = half_detuning >= 0.0 ? chi + half_detuning : coupling * coupling / (chi - half_detuning);

  SectorAmplitudes out;
  out.chi = chi;
  out.beta = std::sqrt(upper / (2.0 * chi));
  out.alpha = coupling / (std::sqrt(2.0 * chi) * std::sqrt(upper));
  out.energy = omega_bar * n - half_detuning - chi;
  return out;
}

SectorState solve_sector_with_dispersion(double k, double omega_k, int n, const ModelParams& params,
                                         const NumericsConfig& cfg) {
  params.validate();
  cfg.validate();
  if (n < 0) throw InvalidArgument("excitation number must be non-negative, got " + std::to_string(n));

  SectorState state;
  state.k = k;
  state.n = n;
  state.omega_k = omega_k;
  const double target = static_cast<double>(n);

  const auto store = [&](double n0) {
    const double omega_bar = omega_k + params.gamma * n0;
    const SectorAmplitudes amp = sector_energy_given_omegabar(n, omega_bar, params);
    state.n0 = n0;
    state.omega_bar = omega_bar;
    state.chi = amp.chi;
    state.alpha = amp.alpha;
    state.beta = amp.beta;
    state.energy = amp.energy;
    state.residual = std::abs(n0 - (target - amp.beta * amp.beta));
  };
  const auto residual_at = [&](double n0) {
    const double beta = sector_energy_given_omegabar(n, omega_k + params.gamma * n0, params).beta;
    return n0 - (target - beta * beta);
  };

  if (n == 0) {
    store(0.0);
    state.path = FixedPointPath::vacuum;
    return state;
  }

  if (params.gamma == 0.0 && cfg.closed_form_without_kerr) {
    const double beta = sector_energy_given_omegabar(n, omega_k, params).beta;
    store(target - beta * beta);
    state.path = FixedPointPath::closed_form;
    state.iterations = 1;
    return state;
  }

  double x = target;
  double r = 0.0;
  for (int it = 1; it <= cfg.fixpoint_max_iter; ++it) {
    r = residual_at(x);
    if (std::abs(r) < cfg.fixpoint_tol) {
      store(x);
      state.path = FixedPointPath::damped;
      state.iterations = it;
      return state;
    }
    x -= cfg.damping * r;
  }

  // f(n-1) = beta^2 - 1 <= 0 and f(n) = beta^2 >= 0.
  double lo = target - 1.0;
  double hi = target;
  for (int it = 1;; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    r = residual_at(mid);
    if (std::abs(r) < cfg.fixpoint_tol) {
      store(mid);
      state.path = FixedPointPath::bisection;
      state.iterations = cfg.fixpoint_max_iter + it;
      return state;
    }
    (r < 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceError("photon-density fixed point did not converge for sector (k=" + std::to_string(k) +
                             ", n=" + std::to_string(n) + ")",
                         std::abs(r));
}

SectorState solve_sector(int k, int n, const ModelParams& params, const NumericsConfig& cfg) {
  const double omega_k = dispersion(k, params, cfg);
  return solve_sector_with_dispersion(static_cast<double>(k), omega_k, n, params, cfg);
}

std::vector<SectorState> spectrum_over_k(int n, const ModelParams& params, const NumericsConfig& cfg,
                                         int k_samples) {
  if (k_samples < 2) throw InvalidArgument("k_samples must be at least 2, got " + std::to_string(k_samples));
  std::vector<SectorState> out;
  out.reserve(static_cast<std::size_t>(k_samples));
  const auto L = static_cast<double>(params.L);
  for (int i = 0; i < k_samples; ++i) {
    const double k = L * i / (k_samples - 1);
    out.push_back(solve_sector_with_dispersion(k, dispersion_at(k, params, cfg), n, params, cfg));
  }
  return out;
}

}  // namespace jchk
