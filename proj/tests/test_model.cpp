#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "jchk/errors.hpp"
#include "jchk/model.hpp"
#include "oracles.hpp"

using namespace jchk;

namespace {

ModelParams chain(double t, double eps = 0.0, double gamma = 0.0, int L = 1000) {
  ModelParams p;
  p.t = t;
  p.eps = eps;
  p.gamma = gamma;
  p.L = L;
  return p;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("dispersion") {
  TEST_CASE("band edges") {
    const NumericsConfig cfg;
    for (const double t : {0.0, 0.001, 0.2, 1.0, 3.0}) {
      CHECK(dispersion(0, chain(t), cfg) == 0.0);
      CHECK(dispersion(1000, chain(t), cfg) == 0.0);
    }
    CHECK(std::abs(dispersion(500, chain(1.0), cfg) - oracle::band_bottom(1.0)) < 1e-11);
  }

  TEST_CASE("band bottom against a million-term brute-force sum") {
    const double brute = oracle::brute_dispersion(oracle::kPi, 1.0, 1'000'000);
    CHECK(std::abs(brute - oracle::band_bottom(1.0)) < 1e-12);
    CHECK(std::abs(dispersion(500, chain(1.0), {}) - brute) < 1e-11);
  }

  TEST_CASE("closed-form values at theta = 2pi/3 and pi/2") {
    // cos(2 pi d/3) is 1 on multiples of 3 and -1/2 otherwise: S = -(4/9) zeta(3).
    const double third = static_cast<double>(2.0L * (-4.0L / 9.0L * oracle::kZeta3 - oracle::kZeta3));
    // Only even d survive at pi/2: S = -(3/32) zeta(3).
    const double quarter = static_cast<double>(2.0L * (-3.0L / 32.0L * oracle::kZeta3 - oracle::kZeta3));
    CHECK(std::abs(dispersion(2, chain(1.0, 0, 0, 6), {}) - third) < 1e-11);
    CHECK(std::abs(dispersion(1, chain(1.0, 0, 0, 4), {}) - quarter) < 1e-11);
  }

  TEST_CASE("generic momenta match direct summation") {
    const NumericsConfig cfg;
    for (const int k : {1, 3, 37, 250, 499}) {
      const long double theta = 2.0L * oracle::kPi * k / 1000.0L;
      const double brute = oracle::brute_dispersion(theta, 0.2, dispersion_terms(0.2, cfg.series_tol));
      CHECK(std::abs(dispersion(k, chain(0.2), cfg) - brute) < 1e-13);
    }
  }

  TEST_CASE("truncation error stays within series_tol") {
    NumericsConfig coarse;
    coarse.series_tol = 1e-6;
    for (const int k : {1, 100, 333, 500}) {
      const long double theta = 2.0L * oracle::kPi * k / 1000.0L;
      const double reference = oracle::brute_dispersion(theta, 1.0, 2'000'000);
      CHECK(std::abs(dispersion(k, chain(1.0), coarse) - reference) < coarse.series_tol);
    }
  }

  TEST_CASE("term count is the smallest D with 1/(2D^2) < tol/(2t)") {
    for (const double t : {1e-3, 0.2, 1.0, 7.5}) {
      for (const double tol : {1e-6, 1e-10, 1e-12}) {
        const auto D = static_cast<double>(dispersion_terms(t, tol));
        CHECK(0.5 / (D * D) < tol / (2 * t));
        if (D > 1) CHECK(0.5 / ((D - 1) * (D - 1)) >= tol / (2 * t));
      }
    }
    CHECK(dispersion_terms(0.0, 1e-12) == 0);
  }

  TEST_CASE("parity, sign and minimum at L/2") {
    const NumericsConfig cfg;
    const ModelParams p = chain(0.3, 0, 0, 200);
    double lowest = 0.0;
    int argmin = -1;
    for (int k = 0; k <= p.L; ++k) {
      const double w = dispersion(k, p, cfg);
      CHECK(w <= 0.0);
      CHECK(same_bits(w, dispersion(p.L - k, p, cfg)));
      if (w < lowest) {
        lowest = w;
        argmin = k;
      }
    }
    CHECK(argmin == p.L / 2);
  }

  TEST_CASE("momentum outside [0, L] is rejected") {
    CHECK_THROWS_AS(dispersion(-1, chain(0.1), {}), InvalidArgument);
    CHECK_THROWS_AS(dispersion(1001, chain(0.1), {}), InvalidArgument);
    CHECK_THROWS_AS(dispersion_at(1000.5, chain(0.1), {}), InvalidArgument);
  }
}

TEST_CASE("hopping from cavity parameters") {
  CHECK(hopping_from_cavity_params(1.0, 0.5, 1.0) == 1.0);
  CHECK(hopping_from_cavity_params(2.0, 1.0, 1.0) == 2.0);
  CHECK(hopping_from_cavity_params(1.0, 1.0, 2.0) == 1.0 / 16.0);
  CHECK_THROWS_AS(hopping_from_cavity_params(0.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(hopping_from_cavity_params(1.0, -1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(hopping_from_cavity_params(1.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(ModelParams{}.validate());
  ModelParams p;
  p.L = 7;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.g = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.gamma = -0.1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.t = NAN;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  NumericsConfig c;
  c.damping = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.damping = 1.5;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.root_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.damping = 1.0;
  CHECK_NOTHROW(c.validate());
}

TEST_SUITE("sector algebra") {
  TEST_CASE("resonance") {
    for (const double eps : {0.0, 0.7, 2.0}) {
      const auto s = sector_energy_given_omegabar(1, eps, chain(0, eps));
      CHECK(s.chi == doctest::Approx(1.0));
      CHECK(s.alpha == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(s.beta == doctest::Approx(1.0 / std::sqrt(2.0)));
      CHECK(s.energy == doctest::Approx(eps - 1.0));
    }
  }

  TEST_CASE("zero hopping, zero detuning") {
    CHECK(sector_energy_given_omegabar(1, 0.0, chain(0)).energy == -1.0);
    for (int n = 1; n <= 8; ++n) {
      CHECK(sector_energy_given_omegabar(n, 0.0, chain(0)).energy == doctest::Approx(-std::sqrt(n)).epsilon(1e-15));
    }
  }

  TEST_CASE("vacuum sector") {
    for (const double w : {-3.0, -0.2, 0.0, 0.5}) {
      const auto s = sector_energy_given_omegabar(0, w, chain(0, 0.5));
      CHECK(s.energy == 0.0);
      CHECK(s.alpha == 1.0);
      CHECK(s.beta == 0.0);
      CHECK(s.chi == doctest::Approx(std::abs(w - 0.5) / 2));
    }
    CHECK_THROWS_AS(sector_energy_given_omegabar(-1, 0.0, chain(0)), InvalidArgument);
  }

  TEST_CASE("1000 random sectors against a generic 2x2 eigensolver") {
    std::mt19937_64 rng(20260101);
    std::uniform_int_distribution<int> n_dist(1, 8);
    std::uniform_real_distribution<double> w_dist(-10.0, 10.0);
    std::uniform_real_distribution<double> e_dist(0.0, 2.0);
    double worst_energy = 0.0;
    double worst_norm = 0.0;
    double worst_beta = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const int n = n_dist(rng);
      const double w = w_dist(rng);
      const double eps = e_dist(rng);
      const auto s = sector_energy_given_omegabar(n, w, chain(0, eps));
      const auto ref = oracle::sector_block(n, w, eps);
      worst_energy = std::max(worst_energy, std::abs(s.energy - ref.energy));
      worst_norm = std::max(worst_norm, std::abs(s.alpha * s.alpha + s.beta * s.beta - 1.0));
      worst_beta = std::max(worst_beta, std::abs(s.beta * s.beta - ref.beta2));
      CHECK(s.chi >= std::sqrt(n) - 1e-15);
      CHECK(s.alpha >= 0.0);
      CHECK(s.beta >= 0.0);
    }
    CHECK(worst_energy < 1e-12);
    CHECK(worst_norm < 1e-12);
    CHECK(worst_beta < 1e-12);
  }

  TEST_CASE("far-detuned amplitudes keep relative accuracy") {
    // beta^2 = (chi + D/2)/(2 chi) for D = -2000, n = 1: g^2/(2 chi (chi - D/2)).
    const auto s = sector_energy_given_omegabar(1, -2000.0, chain(0));
    const long double chi = std::sqrt(1.0L + 1000.0L * 1000.0L);
    const long double beta2 = 1.0L / (2.0L * chi * (chi + 1000.0L));
    CHECK(std::abs(s.beta * s.beta / static_cast<double>(beta2) - 1.0) < 1e-12);
  }
}

TEST_SUITE("photon-density fixed point") {
  TEST_CASE("resonance without Kerr gives n0 = n - 1/2") {
    for (int n = 1; n <= 6; ++n) {
      const auto s = solve_sector_with_dispersion(0.0, 0.4, n, chain(0.1, 0.4), {});
      CHECK(s.n0 == doctest::Approx(n - 0.5).epsilon(1e-15));
      CHECK(s.path == FixedPointPath::closed_form);
    }
  }

  TEST_CASE("without Kerr the energy is the bare sector energy") {
    const ModelParams p = chain(0.2, 0.3);
    for (const int k : {0, 100, 500, 901}) {
      for (int n = 0; n <= 5; ++n) {
        const auto s = solve_sector(k, n, p, {});
        CHECK(s.omega_bar == s.omega_k);
        CHECK(s.energy == sector_energy_given_omegabar(n, dispersion(k, p, {}), p).energy);
      }
    }
  }

  TEST_CASE("Kerr sector at the band bottom against an independent bisection") {
    const ModelParams p = chain(0.1, 0.0, 0.01);
    const auto s = solve_sector(p.L / 2, 3, p, {});
    const double omega = oracle::band_bottom(0.1);
    const double ref = oracle::photon_density(3, omega, 0.0, 0.01, 1e-13);
    CHECK(s.path == FixedPointPath::damped);
    CHECK(s.n0 > 2.0);
    CHECK(s.n0 < 3.0);
    CHECK(std::abs(s.n0 - ref) < 1e-12);
  }

  TEST_CASE("stored fields are consistent") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    NumericsConfig cfg;
    for (int i = 0; i < 300; ++i) {
      const ModelParams p = chain(0.3 * u(rng), 2.0 * u(rng), 0.05 * u(rng), 100);
      const int k = static_cast<int>(100 * u(rng));
      const int n = static_cast<int>(9 * u(rng));
      const SectorState s = solve_sector(k, n, p, cfg);
      CHECK(s.omega_bar == s.omega_k + p.gamma * s.n0);
      CHECK(std::abs(s.n0 - (n - s.beta * s.beta)) < cfg.fixpoint_tol);
      CHECK(s.residual < cfg.fixpoint_tol);
      if (n == 0) {
        CHECK(s.n0 == 0.0);
      } else {
        CHECK(s.n0 >= n - 1.0);
        CHECK(s.n0 <= n);
        CHECK(std::abs(s.alpha * s.alpha + s.beta * s.beta - 1.0) < 1e-12);
        CHECK(s.chi >= p.g * std::sqrt(n));
      }
    }
  }

  TEST_CASE("bisection fallback") {
    NumericsConfig cfg;
    cfg.fixpoint_max_iter = 1;
    const ModelParams p = chain(0.1, 0.0, 0.02);
    const auto s = solve_sector(p.L / 2, 4, p, cfg);
    CHECK(s.path == FixedPointPath::bisection);
    CHECK(s.residual < cfg.fixpoint_tol);
    CHECK(std::abs(s.n0 - solve_sector(p.L / 2, 4, p, {}).n0) < 1e-11);
  }

  TEST_CASE("never returns a state outside the tolerance") {
    // With a tolerance of 1e-300 only an exactly vanishing residual is
    // acceptable; otherwise the solver must throw with the last residual.
    NumericsConfig cfg;
    cfg.fixpoint_tol = 1e-300;
    cfg.fixpoint_max_iter = 5;
    for (int k = 0; k <= 500; k += 125) {
      for (int n = 1; n <= 6; ++n) {
        try {
          const auto s = solve_sector(k, n, chain(0.1, 0.0, 0.05), cfg);
          CHECK(s.residual < cfg.fixpoint_tol);
        } catch (const ConvergenceError& e) {
          CHECK(e.last_residual() < 1e-12);
        }
      }
    }
  }

  TEST_CASE("forcing the iteration without Kerr reproduces the closed form") {
    NumericsConfig iterative;
    iterative.closed_form_without_kerr = false;
    const ModelParams p = chain(0.15, 0.5);
    for (int n = 1; n <= 6; ++n) {
      const auto a = solve_sector(p.L / 2, n, p, {});
      const auto b = solve_sector(p.L / 2, n, p, iterative);
      CHECK(b.path == FixedPointPath::damped);
      CHECK(a.energy == b.energy);
      CHECK(std::abs(a.n0 - b.n0) < 1e-12);
    }
  }

  TEST_CASE("vanishing Kerr constant is continuous") {
    for (int n = 0; n <= 6; ++n) {
      for (const int k : {0, 250, 500}) {
        const double e0 = solve_sector(k, n, chain(0.1, 0.5, 0.0), {}).energy;
        const double e1 = solve_sector(k, n, chain(0.1, 0.5, 1e-6), {}).energy;
        // First order in gamma the shift is gamma n0^2 <= gamma n^2.
        CHECK(std::abs(e1 - e0) <= 1e-6 * n * n + 1e-12);
      }
    }
  }

  TEST_CASE("evaluation order does not change results") {
    const ModelParams p = chain(0.2, 0.2, 0.01, 64);
    std::vector<std::pair<int, int>> cells;
    for (int k = 0; k <= p.L; k += 3) {
      for (int n = 0; n <= 4; ++n) cells.emplace_back(k, n);
    }
    std::vector<double> forward;
    for (const auto& [k, n] : cells) forward.push_back(solve_sector(k, n, p, {}).energy);
    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937(3));
    for (const std::size_t i : order) {
      CHECK(same_bits(solve_sector(cells[i].first, cells[i].second, p, {}).energy, forward[i]));
    }
  }
}

TEST_SUITE("spectrum") {
  TEST_CASE("flat band without hopping") {
    const auto band = spectrum_over_k(2, chain(0.0, 0.3, 0.01), {}, 201);
    REQUIRE(band.size() == 201);
    for (const auto& s : band) CHECK(std::abs(s.energy - band.front().energy) < 1e-12);
  }

  TEST_CASE("minimum at L/2 and maximum at the zone edges") {
    const auto band = spectrum_over_k(1, chain(0.2), {}, 201);
    const auto [lo, hi] = std::minmax_element(band.begin(), band.end(),
                                              [](const auto& a, const auto& b) { return a.energy < b.energy; });
    CHECK(lo->k == 500.0);
    CHECK((hi->k == 0.0 || hi->k == 1000.0));
    CHECK(band.front().energy == band.back().energy);
  }

  TEST_CASE("bandwidth grows with hopping") {
    const auto width = [](double t) {
      const auto band = spectrum_over_k(1, chain(t), {}, 201);
      const auto [lo, hi] = std::minmax_element(band.begin(), band.end(),
                                                [](const auto& a, const auto& b) { return a.energy < b.energy; });
      return hi->energy - lo->energy;
    };
    CHECK(width(0.2) > width(0.001));
    CHECK(width(0.001) < 0.005);
  }

  TEST_CASE("needs two samples") { CHECK_THROWS_AS(spectrum_over_k(1, chain(0.1), {}, 1), InvalidArgument); }
}
