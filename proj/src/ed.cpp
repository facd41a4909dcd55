#include "jchk/ed.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "jchk/errors.hpp"

namespace jchk::ed {

FockBasis::FockBasis(int sites, int n_max) : sites_(sites), n_max_(n_max), dim_(1) {
  if (sites < 1) throw InvalidArgument("ED chain needs at least one cavity");
  if (n_max < 0) throw InvalidArgument("photon cutoff must be non-negative");
  const auto local = static_cast<std::size_t>(local_dim());
  strides_.reserve(static_cast<std::size_t>(sites));
  for (int j = 0; j < sites; ++j) {
    strides_.push_back(dim_);
    if (dim_ > std::numeric_limits<std::size_t>::max() / local) {
      throw CapacityError("Fock basis dimension overflows");
    }
    dim_ *= local;
  }
}

SiteState FockBasis::site(std::size_t index, int j) const {
  const auto local = static_cast<int>((index / strides_[static_cast<std::size_t>(j)]) %
                                      static_cast<std::size_t>(local_dim()));
  return {local / (n_max_ + 1), local % (n_max_ + 1)};
}

std::size_t FockBasis::replace_site(std::size_t index, int j, SiteState s) const {
  const SiteState old = site(index, j);
  const std::size_t stride = strides_[static_cast<std::size_t>(j)];
  const auto old_local = static_cast<std::size_t>(old.atom * (n_max_ + 1) + old.photons);
  const auto new_local = static_cast<std::size_t>(s.atom * (n_max_ + 1) + s.photons);
  return index - old_local * stride + new_local * stride;
}

std::vector<SiteState> FockBasis::decode(std::size_t index) const {
  std::vector<SiteState> out;
  out.reserve(static_cast<std::size_t>(sites_));
  for (int j = 0; j < sites_; ++j) out.push_back(site(index, j));
  return out;
}

std::size_t FockBasis::encode(std::span<const SiteState> states) const {
  if (states.size() != static_cast<std::size_t>(sites_)) throw InvalidArgument("wrong number of site states");
  std::size_t index = 0;
  for (int j = 0; j < sites_; ++j) {
    const SiteState s = states[static_cast<std::size_t>(j)];
    if (s.atom < 0 || s.atom > 1 || s.photons < 0 || s.photons > n_max_) {
      throw InvalidArgument("site state outside the truncated basis");
    }
    index += static_cast<std::size_t>(s.atom * (n_max_ + 1) + s.photons) * strides_[static_cast<std::size_t>(j)];
  }
  return index;
}

int FockBasis::excitations(std::size_t index) const {
  int total = 0;
  for (int j = 0; j < sites_; ++j) {
    const SiteState s = site(index, j);
    total += s.atom + s.photons;
  }
  return total;
}

double onsite_frequency(const ModelParams& params) { return -2.0 * params.t * zeta3(); }

Eigen::MatrixXd build_hamiltonian(const FockBasis& basis, const ModelParams& params) {
  if (basis.dim() > kMaxDenseDim) {
    throw CapacityError("Fock basis dimension " + std::to_string(basis.dim()) + " exceeds the dense cap of " +
                        std::to_string(kMaxDenseDim));
  }
  const int sites = basis.sites();
  const int n_max = basis.n_max();
  const double omega = onsite_frequency(params);
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);

  struct Bond {
    int i;
    int j;
    double amplitude;
  };
  std::vector<Bond> bonds;
  for (int i = 0; i < sites; ++i) {
    for (int j = i + 1; j < sites; ++j) {
      const int d = std::min(j - i, sites - (j - i));
      bonds.push_back({i, j, params.t / (static_cast<double>(d) * d * d)});
    }
  }

  for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
    const auto row = static_cast<Eigen::Index>(idx);
    for (int j = 0; j < sites; ++j) {
      const SiteState s = basis.site(idx, j);
      const double m = s.photons;
      h(row, row) += omega * m + params.eps * s.atom + params.gamma * m * (m - 1.0);
      // a^dagger sigma^- : |1, m> -> |0, m+1>
      if (s.atom == 1 && s.photons < n_max) {
        const auto col = static_cast<Eigen::Index>(basis.replace_site(idx, j, {0, s.photons + 1}));
        const double element = params.g * std::sqrt(m + 1.0);
        h(row, col) += element;
        h(col, row) += element;
      }
    }
    // a_i^dagger a_j; the Hermitian partner is the transposed entry.
    for (const Bond& b : bonds) {
      const SiteState si = basis.site(idx, b.i);
      const SiteState sj = basis.site(idx, b.j);
      if (sj.photons == 0 || si.photons == n_max) continue;
      std::size_t target = basis.replace_site(idx, b.j, {sj.atom, sj.photons - 1});
      target = basis.replace_site(target, b.i, {si.atom, si.photons + 1});
      const auto col = static_cast<Eigen::Index>(target);
      const double element = b.amplitude * std::sqrt(static_cast<double>(sj.photons) * (si.photons + 1.0));
      h(col, row) += element;
      h(row, col) += element;
    }
  }
  return h;
}

std::vector<int> excitation_labels(const FockBasis& basis) {
  std::vector<int> labels(basis.dim());
  for (std::size_t i = 0; i < basis.dim(); ++i) labels[i] = basis.excitations(i);
  return labels;
}

double excitation_commutator_norm(const Eigen::MatrixXd& h, const FockBasis& basis) {
  const std::vector<int> labels = excitation_labels(basis);
  double worst = 0.0;
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const int dn = labels[static_cast<std::size_t>(c)] - labels[static_cast<std::size_t>(r)];
      worst = std::max(worst, std::abs(h(r, c) * dn));
    }
  }
  return worst;
}

namespace {

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& h) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ConvergenceError("symmetric eigensolver failed", 0.0);
  const Eigen::VectorXd& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

void check_symmetric(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw InvalidArgument("matrix is not square");
  if (static_cast<std::size_t>(h.rows()) > kMaxDenseDim) {
    throw CapacityError("matrix dimension " + std::to_string(h.rows()) + " exceeds the dense cap");
  }
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InvalidArgument("matrix is not symmetric");
  }
}

}  // namespace

std::map<int, std::vector<double>> sector_spectra(const Eigen::MatrixXd& h, std::span<const int> sector_labels,
                                                  int max_label) {
  check_symmetric(h);
  if (sector_labels.size() != static_cast<std::size_t>(h.rows())) {
    throw InvalidArgument("one sector label per row is required");
  }
  std::map<int, std::vector<Eigen::Index>> blocks;
  for (std::size_t i = 0; i < sector_labels.size(); ++i) {
    if (sector_labels[i] <= max_label) blocks[sector_labels[i]].push_back(static_cast<Eigen::Index>(i));
  }
  std::map<int, std::vector<double>> out;
  for (const auto& [label, members] : blocks) {
    const auto size = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd block(size, size);
    for (Eigen::Index a = 0; a < size; ++a) {
      for (Eigen::Index b = 0; b < size; ++b) block(a, b) = h(members[a], members[b]);
    }
    out[label] = symmetric_eigenvalues(block);
  }
  return out;
}

EDResult diagonalize(const Eigen::MatrixXd& h, std::span<const int> sector_labels) {
  check_symmetric(h);
  EDResult result;
  result.eigenvalues = symmetric_eigenvalues(h);
  if (!sector_labels.empty()) {
    result.sector_eigenvalues = sector_spectra(h, sector_labels, std::numeric_limits<int>::max());
    for (const auto& [label, ev] : result.sector_eigenvalues) result.sector_minima[label] = ev.front();
  }
  return result;
}

JcDoublet single_cavity_jc_kerr_spectrum(int n, const ModelParams& params) {
  if (n < 1) throw InvalidArgument("JC doublet needs n >= 1, got " + std::to_string(n));
  const double omega = onsite_frequency(params);
  const double photons = n;
  const double both = omega * photons + params.gamma * photons * (photons - 1.0);
  const double excited = omega * (photons - 1.0) + params.eps + params.gamma * (photons - 1.0) * (photons - 2.0);
  const double mean = 0.5 * (both + excited);
  const double split = std::hypot(0.5 * (both - excited), params.g * std::sqrt(photons));
  return {mean - split, mean + split};
}

std::vector<double> zero_hopping_levels(int sites, int total_excitations, const ModelParams& params) {
  if (sites < 1 || total_excitations < 0) throw InvalidArgument("invalid decoupled-level request");
  std::vector<double> levels;
  const std::function<void(int, int, double)> expand = [&](int site, int remaining, double energy) {
    if (site == sites - 1) {
      if (remaining == 0) {
        levels.push_back(energy);
      } else {
        const JcDoublet pair = single_cavity_jc_kerr_spectrum(remaining, params);
        levels.push_back(energy + pair.lower);
        levels.push_back(energy + pair.upper);
      }
      return;
    }
    expand(site + 1, remaining, energy);
    for (int here = 1; here <= remaining; ++here) {
      const JcDoublet pair = single_cavity_jc_kerr_spectrum(here, params);
      expand(site + 1, remaining - here, energy + pair.lower);
      expand(site + 1, remaining - here, energy + pair.upper);
    }
  };
  expand(0, total_excitations, 0.0);
  std::sort(levels.begin(), levels.end());
  return levels;
}

}  // namespace jchk::ed
