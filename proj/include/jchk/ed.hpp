#pragma once

// Brute-force exact diagonalization of the original spin-form chain
// Hamiltonian (no fermionic replacement, no mean-field decoupling) on a few
// periodic cavities with a per-cavity photon cutoff. Serves as an oracle for
// the limits where the mean-field engine must be exact.

#include <Eigen/Dense>

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "jchk/model.hpp"

namespace jchk::ed {

inline constexpr std::size_t kMaxDenseDim = 20'000;

struct SiteState {
  int atom = 0;     ///< 0 ground, 1 excited
  int photons = 0;  ///< in [0, n_max]
};

/// Product states of `sites` cavities, each holding one two-level atom and up
/// to n_max photons. Index = sum_j local_j * (2(n_max+1))^j with
/// local = atom * (n_max+1) + photons.
class FockBasis {
 public:
  FockBasis(int sites, int n_max);

  int sites() const { return sites_; }
  int n_max() const { return n_max_; }
  int local_dim() const { return 2 * (n_max_ + 1); }
  std::size_t dim() const { return dim_; }

  SiteState site(std::size_t index, int j) const;
  std::size_t replace_site(std::size_t index, int j, SiteState s) const;
  std::vector<SiteState> decode(std::size_t index) const;
  std::size_t encode(std::span<const SiteState> states) const;
  /// Photons plus atomic excitations summed over all cavities.
  int excitations(std::size_t index) const;

 private:
  int sites_;
  int n_max_;
  std::size_t dim_;
  std::vector<std::size_t> strides_;
};

/// Bare cavity frequency -2 t zeta(3), the value that puts the k = 0 band
/// edge at zero.
double onsite_frequency(const ModelParams& params);

/// Dense Hamiltonian with periodic minimum-image hopping t/d^3 (each cavity
/// pair counted once). Throws CapacityError when dim exceeds kMaxDenseDim.
Eigen::MatrixXd build_hamiltonian(const FockBasis& basis, const ModelParams& params);

/// Total excitation number of every basis state, usable as sector labels.
std::vector<int> excitation_labels(const FockBasis& basis);

/// max_ij |[H, N]_ij| = max_ij |H_ij (N_j - N_i)|.
double excitation_commutator_norm(const Eigen::MatrixXd& h, const FockBasis& basis);

struct EDResult {
  std::vector<double> eigenvalues;  ///< ascending
  std::map<int, double> sector_minima;
  std::map<int, std::vector<double>> sector_eigenvalues;  ///< ascending per sector
};

/// Full spectrum of a real symmetric matrix. With sector_labels (one per
/// row), each labelled block is also diagonalized on its own; the matrix is
/// assumed block-diagonal in those labels.
EDResult diagonalize(const Eigen::MatrixXd& h, std::span<const int> sector_labels = {});

/// Ascending eigenvalues of every labelled block with label <= max_label,
/// without the full spectrum.
std::map<int, std::vector<double>> sector_spectra(const Eigen::MatrixXd& h, std::span<const int> sector_labels,
                                                  int max_label);

struct JcDoublet {
  double lower = 0.0;
  double upper = 0.0;
};

/// Eigenvalues of one cavity's n-excitation block {|0,n>, |1,n-1>} including
/// the Kerr diagonal gamma m(m-1).
JcDoublet single_cavity_jc_kerr_spectrum(int n, const ModelParams& params);

/// Decoupled-cavity levels of `sites` cavities with N total excitations:
/// every sum of single-cavity levels over compositions of N. Ascending.
std::vector<double> zero_hopping_levels(int sites, int total_excitations, const ModelParams& params);

}  // namespace jchk::ed
