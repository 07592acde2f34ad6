#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

#include "teleqcp/models.hpp"
#include "teleqcp/pauli.hpp"

namespace teleqcp {

/// One diagonalized block: eigenvalues ascending, eigenvectors as columns in
/// the block's local basis.
struct EigenBlock {
  BlockBasis basis;
  Eigen::VectorXd energies;
  Eigen::MatrixXcd vectors;
};

/// Full spectrum of H, independent of temperature.
///
/// Besides the eigenpairs it keeps the two-site reduced state of every
/// eigenvector on the bonds (1,2) and (2,3), which is all the sweep pipeline
/// needs per temperature.
class Spectrum {
public:
  Spectrum(const ModelSpec& spec, Blocking blocking = Blocking::Translation);

  const ModelSpec& spec() const { return spec_; }
  Blocking blocking() const { return blocking_; }
  const std::vector<EigenBlock>& blocks() const { return blocks_; }
  double ground_energy() const { return e_min_; }
  Index size() const;

  /// All eigenvalues, ascending.
  Eigen::VectorXd eigenvalues() const;

  /// Eigenvector `col` of block `b` expanded into the 2^L basis.
  Eigen::VectorXcd full_vector(std::size_t b, Index col) const;

  /// Per-eigenvector 4x4 reduced states; entry [b][col].
  const std::vector<std::vector<Eigen::Matrix4cd>>& bond12() const { return bond12_; }
  const std::vector<std::vector<Eigen::Matrix4cd>>& bond23() const { return bond23_; }

private:
  ModelSpec spec_;
  Blocking blocking_;
  std::vector<EigenBlock> blocks_;
  double e_min_ = 0.0;
  std::vector<std::vector<Eigen::Matrix4cd>> bond12_;
  std::vector<std::vector<Eigen::Matrix4cd>> bond23_;
};

/// Nearest-neighbour correlators of a translation-invariant state.
struct CorrelatorSet {
  double z = 0.0;   // <sigma^z_j>
  double xx = 0.0;  // <sigma^x_j sigma^x_{j+1}>
  double yy = 0.0;
  double zz = 0.0;
};

/// Canonical state exp(-H/kT)/Z on top of a shared spectrum.
class ThermalState {
public:
  /// Weights below this fraction of the largest are dropped.
  static constexpr double kWeightCutoff = 1e-300;

  ThermalState(std::shared_ptr<const Spectrum> spectrum, double kT);

  const Spectrum& spectrum() const { return *spectrum_; }
  const ModelSpec& spec() const { return spectrum_->spec(); }
  double temperature() const { return kT_; }
  double log_partition() const { return log_z_; }

  /// Normalized Gibbs weights, parallel to spectrum().blocks()[b].energies.
  const std::vector<Eigen::VectorXd>& weights() const { return weights_; }

  double energy() const;
  double purity() const;

  /// Dense Gibbs matrix; guarded to L <= 10.
  Eigen::MatrixXcd full_matrix() const;

  /// Weighted sum of the cached per-eigenvector bond states.
  Eigen::Matrix4cd bond_state(int first_site) const;

private:
  std::shared_ptr<const Spectrum> spectrum_;
  double kT_;
  double log_z_ = 0.0;
  std::vector<Eigen::VectorXd> weights_;
};

ThermalState gibbs_state(const ModelSpec& spec, double kT, Blocking blocking = Blocking::Translation);

/// Reduced state on an ordered site list, accumulated eigenvector by
/// eigenvector without building the 2^L x 2^L Gibbs matrix.
DensityMatrix reduced_state(const ThermalState& ts, std::span<const int> sites);
inline DensityMatrix reduced_state(const ThermalState& ts, std::initializer_list<int> sites) {
  return reduced_state(ts, std::span<const int>(sites.begin(), sites.size()));
}

/// z from site 1 and the ss correlators from bond (1,2). Throws
/// NumericalConsistencyError if bond (2,3) disagrees by more than 1e-9.
CorrelatorSet correlators(const ThermalState& ts);

/// Correlators of a two-site state (qubit order: site j, site j+1).
CorrelatorSet correlators_from_pair(const Eigen::Matrix4cd& rho);

}  // namespace teleqcp
