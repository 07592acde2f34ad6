#include "teleqcp/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace teleqcp {

namespace {

/// Scratch buffer holding one eigenvector in the full basis; only the support
/// of the current block is ever written, and it is cleared afterwards.
class FullVectorScratch {
public:
  explicit FullVectorScratch(int length) : v_(Eigen::VectorXcd::Zero(Index{1} << length)) {}

  void load(const BlockBasis& basis, const Eigen::Ref<const Eigen::VectorXcd>& coeffs) {
    for (Index e = 0; e < basis.size(); ++e)
      for (auto c = basis.offsets[e]; c < basis.offsets[e + 1]; ++c)
        v_(basis.index[c]) = coeffs(e) * basis.amplitude[c];
  }
  void clear(const BlockBasis& basis) {
    for (auto i : basis.index) v_(i) = Complex(0.0, 0.0);
  }
  const Eigen::VectorXcd& vector() const { return v_; }

private:
  Eigen::VectorXcd v_;
};

/// out += weight * Tr_env |v><v| restricted to kept bits, summing over the support.
void accumulate_reduced(const Eigen::VectorXcd& v, const BlockBasis& basis,
                        const detail::KeptBits& kb, const std::vector<std::uint64_t>& spread,
                        double weight, Eigen::MatrixXcd& out) {
  const Index kdim = out.rows();
  for (auto i : basis.index) {
    const Complex vi = v(i);
    if (vi == Complex(0.0, 0.0)) continue;
    const auto s = detail::gather(i, kb);
    const auto env = i & ~kb.mask;
    const double a = weight * vi.real(), b = weight * vi.imag();
    for (Index t = 0; t < kdim; ++t) {
      // Spelled out to avoid the NaN-checking complex multiply.
      const Complex vt = v(static_cast<Index>(env | spread[t]));
      out(static_cast<Index>(s), t) += Complex(a * vt.real() + b * vt.imag(), b * vt.real() - a * vt.imag());
    }
  }
}

/// Two-site reduced state of |v> on sites (j, j+1), 1 <= j < L.
///
/// With site 1 most significant, v viewed column-major as a
/// 2^(L-j-1) x 2^(j+1) matrix M has column index (higher sites, s) where s
/// encodes the pair; rho(s,t) = sum_hi (M^dagger M)(4 hi + t, 4 hi + s).
Eigen::Matrix4cd adjacent_pair_state(const Eigen::VectorXcd& v, int length, int first_site) {
  const Index rows = Index{1} << (length - first_site - 1);
  const Index cols = Index{1} << (first_site + 1);
  const Eigen::Map<const Eigen::MatrixXcd> m(v.data(), rows, cols);
  Eigen::MatrixXcd gram(cols, cols);
  gram.setZero();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(m.adjoint());
  gram = gram.selfadjointView<Eigen::Lower>();
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (Index hi = 0; hi < cols / 4; ++hi) rho += gram.block(4 * hi, 4 * hi, 4, 4).transpose();
  return rho;
}

std::vector<std::uint64_t> spread_table(const detail::KeptBits& kb) {
  std::vector<std::uint64_t> spread(std::size_t{1} << kb.bits.size());
  for (std::size_t s = 0; s < spread.size(); ++s) spread[s] = detail::scatter(s, kb);
  return spread;
}

}  // namespace

Spectrum::Spectrum(const ModelSpec& spec, Blocking blocking) : spec_(spec), blocking_(blocking) {
  spec_.validate();
  const int L = spec_.length;
  const auto terms = hamiltonian_terms(spec_);
  auto bases = diagonalization_blocks(spec_, blocking_);

  e_min_ = std::numeric_limits<double>::infinity();
  blocks_.reserve(bases.size());
  for (auto& basis : bases) {
    // H is real, so the block at momentum -k is the complex conjugate of the
    // block at k (same orbit order, conjugated amplitudes).
    if (basis.momentum > L / 2) {
      const int partner = L - basis.momentum;
      const auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](const EigenBlock& b) {
        return b.basis.sector_label == basis.sector_label && b.basis.momentum == partner;
      });
      if (it != blocks_.end() && it->basis.index == basis.index) {
        EigenBlock mirrored{std::move(basis), it->energies, it->vectors.conjugate()};
        blocks_.push_back(std::move(mirrored));
        continue;
      }
    }
    const Eigen::MatrixXcd h = block_hamiltonian(terms, basis, L);
    Eigen::VectorXd energies;
    Eigen::MatrixXcd vectors;
    if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.real());
      if (es.info() != Eigen::Success)
        throw NumericalConsistencyError("eigensolver failed for " + spec_.describe());
      energies = es.eigenvalues();
      vectors = es.eigenvectors().cast<Complex>();
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
      if (es.info() != Eigen::Success)
        throw NumericalConsistencyError("eigensolver failed for " + spec_.describe());
      energies = es.eigenvalues();
      vectors = es.eigenvectors();
    }
    e_min_ = std::min(e_min_, energies(0));
    blocks_.push_back({std::move(basis), std::move(energies), std::move(vectors)});
  }

  const int second = SiteIndex::wrap(2, L).value();
  const int third = SiteIndex::wrap(3, L).value();
  const std::vector<int> keep23{second, third};
  // For L = 2 the bond (2,3) wraps onto (2,1); still a valid translation check.
  const auto kb23 = detail::kept_bits(keep23, L);
  const auto sp23 = spread_table(kb23);

  FullVectorScratch scratch(L);
  bond12_.resize(blocks_.size());
  bond23_.resize(blocks_.size());
  Eigen::MatrixXcd acc(4, 4);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto& blk = blocks_[b];
    bond12_[b].resize(static_cast<std::size_t>(blk.vectors.cols()));
    bond23_[b].resize(static_cast<std::size_t>(blk.vectors.cols()));
    for (Index col = 0; col < blk.vectors.cols(); ++col) {
      scratch.load(blk.basis, blk.vectors.col(col));
      bond12_[b][col] = adjacent_pair_state(scratch.vector(), L, 1);
      if (L >= 3) {
        bond23_[b][col] = adjacent_pair_state(scratch.vector(), L, 2);
      } else {
        acc.setZero();
        accumulate_reduced(scratch.vector(), blk.basis, kb23, sp23, 1.0, acc);
        bond23_[b][col] = acc;
      }
      scratch.clear(blk.basis);
    }
  }
}

Index Spectrum::size() const {
  Index n = 0;
  for (const auto& b : blocks_) n += b.energies.size();
  return n;
}

Eigen::VectorXd Spectrum::eigenvalues() const {
  Eigen::VectorXd all(size());
  Index k = 0;
  for (const auto& b : blocks_) {
    all.segment(k, b.energies.size()) = b.energies;
    k += b.energies.size();
  }
  std::sort(all.data(), all.data() + all.size());
  return all;
}

Eigen::VectorXcd Spectrum::full_vector(std::size_t b, Index col) const {
  FullVectorScratch scratch(spec_.length);
  scratch.load(blocks_.at(b).basis, blocks_[b].vectors.col(col));
  return scratch.vector();
}

ThermalState::ThermalState(std::shared_ptr<const Spectrum> spectrum, double kT)
    : spectrum_(std::move(spectrum)), kT_(kT) {
  if (!spectrum_) throw std::invalid_argument("ThermalState: null spectrum");
  if (!(kT > 0.0) || !std::isfinite(kT))
    throw std::invalid_argument("ThermalState: kT must be positive and finite");
  // Shift by the ground energy so the largest weight is exactly 1.
  const double e0 = spectrum_->ground_energy();
  const double cutoff = -std::log(kWeightCutoff);
  double z = 0.0;
  weights_.reserve(spectrum_->blocks().size());
  for (const auto& blk : spectrum_->blocks()) {
    Eigen::VectorXd w(blk.energies.size());
    for (Index i = 0; i < w.size(); ++i) {
      const double x = (blk.energies(i) - e0) / kT;
      w(i) = x > cutoff ? 0.0 : std::exp(-x);
    }
    z += w.sum();
    weights_.push_back(std::move(w));
  }
  for (auto& w : weights_) w /= z;
  log_z_ = std::log(z) - e0 / kT;
  if (!std::isfinite(log_z_)) throw NumericalConsistencyError("ThermalState: log Z is not finite");
}

double ThermalState::energy() const {
  double e = 0.0;
  for (std::size_t b = 0; b < weights_.size(); ++b)
    e += weights_[b].dot(spectrum_->blocks()[b].energies);
  return e;
}

double ThermalState::purity() const {
  double p = 0.0;
  for (const auto& w : weights_) p += w.squaredNorm();
  return p;
}

Eigen::MatrixXcd ThermalState::full_matrix() const {
  const int L = spec().length;
  if (L > 10) throw std::invalid_argument("ThermalState::full_matrix: limited to L <= 10");
  const Index dim = Index{1} << L;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t b = 0; b < weights_.size(); ++b) {
    for (Index col = 0; col < weights_[b].size(); ++col) {
      if (weights_[b](col) == 0.0) continue;
      const Eigen::VectorXcd v = spectrum_->full_vector(b, col);
      rho.noalias() += weights_[b](col) * v * v.adjoint();
    }
  }
  return rho;
}

Eigen::Matrix4cd ThermalState::bond_state(int first_site) const {
  const auto& table = first_site == 1 ? spectrum_->bond12() : spectrum_->bond23();
  if (first_site != 1 && first_site != 2)
    throw std::invalid_argument("ThermalState::bond_state: cached bonds start at site 1 or 2");
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (std::size_t b = 0; b < weights_.size(); ++b)
    for (Index col = 0; col < weights_[b].size(); ++col)
      if (weights_[b](col) != 0.0) rho += weights_[b](col) * table[b][col];
  return rho;
}

ThermalState gibbs_state(const ModelSpec& spec, double kT, Blocking blocking) {
  if (!(kT > 0.0)) throw std::invalid_argument("gibbs_state: kT must be positive");
  return ThermalState(std::make_shared<const Spectrum>(spec, blocking), kT);
}

DensityMatrix reduced_state(const ThermalState& ts, std::span<const int> sites) {
  const int L = ts.spec().length;
  const auto kb = detail::kept_bits(sites, L);
  const auto spread = spread_table(kb);
  const Index kdim = Index{1} << kb.bits.size();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(kdim, kdim);
  FullVectorScratch scratch(L);
  const auto& blocks = ts.spectrum().blocks();
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& w = ts.weights()[b];
    for (Index col = 0; col < w.size(); ++col) {
      if (w(col) == 0.0) continue;
      scratch.load(blocks[b].basis, blocks[b].vectors.col(col));
      accumulate_reduced(scratch.vector(), blocks[b].basis, kb, spread, w(col), out);
      scratch.clear(blocks[b].basis);
    }
  }
  return DensityMatrix(std::move(out));
}

CorrelatorSet correlators_from_pair(const Eigen::Matrix4cd& rho) {
  const auto ev = [&](Axis a, Axis b) {
    return (kron(pauli_matrix(a), pauli_matrix(b)) * rho).trace().real();
  };
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  CorrelatorSet c;
  c.z = (kron(pauli_matrix(Axis::Z), id) * rho).trace().real();
  c.xx = ev(Axis::X, Axis::X);
  c.yy = ev(Axis::Y, Axis::Y);
  c.zz = ev(Axis::Z, Axis::Z);
  return c;
}

CorrelatorSet correlators(const ThermalState& ts) {
  const Eigen::Matrix4cd rho12 = ts.bond_state(1);
  const Eigen::Matrix4cd rho23 = ts.bond_state(2);
  const double drift = (rho12 - rho23).cwiseAbs().maxCoeff();
  if (drift > 1e-9)
    throw NumericalConsistencyError("correlators: translation invariance violated by " +
                                    std::to_string(drift) + " for " + ts.spec().describe());
  const auto c = correlators_from_pair(rho12);
  // <z_{j+1}> from the same bond must match <z_j>.
  const double z2 =
      (kron(Eigen::Matrix2cd::Identity(), pauli_matrix(Axis::Z)) * rho12).trace().real();
  if (std::abs(z2 - c.z) > 1e-9)
    throw NumericalConsistencyError("correlators: <z_1> != <z_2> for " + ts.spec().describe());
  return c;
}

}  // namespace teleqcp
