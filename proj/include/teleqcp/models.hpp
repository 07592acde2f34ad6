#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <string>
#include <vector>

#include "teleqcp/pauli.hpp"

namespace teleqcp {

enum class ModelFamily { XXZ, XYTransverse };

/// Periodic spin-1/2 chain.
///
///   XXZ:          H = sum_j [ x_j x_{j+1} + y_j y_{j+1} + delta z_j z_{j+1} - (h/2) z_j ]
///   XYTransverse: H = -(lambda/4) sum_j [ (1+gamma) x_j x_{j+1} + (1-gamma) y_j y_{j+1} ]
///                     - (1/2) sum_j z_j
///
/// The bond sum runs over j = 1..L with site L+1 == 1, so L = 2 counts its
/// single bond twice.
struct ModelSpec {
  ModelFamily family = ModelFamily::XXZ;
  int length = 4;
  double delta = 0.0;   // XXZ anisotropy
  double field = 0.0;   // XXZ longitudinal field h
  double lambda = 0.0;  // XYTransverse inverse-field parameter
  double gamma = 0.0;   // XYTransverse anisotropy

  static ModelSpec xxz(int length, double delta, double field);
  static ModelSpec xy(int length, double lambda, double gamma);

  /// Throws std::invalid_argument on L < 2, L > kMaxSites or non-finite couplings.
  void validate() const;

  std::string describe() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

std::string family_name(ModelFamily f);

/// Real symmetric sparse matrix. Every term of both families is real in the
/// computational basis (sigma^y sigma^y included), so the Hermitian operator is
/// stored with a real scalar.
using HermitianOperator = Eigen::SparseMatrix<double>;

struct PauliTerm {
  double coefficient;
  PauliString op;
};

/// H as a list of weighted Pauli strings, bond terms first then field terms.
std::vector<PauliTerm> hamiltonian_terms(const ModelSpec& spec);

HermitianOperator build_hamiltonian(const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Symmetry sectors

enum class SectorKind { Magnetization, SpinFlipParity };

struct Sector {
  int label;                         // total magnetization M, or parity +1 / -1
  std::vector<std::uint32_t> states; // basis indices, ascending
};

/// Partition of the 2^L basis into sectors of a conserved quantity.
struct SymmetrySectorPlan {
  SectorKind kind;
  int length;
  std::vector<Sector> sectors;

  std::size_t total_size() const;
};

/// Magnetization sectors for XXZ and for the XX point (gamma == 0), spin-flip
/// parity sectors otherwise.
SymmetrySectorPlan symmetry_sectors(const ModelSpec& spec);

/// Total magnetization sum_j sigma^z_j of a basis state.
int magnetization(std::uint32_t state, int length);

// ---------------------------------------------------------------------------
// Diagonalization blocks

enum class Blocking {
  None,          // one block, the full 2^L space
  Conserved,     // the SymmetrySectorPlan sectors
  Translation,   // conserved sectors further split by lattice momentum
};

std::string blocking_name(Blocking b);

/// Orthonormal basis of one diagonalization block.
///
/// Element e is sum_c amplitude[c] |index[c]| over components
/// c in [offsets[e], offsets[e+1]). The first component of every element is
/// its orbit representative. For plain sectors each element has one
/// component with amplitude 1.
struct BlockBasis {
  int sector_label = 0;
  int momentum = -1;  // m with k = 2 pi m / L, or -1 when not resolved
  std::vector<std::uint32_t> offsets;
  std::vector<std::uint32_t> index;
  std::vector<Complex> amplitude;

  Index size() const { return static_cast<Index>(offsets.size()) - 1; }
};

/// Cyclic shift moving the content of site j onto site j+1.
std::uint32_t translate(std::uint32_t state, int length);

std::vector<BlockBasis> diagonalization_blocks(const ModelSpec& spec, Blocking blocking);

/// Dense Hermitian matrix of H restricted to one block.
Eigen::MatrixXcd block_hamiltonian(const std::vector<PauliTerm>& terms, const BlockBasis& block,
                                   int length);

}  // namespace teleqcp
