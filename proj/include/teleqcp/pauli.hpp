#pragma once

// Operator kernel for an L-qubit register.
//
// Basis convention: site 1 is the most significant bit of the basis index, so
// site j lives at bit (L - j). Bit value 0 is spin up (sigma^z = +1).

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "teleqcp/errors.hpp"

namespace teleqcp {

using Complex = std::complex<double>;
using Index = Eigen::Index;

inline constexpr int kMaxSites = 20;

enum class Axis { X, Y, Z };

char axis_name(Axis a);

/// Site on a periodic chain of length L, stored in [1, L].
class SiteIndex {
public:
  SiteIndex(int j, int chain_length);

  /// Maps any integer onto [1, L] modulo L (so L + 1 -> 1, 0 -> L).
  static SiteIndex wrap(int j, int chain_length);

  int value() const { return j_; }
  int chain_length() const { return L_; }
  /// Bit position of this site inside a basis index.
  int bit() const { return L_ - j_; }

  SiteIndex next() const { return wrap(j_ + 1, L_); }

  friend bool operator==(const SiteIndex&, const SiteIndex&) = default;
  friend auto operator<=>(const SiteIndex& a, const SiteIndex& b) { return a.j_ <=> b.j_; }

private:
  SiteIndex() = default;
  int j_ = 1;
  int L_ = 1;
};

/// Product of single-site Pauli matrices; identity on unlisted sites.
///
/// Stored as an X-mask (bits flipped) and per-site phase rules, so that every
/// column of the 2^L matrix has exactly one nonzero entry.
class PauliString {
public:
  explicit PauliString(int chain_length);
  PauliString(int chain_length, const std::map<int, Axis>& factors);

  int chain_length() const { return L_; }
  const std::map<int, Axis>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }
  Index dimension() const { return Index{1} << L_; }

  /// Basis bits flipped by the string.
  std::uint64_t flip_mask() const { return flip_mask_; }

  /// Matrix element <col ^ flip_mask| P |col>, the only nonzero in column col.
  Complex phase(std::uint64_t col) const;

  Eigen::SparseMatrix<Complex> to_sparse() const;
  Eigen::MatrixXcd to_dense() const { return Eigen::MatrixXcd(to_sparse()); }

  std::string label() const;

private:
  void rebuild();

  int L_;
  std::map<int, Axis> factors_;
  std::uint64_t flip_mask_ = 0;
  std::uint64_t z_mask_ = 0;  // sites contributing a (-1)^bit sign (Y or Z)
  int y_count_ = 0;
};

/// sigma^axis acting on site j of an L-site register.
PauliString site_operator(Axis axis, int j, int chain_length);

/// sigma^a_i sigma^b_j (i != j).
PauliString two_site_operator(Axis a, int i, Axis b, int j, int chain_length);

/// 2x2 Pauli matrix.
Eigen::Matrix2cd pauli_matrix(Axis a);

/// Number of qubits n such that 2^n == dim; throws if dim is not a power of two.
int qubit_count(Index dim);

namespace detail {

struct KeptBits {
  std::vector<int> bits;  // bit positions, first kept site is the most significant
  std::uint64_t mask = 0;
};

KeptBits kept_bits(std::span<const int> keep, int chain_length);

/// Packs the kept bits of i into a compact index.
inline std::uint64_t gather(std::uint64_t i, const KeptBits& kb) {
  std::uint64_t s = 0;
  for (int b : kb.bits) s = (s << 1) | ((i >> b) & 1u);
  return s;
}

/// Inverse of gather: spreads a compact index onto the kept bit positions.
inline std::uint64_t scatter(std::uint64_t s, const KeptBits& kb) {
  std::uint64_t i = 0;
  const int m = static_cast<int>(kb.bits.size());
  for (int t = 0; t < m; ++t) {
    if ((s >> (m - 1 - t)) & 1u) i |= std::uint64_t{1} << kb.bits[t];
  }
  return i;
}

}  // namespace detail

/// Partial trace of an operator on 2^L dimensions, keeping `keep` in the given order.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_trace(
    const Eigen::MatrixBase<Derived>& rho, std::span<const int> keep, int chain_length) {
  using Scalar = typename Derived::Scalar;
  const Index dim = Index{1} << chain_length;
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("partial_trace: operator dimension does not match 2^L");
  const auto kb = detail::kept_bits(keep, chain_length);
  const Index kdim = Index{1} << kb.bits.size();

  std::vector<std::uint64_t> spread(static_cast<std::size_t>(kdim));
  for (Index s = 0; s < kdim; ++s) spread[s] = detail::scatter(s, kb);

  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(kdim, kdim);
  for (Index i = 0; i < dim; ++i) {
    const auto ui = static_cast<std::uint64_t>(i);
    const auto s = detail::gather(ui, kb);
    const auto env = ui & ~kb.mask;
    for (Index t = 0; t < kdim; ++t) out(s, t) += rho(i, static_cast<Index>(env | spread[t]));
  }
  return out;
}

/// Tr[P rho] for a Pauli string P, with the imaginary part checked.
template <typename Derived>
double expectation(const Eigen::MatrixBase<Derived>& rho, const PauliString& op) {
  const Index dim = op.dimension();
  if (rho.rows() != dim || rho.cols() != dim)
    throw std::invalid_argument("expectation: operator dimension mismatch");
  Complex acc{0.0, 0.0};
  const auto flip = op.flip_mask();
  for (Index c = 0; c < dim; ++c) {
    const auto uc = static_cast<std::uint64_t>(c);
    acc += op.phase(uc) * Complex(rho(c, static_cast<Index>(uc ^ flip)));
  }
  if (std::abs(acc.imag()) > 1e-8)
    throw NumericalConsistencyError("expectation: imaginary part " + std::to_string(acc.imag()) +
                                    " signals a non-Hermitian input");
  return acc.real();
}

/// Kronecker product, left factor on the more significant qubits.
template <typename A, typename B>
Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(const Eigen::MatrixBase<A>& a,
                                                                       const Eigen::MatrixBase<B>& b) {
  Eigen::Matrix<typename A::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(a.rows() * b.rows(),
                                                                        a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
///
/// Checks run once at construction (tolerance 1e-10); afterwards the value is
/// immutable.
class DensityMatrix {
public:
  static constexpr double kTolerance = 1e-10;

  explicit DensityMatrix(Eigen::MatrixXcd m);

  const Eigen::MatrixXcd& matrix() const { return m_; }
  Index dimension() const { return m_.rows(); }
  int qubits() const { return qubit_count(m_.rows()); }

  Complex operator()(Index r, Index c) const { return m_(r, c); }

  static DensityMatrix maximally_mixed(int qubits);
  static DensityMatrix pure(const Eigen::VectorXcd& psi);

private:
  Eigen::MatrixXcd m_;
};

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep, int chain_length);
inline DensityMatrix partial_trace(const DensityMatrix& rho, std::initializer_list<int> keep,
                                   int chain_length) {
  return partial_trace(rho, std::span<const int>(keep.begin(), keep.size()), chain_length);
}

double expectation(const DensityMatrix& rho, const PauliString& op);

}  // namespace teleqcp
