#include "teleqcp/pauli.hpp"

#include <algorithm>
#include <bit>
#include <set>

namespace teleqcp {

char axis_name(Axis a) {
  switch (a) {
    case Axis::X: return 'x';
    case Axis::Y: return 'y';
    case Axis::Z: return 'z';
  }
  return '?';
}

SiteIndex::SiteIndex(int j, int chain_length) : j_(j), L_(chain_length) {
  if (chain_length < 1 || chain_length > kMaxSites)
    throw std::invalid_argument("SiteIndex: chain length out of range");
  if (j < 1 || j > chain_length)
    throw std::out_of_range("SiteIndex: site " + std::to_string(j) + " outside [1, " +
                            std::to_string(chain_length) + "]");
}

SiteIndex SiteIndex::wrap(int j, int chain_length) {
  if (chain_length < 1) throw std::invalid_argument("SiteIndex: chain length must be positive");
  const int r = ((j - 1) % chain_length + chain_length) % chain_length;
  return SiteIndex(r + 1, chain_length);
}

PauliString::PauliString(int chain_length) : L_(chain_length) {
  if (chain_length < 1 || chain_length > kMaxSites)
    throw std::invalid_argument("PauliString: chain length out of range");
}

PauliString::PauliString(int chain_length, const std::map<int, Axis>& factors)
    : PauliString(chain_length) {
  for (const auto& [j, a] : factors) factors_.emplace(SiteIndex(j, L_).value(), a);
  rebuild();
}

void PauliString::rebuild() {
  flip_mask_ = 0;
  z_mask_ = 0;
  y_count_ = 0;
  for (const auto& [j, a] : factors_) {
    const std::uint64_t bit = std::uint64_t{1} << (L_ - j);
    if (a != Axis::Z) flip_mask_ |= bit;
    if (a != Axis::X) z_mask_ |= bit;
    if (a == Axis::Y) ++y_count_;
  }
}

Complex PauliString::phase(std::uint64_t col) const {
  // sigma^y = i sigma^x sigma^z: each Y contributes a factor i on top of the z sign.
  static constexpr Complex kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  const double sign = (std::popcount(col & z_mask_) & 1) ? -1.0 : 1.0;
  return sign * kIPow[y_count_ & 3];
}

Eigen::SparseMatrix<Complex> PauliString::to_sparse() const {
  const Index dim = dimension();
  std::vector<Eigen::Triplet<Complex>> entries;
  entries.reserve(static_cast<std::size_t>(dim));
  for (Index c = 0; c < dim; ++c) {
    const auto uc = static_cast<std::uint64_t>(c);
    entries.emplace_back(static_cast<Index>(uc ^ flip_mask_), c, phase(uc));
  }
  Eigen::SparseMatrix<Complex> m(dim, dim);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

std::string PauliString::label() const {
  if (factors_.empty()) return "I";
  std::string out;
  for (const auto& [j, a] : factors_) {
    if (!out.empty()) out += ' ';
    out += axis_name(a);
    out += std::to_string(j);
  }
  return out;
}

PauliString site_operator(Axis axis, int j, int chain_length) {
  return PauliString(chain_length, {{SiteIndex(j, chain_length).value(), axis}});
}

PauliString two_site_operator(Axis a, int i, Axis b, int j, int chain_length) {
  const SiteIndex si(i, chain_length), sj(j, chain_length);
  if (si == sj) throw std::invalid_argument("two_site_operator: sites must differ");
  return PauliString(chain_length, {{si.value(), a}, {sj.value(), b}});
}

Eigen::Matrix2cd pauli_matrix(Axis a) {
  Eigen::Matrix2cd m;
  switch (a) {
    case Axis::X: m << 0, 1, 1, 0; break;
    case Axis::Y: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case Axis::Z: m << 1, 0, 0, -1; break;
  }
  return m;
}

int qubit_count(Index dim) {
  if (dim < 1 || (dim & (dim - 1)) != 0)
    throw std::invalid_argument("dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(static_cast<std::uint64_t>(dim));
}

namespace detail {

KeptBits kept_bits(std::span<const int> keep, int chain_length) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep list is empty");
  KeptBits kb;
  std::set<int> seen;
  for (int j : keep) {
    if (j < 1 || j > chain_length)
      throw std::invalid_argument("partial_trace: site " + std::to_string(j) + " out of range");
    if (!seen.insert(j).second)
      throw std::invalid_argument("partial_trace: duplicate site " + std::to_string(j));
    const int bit = chain_length - j;
    kb.bits.push_back(bit);
    kb.mask |= std::uint64_t{1} << bit;
  }
  return kb;
}

}  // namespace detail

DensityMatrix::DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw std::invalid_argument("DensityMatrix: matrix is not square");
  qubit_count(m_.rows());
  const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kTolerance)
    throw NumericalConsistencyError("DensityMatrix: not Hermitian (deviation " +
                                    std::to_string(herm) + ")");
  const Complex tr = m_.trace();
  if (std::abs(tr - Complex(1.0, 0.0)) > kTolerance)
    throw NumericalConsistencyError("DensityMatrix: trace " + std::to_string(tr.real()) + " != 1");
  // Exact Hermitian part for the spectrum check; drift below tolerance is kept in m_.
  const Eigen::MatrixXcd h = 0.5 * (m_ + m_.adjoint());
  const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(h, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff();
  if (lowest < -kTolerance)
    throw NumericalConsistencyError("DensityMatrix: negative eigenvalue " + std::to_string(lowest));
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
  const Index dim = Index{1} << qubits;
  return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::pure(const Eigen::VectorXcd& psi) {
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("DensityMatrix::pure: state not normalized");
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep, int chain_length) {
  return DensityMatrix(partial_trace(rho.matrix(), keep, chain_length));
}

double expectation(const DensityMatrix& rho, const PauliString& op) {
  return expectation(rho.matrix(), op);
}

}  // namespace teleqcp
