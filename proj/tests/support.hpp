#pragma once

#include <Eigen/Dense>

#include <random>

#include "teleqcp/pauli.hpp"

namespace testing {

using namespace teleqcp;

inline Eigen::MatrixXcd random_complex(Index n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// G G^dagger / Tr, full rank with probability one.
inline DensityMatrix random_density(int qubits, std::mt19937& rng) {
  const Index n = Index{1} << qubits;
  Eigen::MatrixXcd g = random_complex(n, rng);
  Eigen::MatrixXcd rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(rho);
}

inline Eigen::VectorXcd random_state(int qubits, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Index{1} << qubits);
  for (Index i = 0; i < v.size(); ++i) v(i) = Complex(g(rng), g(rng));
  return v.normalized();
}

// Textbook Kronecker product written independently of teleqcp::kron.
inline Eigen::MatrixXcd dense_kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

inline Eigen::Matrix2cd sigma(char a) {
  Eigen::Matrix2cd m;
  const Complex i(0, 1);
  switch (a) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'y': m << 0, -i, i, 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: m.setIdentity();
  }
  return m;
}

// sigma^a on site j of L via a chain of dense Kronecker products.
inline Eigen::MatrixXcd dense_site(char a, int j, int L) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (int s = 1; s <= L; ++s) out = dense_kron(out, s == j ? sigma(a) : sigma('1'));
  return out;
}

inline double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing
