#include <doctest.h>

#include <vector>

#include "support.hpp"

using namespace teleqcp;
using namespace testing;

TEST_CASE("site index wraps periodically") {
  CHECK(SiteIndex::wrap(5, 4).value() == 1);
  CHECK(SiteIndex::wrap(0, 4).value() == 4);
  CHECK(SiteIndex::wrap(-3, 4).value() == 1);
  CHECK(SiteIndex(4, 4).next().value() == 1);
  CHECK(SiteIndex(1, 4).bit() == 3);
  CHECK_THROWS_AS(SiteIndex(5, 4), std::out_of_range);
  CHECK_THROWS_AS(SiteIndex(0, 4), std::out_of_range);
  CHECK(SiteIndex::wrap(2, 4) == SiteIndex::wrap(6, 4));
}

TEST_CASE("single-site Pauli matrices") {
  const Eigen::MatrixXcd z = site_operator(Axis::Z, 1, 1).to_dense();
  CHECK(max_abs(z - sigma('z')) == 0.0);

  const auto x = site_operator(Axis::X, 2, 2).to_sparse();
  CHECK(x.nonZeros() == 4);
  const Eigen::MatrixXcd xd(x);
  for (auto [r, c] : std::vector<std::pair<int, int>>{{0, 1}, {1, 0}, {2, 3}, {3, 2}})
    CHECK(xd(r, c) == Complex(1.0, 0.0));
  CHECK(max_abs(xd - dense_kron(sigma('1'), sigma('x'))) == 0.0);
}

TEST_CASE("site operators match dense Kronecker chains") {
  for (int L : {1, 2, 3, 4})
    for (int j = 1; j <= L; ++j)
      for (auto [ax, c] : {std::pair{Axis::X, 'x'}, {Axis::Y, 'y'}, {Axis::Z, 'z'}}) {
        const auto op = site_operator(ax, j, L);
        CHECK(op.to_sparse().nonZeros() == (Index{1} << L));
        CHECK(max_abs(op.to_dense() - dense_site(c, j, L)) < 1e-15);
      }
  CHECK_THROWS_AS(site_operator(Axis::X, 4, 3), std::out_of_range);
  CHECK_THROWS_AS(site_operator(Axis::X, 0, 3), std::out_of_range);
}

TEST_CASE("Pauli string algebra") {
  const int L = 3;
  const Index n = 8;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(n, n);
  const Axis axes[] = {Axis::X, Axis::Y, Axis::Z};
  for (Axis a : axes)
    for (Axis b : axes)
      for (int i = 1; i <= L; ++i)
        for (int j = 1; j <= L; ++j) {
          const Eigen::MatrixXcd A = site_operator(a, i, L).to_dense();
          const Eigen::MatrixXcd B = site_operator(b, j, L).to_dense();
          if (i == j && a != b) CHECK(max_abs(A * B + B * A) < 1e-15);
          else CHECK(max_abs(A * B - B * A) < 1e-15);
        }

  const PauliString p(L, {{1, Axis::Y}, {2, Axis::X}, {3, Axis::Z}});
  const Eigen::MatrixXcd P = p.to_dense();
  CHECK(max_abs(P - P.adjoint()) == 0.0);
  CHECK(max_abs(P * P - id) < 1e-15);
  CHECK(std::abs(P.trace()) == 0.0);
  CHECK(max_abs(P - dense_kron(dense_kron(sigma('y'), sigma('x')), sigma('z'))) < 1e-15);
  CHECK(PauliString(L).to_dense().isIdentity());

  const auto zz = two_site_operator(Axis::Z, 3, Axis::Z, 1, L);
  CHECK(max_abs(zz.to_dense() - dense_site('z', 1, L) * dense_site('z', 3, L)) < 1e-15);
  CHECK_THROWS_AS(two_site_operator(Axis::Z, 2, Axis::X, 2, L), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
  CHECK_NOTHROW(DensityMatrix::maximally_mixed(3));
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2) * 0.5;
  bad(0, 1) = Complex(0.0, 0.1);
  CHECK_THROWS_AS(DensityMatrix{bad}, NumericalConsistencyError);
  CHECK_THROWS_AS(DensityMatrix{Eigen::MatrixXcd::Identity(2, 2)}, NumericalConsistencyError);
  Eigen::MatrixXcd neg(2, 2);
  neg << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(DensityMatrix{neg}, NumericalConsistencyError);
  CHECK_THROWS_AS(DensityMatrix{Eigen::MatrixXcd::Identity(3, 3) / 3.0}, std::invalid_argument);
}

TEST_CASE("partial trace examples") {
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(4);
  phi(0) = phi(3) = 1.0 / std::sqrt(2.0);
  const auto bell = DensityMatrix::pure(phi);
  CHECK(max_abs(partial_trace(bell, {1}, 2).matrix() - Eigen::Matrix2cd::Identity() / 2.0) < 1e-15);
  CHECK(max_abs(partial_trace(bell, {2}, 2).matrix() - Eigen::Matrix2cd::Identity() / 2.0) < 1e-15);

  std::mt19937 rng(11);
  const auto a = random_density(2, rng);
  const auto b = random_density(1, rng);
  const DensityMatrix ab(dense_kron(a.matrix(), b.matrix()));
  CHECK(max_abs(partial_trace(ab, {1, 2}, 3).matrix() - a.matrix()) < 1e-14);
  CHECK(max_abs(partial_trace(ab, {3}, 3).matrix() - b.matrix()) < 1e-14);

  CHECK_THROWS_AS(partial_trace(ab, {1, 1}, 3), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(ab, {4}, 3), std::invalid_argument);
  CHECK_THROWS_AS(partial_trace(ab, {}, 3), std::invalid_argument);
}

TEST_CASE("partial trace against an index-sum oracle") {
  std::mt19937 rng(5);
  const int L = 4;
  const auto rho = random_density(L, rng);
  // Keep sites 2 and 3 (bits 2 and 1); sum over sites 1 and 4 (bits 3 and 0).
  Eigen::Matrix4cd oracle = Eigen::Matrix4cd::Zero();
  for (int s2 = 0; s2 < 2; ++s2)
    for (int s3 = 0; s3 < 2; ++s3)
      for (int t2 = 0; t2 < 2; ++t2)
        for (int t3 = 0; t3 < 2; ++t3)
          for (int e1 = 0; e1 < 2; ++e1)
            for (int e4 = 0; e4 < 2; ++e4) {
              const int i = e1 * 8 + s2 * 4 + s3 * 2 + e4;
              const int j = e1 * 8 + t2 * 4 + t3 * 2 + e4;
              oracle(s2 * 2 + s3, t2 * 2 + t3) += rho(i, j);
            }
  CHECK(max_abs(partial_trace(rho, {2, 3}, L).matrix() - oracle) < 1e-12);

  // Order of the kept sites is respected: {3, 2} is the swapped state.
  Eigen::Matrix4cd swap = Eigen::Matrix4cd::Zero();
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  CHECK(max_abs(partial_trace(rho, {3, 2}, L).matrix() - swap * oracle * swap) < 1e-12);
}

TEST_CASE("partial trace composes and preserves the trace") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const auto rho = random_density(4, rng);
    const auto once = partial_trace(rho, {1, 3}, 4);
    const auto step = partial_trace(partial_trace(rho, {1, 2, 3}, 4), {1, 3}, 3);
    CHECK(max_abs(once.matrix() - step.matrix()) < 1e-12);
    CHECK(std::abs(once.matrix().trace() - 1.0) < 1e-12);
    const Eigen::MatrixXcd raw = rho.matrix() * 2.0;
    CHECK(std::abs(partial_trace(raw, std::vector<int>{4}, 4).trace() - 2.0) < 1e-12);
  }
}

TEST_CASE("expectation values") {
  const int L = 3;
  const auto mixed = DensityMatrix::maximally_mixed(L);
  CHECK(std::abs(expectation(mixed, PauliString(L, {{2, Axis::Y}}))) < 1e-15);
  CHECK(std::abs(expectation(mixed, PauliString(L, {{1, Axis::X}, {3, Axis::Z}}))) < 1e-15);

  Eigen::VectorXcd up = Eigen::VectorXcd::Zero(4);
  up(0) = 1.0;
  CHECK(expectation(DensityMatrix::pure(up), two_site_operator(Axis::Z, 1, Axis::Z, 2, 2)) == doctest::Approx(1.0));

  std::mt19937 rng(3);
  const auto rho = random_density(L, rng);
  for (const auto& p : {PauliString(L, {{1, Axis::X}, {2, Axis::Y}}), PauliString(L, {{3, Axis::Y}}),
                        PauliString(L, {{1, Axis::Z}, {2, Axis::X}, {3, Axis::Y}})}) {
    const double oracle = (p.to_dense() * rho.matrix()).trace().real();
    const double e = expectation(rho, p);
    CHECK(std::abs(e - oracle) < 1e-12);
    CHECK(e * e <= 1.0);
  }

  Eigen::MatrixXcd skew = Eigen::MatrixXcd::Zero(2, 2);
  skew(0, 1) = 1.0;  // Tr[sigma^x skew] = 1, Tr[sigma^y skew] = i
  CHECK_THROWS_AS(expectation(skew, PauliString(1, {{1, Axis::Y}})), NumericalConsistencyError);
}

TEST_CASE("kron places the left factor on the leading qubits") {
  std::mt19937 rng(1);
  const Eigen::MatrixXcd a = random_complex(2, rng), b = random_complex(4, rng);
  CHECK(max_abs(kron(a, b) - dense_kron(a, b)) < 1e-15);
}
