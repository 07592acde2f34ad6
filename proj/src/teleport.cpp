#include "teleqcp/teleport.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace teleqcp {

namespace {

constexpr double kTieTolerance = 1e-12;
const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

const Eigen::Matrix2cd& identity2() {
  static const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  return id;
}

/// Tr_12[(P x 1) rho (P x 1)] for an 8x8 rho, as a 2x2 operator on qubit 3.
Eigen::Matrix2cd bob_unnormalized(const Eigen::MatrixXcd& rho, Bell outcome) {
  // With P = |b><b|, Tr_12[(P x 1) rho (P x 1)] = sum_{ab,cd} b*_{ab} b_{cd} rho[(ab)k, (cd)l].
  const Eigen::Vector4cd b = bell_vector(outcome);
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      Complex acc{0.0, 0.0};
      for (int ab = 0; ab < 4; ++ab) {
        if (b(ab) == Complex(0.0, 0.0)) continue;
        for (int cd = 0; cd < 4; ++cd) {
          if (b(cd) == Complex(0.0, 0.0)) continue;
          acc += std::conj(b(ab)) * b(cd) * rho(2 * ab + k, 2 * cd + l);
        }
      }
      out(k, l) = acc;
    }
  return out;
}

void require_qubits(const DensityMatrix& rho, int n, const char* what) {
  if (rho.qubits() != n)
    throw std::invalid_argument(std::string(what) + ": expected a " + std::to_string(n) +
                                "-qubit state, got " + std::to_string(rho.qubits()));
}

}  // namespace

std::string bell_name(Bell b) {
  switch (b) {
    case Bell::PhiPlus: return "phi+";
    case Bell::PhiMinus: return "phi-";
    case Bell::PsiPlus: return "psi+";
    case Bell::PsiMinus: return "psi-";
  }
  return "?";
}

Eigen::Vector4cd bell_vector(Bell b) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  switch (b) {
    case Bell::PhiPlus: v(0) = kInvSqrt2; v(3) = kInvSqrt2; break;
    case Bell::PhiMinus: v(0) = kInvSqrt2; v(3) = -kInvSqrt2; break;
    case Bell::PsiPlus: v(1) = kInvSqrt2; v(2) = kInvSqrt2; break;
    case Bell::PsiMinus: v(1) = kInvSqrt2; v(2) = -kInvSqrt2; break;
  }
  return v;
}

Eigen::Matrix4cd bell_projector(Bell b) {
  const Eigen::Vector4cd v = bell_vector(b);
  return v * v.adjoint();
}

Eigen::Matrix2cd correction(Bell resource, Bell outcome) {
  const Eigen::Matrix2cd X = pauli_matrix(Axis::X);
  const Eigen::Matrix2cd Z = pauli_matrix(Axis::Z);
  const Eigen::Matrix2cd ZX = Z * X;
  // Rows: resource; columns: outcome in the order phi+, phi-, psi+, psi-.
  const Eigen::Matrix2cd* table[4][4] = {
      {&identity2(), &Z, &X, &ZX},
      {&Z, &identity2(), &ZX, &X},
      {&X, &ZX, &identity2(), &Z},
      {&ZX, &X, &Z, &identity2()},
  };
  return *table[static_cast<int>(resource)][static_cast<int>(outcome)];
}

PureQubit PureQubit::from_angles(double theta, double phi) {
  Eigen::Vector2cd psi;
  psi << std::cos(theta / 2.0), std::polar(std::sin(theta / 2.0), phi);
  return PureQubit(psi, theta, phi);
}

PureQubit PureQubit::from_amplitudes(Complex a0, Complex a1) {
  const double n = std::sqrt(std::norm(a0) + std::norm(a1));
  if (n == 0.0) throw std::invalid_argument("PureQubit: zero vector");
  a0 /= n;
  a1 /= n;
  // Remove the global phase so that a0 is real and non-negative.
  const Complex g = std::abs(a0) > 0.0 ? std::conj(a0) / std::abs(a0) : std::conj(a1) / std::abs(a1);
  a0 *= g;
  a1 *= g;
  const double theta = 2.0 * std::atan2(std::abs(a1), std::abs(a0));
  const double phi = std::abs(a1) > 0.0 ? std::arg(a1) : 0.0;
  Eigen::Vector2cd psi;
  psi << a0, a1;
  return PureQubit(psi, theta, phi);
}

DensityMatrix joint_input(const DensityMatrix& rho1, const DensityMatrix& rho23) {
  require_qubits(rho1, 1, "joint_input");
  require_qubits(rho23, 2, "joint_input");
  return DensityMatrix(kron(rho1.matrix(), rho23.matrix()));
}

double outcome_probability(const DensityMatrix& rho, Bell outcome) {
  require_qubits(rho, 3, "outcome_probability");
  return bob_unnormalized(rho.matrix(), outcome).trace().real();
}

DensityMatrix bob_output(const DensityMatrix& rho, Bell outcome, Bell resource) {
  require_qubits(rho, 3, "bob_output");
  const Eigen::Matrix2cd m = bob_unnormalized(rho.matrix(), outcome);
  const double q = m.trace().real();
  if (q <= kImpossibleOutcome)
    throw OutcomeImpossibleError("bob_output: outcome " + bell_name(outcome) + " has probability " +
                                 std::to_string(q));
  const Eigen::Matrix2cd u = correction(resource, outcome);
  return DensityMatrix(u * m * u.adjoint() / q);
}

Eigen::Vector3d bloch_vector(const DensityMatrix& rho) {
  require_qubits(rho, 1, "bloch_vector");
  const auto& m = rho.matrix();
  return {2.0 * m(1, 0).real(), 2.0 * m(1, 0).imag(), (m(0, 0) - m(1, 1)).real()};
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  return 0.5 * (bloch_vector(a) - bloch_vector(b)).norm();
}

double mean_trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho23, Bell resource) {
  const DensityMatrix rho = joint_input(rho1, rho23);
  double mean = 0.0;
  for (Bell j : kBellStates) {
    const double q = outcome_probability(rho, j);
    if (q <= kImpossibleOutcome) continue;
    mean += q * trace_distance(rho1, bob_output(rho, j, resource));
  }
  return mean;
}

double fidelity(const PureQubit& psi, const DensityMatrix& rho_b) {
  require_qubits(rho_b, 1, "fidelity");
  const auto& v = psi.amplitudes();
  return (v.adjoint() * rho_b.matrix() * v)(0, 0).real();
}

double mean_fidelity(const PureQubit& psi, const DensityMatrix& rho23, Bell resource) {
  const DensityMatrix rho = joint_input(psi.density(), rho23);
  double mean = 0.0;
  for (Bell j : kBellStates) {
    const double q = outcome_probability(rho, j);
    if (q <= kImpossibleOutcome) continue;
    mean += q * fidelity(psi, bob_output(rho, j, resource));
  }
  return mean;
}

DetectorValue internal_detector(const DensityMatrix& rho1, const DensityMatrix& rho23) {
  DetectorValue best;
  bool first = true;
  for (Bell k : kBellStates) {
    const double d = mean_trace_distance(rho1, rho23, k);
    if (first || d < best.value - kTieTolerance) {
      best = {d, k, false};
      first = false;
    } else if (std::abs(d - best.value) <= kTieTolerance) {
      best.tie = true;
    }
  }
  return best;
}

TeleportationChannel::TeleportationChannel(const DensityMatrix& rho23, Bell resource) {
  require_qubits(rho23, 2, "TeleportationChannel");
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      Eigen::Matrix2cd unit = Eigen::Matrix2cd::Zero();
      unit(a, b) = 1.0;
      const Eigen::MatrixXcd rho = kron(unit, rho23.matrix());
      Eigen::Matrix2cd image = Eigen::Matrix2cd::Zero();
      for (Bell j : kBellStates) {
        const Eigen::Matrix2cd u = correction(resource, j);
        image += u * bob_unnormalized(rho, j) * u.adjoint();
      }
      units_[2 * a + b] = image;
    }
}

Eigen::Matrix2cd TeleportationChannel::apply(const Eigen::Matrix2cd& rho1) const {
  Eigen::Matrix2cd out = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) out += rho1(a, b) * units_[2 * a + b];
  return out;
}

double TeleportationChannel::mean_fidelity(const Eigen::Vector2cd& psi) const {
  const Eigen::Matrix2cd out = apply(psi * psi.adjoint());
  return (psi.adjoint() * out * psi)(0, 0).real();
}

ExternalDetectorValue external_detector(const DensityMatrix& rho23) {
  require_qubits(rho23, 2, "external_detector");
  constexpr double pi = std::numbers::pi;
  const std::array<std::pair<double, double>, 6> poles{{
      {0.0, 0.0}, {pi, 0.0}, {pi / 2, 0.0}, {pi / 2, pi}, {pi / 2, pi / 2}, {pi / 2, 3 * pi / 2}}};

  ExternalDetectorValue best;
  bool first = true;
  for (Bell k : kBellStates) {
    const TeleportationChannel channel(rho23, k);
    auto value_at = [&](double th, double ph) {
      return channel.mean_fidelity(PureQubit::from_angles(th, ph).amplitudes());
    };
    double th = 0.0, ph = 0.0, f = -1.0;
    for (const auto& [pt, pp] : poles) {
      const double v = value_at(pt, pp);
      if (v > f) {
        f = v;
        th = pt;
        ph = pp;
      }
    }
    // Compass search; only strict improvements move the point.
    for (double step = 0.1; step >= 1e-4; step /= 2.0) {
      bool moved = true;
      while (moved) {
        moved = false;
        for (const auto& [dt, dp] : {std::pair{step, 0.0}, std::pair{-step, 0.0},
                                     std::pair{0.0, step}, std::pair{0.0, -step}}) {
          const double v = value_at(th + dt, ph + dp);
          if (v > f + 1e-15) {
            f = v;
            th += dt;
            ph += dp;
            moved = true;
          }
        }
      }
    }
    if (first || f > best.value + kTieTolerance) {
      best.value = f;
      best.resource = k;
      best.tie = false;
      best.input = PureQubit::from_angles(th, ph);
      first = false;
    } else if (std::abs(f - best.value) <= kTieTolerance) {
      best.tie = true;
    }
  }
  return best;
}

double internal_closed_form(const CorrelatorSet& c) {
  const double z = c.z, zz = c.zz;
  return 0.25 * ((2.0 - std::abs(z * z + zz)) * std::abs(z) + std::abs(z * z * z - z * zz));
}

std::string branch_name(CorrelatorBranch b) {
  switch (b) {
    case CorrelatorBranch::XX: return "xx";
    case CorrelatorBranch::YY: return "yy";
    case CorrelatorBranch::ZZ: return "zz";
  }
  return "?";
}

ExternalClosedForm external_closed_form(const CorrelatorSet& c) {
  const std::array<double, 3> mags{std::abs(c.xx), std::abs(c.yy), std::abs(c.zz)};
  ExternalClosedForm out;
  double best = mags[0];
  for (int i = 1; i < 3; ++i) {
    if (mags[i] > best + kTieTolerance) {
      best = mags[i];
      out.branch = static_cast<CorrelatorBranch>(i);
      out.tie = false;
    } else if (std::abs(mags[i] - best) <= kTieTolerance) {
      out.tie = true;
    }
  }
  out.value = 0.5 * (1.0 + best);
  return out;
}

}  // namespace teleqcp
