#pragma once

// Mixed-state teleportation of qubit 1 through the resource rho_23.
//
// Three-qubit states are ordered (1, 2, 3) with qubit 1 most significant.
// Alice measures qubits 1 and 2 in the Bell basis; Bob holds qubit 3.

#include <Eigen/Dense>

#include <array>
#include <string>

#include "teleqcp/pauli.hpp"
#include "teleqcp/thermal.hpp"

namespace teleqcp {

/// Bell states, in tie-breaking order.
enum class Bell { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

inline constexpr std::array<Bell, 4> kBellStates{Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus,
                                                 Bell::PsiMinus};

std::string bell_name(Bell b);

Eigen::Vector4cd bell_vector(Bell b);
Eigen::Matrix4cd bell_projector(Bell b);

/// Bob's correction when Alice reads `outcome` and the resource is assumed to
/// be the Bell state `resource` (the correction set S_resource).
Eigen::Matrix2cd correction(Bell resource, Bell outcome);

/// Pure single-qubit input cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
class PureQubit {
public:
  static PureQubit from_angles(double theta, double phi);
  /// Normalizes; throws on a zero vector.
  static PureQubit from_amplitudes(Complex a0, Complex a1);

  const Eigen::Vector2cd& amplitudes() const { return psi_; }
  double theta() const { return theta_; }
  double phi() const { return phi_; }
  DensityMatrix density() const { return DensityMatrix::pure(psi_); }

private:
  PureQubit(Eigen::Vector2cd psi, double theta, double phi) : psi_(psi), theta_(theta), phi_(phi) {}
  Eigen::Vector2cd psi_;
  double theta_;
  double phi_;
};

DensityMatrix joint_input(const DensityMatrix& rho1, const DensityMatrix& rho23);

/// Tr[(P_j x 1) rho].
double outcome_probability(const DensityMatrix& rho, Bell outcome);

/// Outcomes at or below this probability are treated as impossible.
inline constexpr double kImpossibleOutcome = 1e-14;

/// U_j Tr_12[P_j rho P_j] U_j^dagger / Q_j. Throws OutcomeImpossibleError when
/// Q_j <= kImpossibleOutcome.
DensityMatrix bob_output(const DensityMatrix& rho, Bell outcome, Bell resource);

/// Half the Bloch-vector distance between two qubit states.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

Eigen::Vector3d bloch_vector(const DensityMatrix& rho);

double mean_trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho23, Bell resource);

double fidelity(const PureQubit& psi, const DensityMatrix& rho_b);

double mean_fidelity(const PureQubit& psi, const DensityMatrix& rho23, Bell resource);

/// Optimized detector value with the correction set that attained it.
struct DetectorValue {
  double value = 0.0;
  Bell resource = Bell::PhiPlus;
  bool tie = false;  // another correction set reached the same value within 1e-12
};

/// Minimum over correction sets of the mean trace distance.
DetectorValue internal_detector(const DensityMatrix& rho1, const DensityMatrix& rho23);

struct ExternalDetectorValue : DetectorValue {
  PureQubit input = PureQubit::from_angles(0.0, 0.0);
};

/// Maximum over correction sets and pure inputs of the mean fidelity. The six
/// Bloch poles are evaluated first; each correction set is then refined by a
/// compass search on (theta, phi) down to 1e-4 rad.
ExternalDetectorValue external_detector(const DensityMatrix& rho23);

/// Averaged teleportation channel rho_1 -> sum_j U_j Tr_12[P_j (rho_1 x rho_23) P_j] U_j^dagger
/// for one correction set, stored through its action on the four matrix units.
class TeleportationChannel {
public:
  TeleportationChannel(const DensityMatrix& rho23, Bell resource);
  Eigen::Matrix2cd apply(const Eigen::Matrix2cd& rho1) const;
  /// <psi| channel(|psi><psi|) |psi>, equal to the mean fidelity.
  double mean_fidelity(const Eigen::Vector2cd& psi) const;

private:
  std::array<Eigen::Matrix2cd, 4> units_;  // image of |a><b|, index 2a + b
};

// Closed forms in terms of the correlators.

double internal_closed_form(const CorrelatorSet& c);

enum class CorrelatorBranch { XX = 0, YY = 1, ZZ = 2 };
std::string branch_name(CorrelatorBranch b);

struct ExternalClosedForm {
  double value = 0.5;
  CorrelatorBranch branch = CorrelatorBranch::XX;
  bool tie = false;
};

ExternalClosedForm external_closed_form(const CorrelatorSet& c);

}  // namespace teleqcp
