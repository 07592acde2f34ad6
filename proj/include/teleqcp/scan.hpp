#pragma once

// Parameter sweeps of the two detectors, finite-difference derivatives,
// finite-size step filtering, extremum location and T -> 0 extrapolation.

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "teleqcp/models.hpp"
#include "teleqcp/teleport.hpp"

namespace teleqcp {

enum class Detector { ExternalFidelity, InternalTraceDistance };
std::string detector_name(Detector d);  // "F_ext" / "D_int"

enum class TuningParameter { Delta, Lambda, Gamma };
std::string parameter_name(TuningParameter p);  // "delta" / "lambda" / "gamma"

/// Copy of `base` with the tuning parameter set to `value`.
ModelSpec with_parameter(ModelSpec base, TuningParameter p, double value);

/// Closed interval searched for one QCP, with the derivative order to use.
/// Order 0 looks at the detector itself: minimum of F_ext, maximum of D_int.
struct Window {
  double lo = 0.0;
  double hi = 0.0;
  int order = 1;

  friend bool operator==(const Window&, const Window&) = default;
};

struct StepFilterOptions {
  double radius = 0.05;       // parameter distance for a high-kT counterpart
  double drift = 1.0;         // extra radius per unit of kT between neighbouring temperatures
  double high_kT = 0.5;       // minimum temperature accepted as the reference
  double min_relative = 0.02; // peaks below this fraction of the curve maximum are ignored

  friend bool operator==(const StepFilterOptions&, const StepFilterOptions&) = default;
};

struct SweepSpec {
  std::string name;
  ModelSpec base;
  TuningParameter parameter = TuningParameter::Delta;
  double start = 0.0;
  double stop = 1.0;
  double step = 0.01;
  std::vector<double> temperatures;
  std::vector<Detector> detectors{Detector::ExternalFidelity, Detector::InternalTraceDistance};
  std::vector<Window> windows;  // empty: auto-seeded
  int auto_windows = 3;
  StepFilterOptions filter;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  Eigen::VectorXd grid() const;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

/// Sampled detector (or derivative of it) at fixed L and kT.
struct DetectorCurve {
  ModelSpec model;  // tuning parameter left at the base value
  TuningParameter parameter = TuningParameter::Delta;
  Detector detector = Detector::ExternalFidelity;
  double kT = 0.0;
  int derivative_order = 0;
  Eigen::VectorXd grid;
  Eigen::VectorXd values;
  /// Attaining branch per point: xx/yy/zz for F_ext, sign of z^3 - z zz for
  /// D_int; the correction set name in protocol mode.
  std::vector<std::string> branches;
  /// z, xx, yy, zz per grid point.
  Eigen::Matrix<double, Eigen::Dynamic, 4> correlators;

  int length() const { return model.length; }
  Index size() const { return grid.size(); }
  double step() const { return grid.size() > 1 ? grid(1) - grid(0) : 0.0; }
};

enum class Evaluation { ClosedForm, Protocol };

/// In protocol mode, closed form and protocol must agree to this.
inline constexpr double kProtocolAgreement = 1e-9;

/// One curve per (kT, detector), kT-major in the order given by the spec.
///
/// Each grid point is diagonalized once and reused for every temperature.
/// Points are spread over `workers` threads; output order does not depend on
/// the worker count. Failures are rethrown with the offending parameter value.
std::vector<DetectorCurve> sweep(const SweepSpec& spec, Evaluation mode = Evaluation::ClosedForm,
                                 int workers = 1);

/// Central differences inside, second-order one-sided formulas at the ends.
/// Requires a uniform grid and at least order + 2 points.
DetectorCurve finite_difference(const DetectorCurve& curve, int order);

/// Grid mask, true where a point is excluded.
using Mask = std::vector<bool>;

enum class ExtremumKind { Magnitude, Minimum, Maximum };

struct QcpEstimate {
  double value = 0.0;
  double error = 0.0;  // order * grid step (one step for order 0)
  double kT = 0.0;
  int length = 0;
  Detector detector = Detector::ExternalFidelity;
  int order = 1;
  Window window;
  Index grid_index = -1;
};

/// Grid point of largest |values| (or min / max) inside the window, skipping
/// masked points. Throws std::invalid_argument if the window holds no
/// unmasked grid point.
QcpEstimate locate_extremum(const DetectorCurve& dcurve, const Window& window, const Mask& mask = {},
                            ExtremumKind kind = ExtremumKind::Magnitude);

/// Local maxima of |values| (interior points only), largest first, ignoring
/// masked points and peaks below min_relative * max|values|.
std::vector<Index> derivative_peaks(const DetectorCurve& dcurve, const Mask& mask = {},
                                    double min_relative = 0.0);

struct StepFilterResult {
  std::vector<Mask> masks;  // parallel to the input curves
  std::vector<int> masked_regions;
  bool insufficient_temperatures = false;
};

/// Marks low-kT derivative spikes with no counterpart in the high-kT profile.
///
/// Temperatures are walked downward from the reference (largest kT, which
/// must be >= options.high_kT); a spike survives if some unmasked local
/// maximum of the next warmer curve lies within radius + drift * (kT gap).
/// Maxima below min_relative are never masked but still carry the chain, so a
/// feature that fades at high kT is followed down. All curves must share
/// detector, order and grid.
StepFilterResult filter_finite_size_steps(const std::vector<DetectorCurve>& dcurves,
                                          const StepFilterOptions& options = {});

/// Windows of half-width `half_width` around the `count` largest unmasked peaks.
std::vector<Window> seed_windows(const DetectorCurve& dcurve, const Mask& mask, int count,
                                 double half_width, int order = 1);

struct ZeroTExtrapolation {
  std::vector<QcpEstimate> estimates;
  double slope = 0.0;
  double intercept = 0.0;
  double intercept_stderr = 0.0;
  Eigen::VectorXd residuals;
  bool intercept_in_window = true;

  double prediction() const { return intercept; }
};

/// Ordinary least squares of estimate against kT. Needs >= 3 distinct kT.
ZeroTExtrapolation extrapolate_to_zero_T(const std::vector<QcpEstimate>& estimates);

struct CoincidenceVerdict {
  bool consistent = false;
  std::string label;  // "QCP-consistent" or "suspect-optimization-cusp"
  bool a_on_branch_change = false;
  bool b_on_branch_change = false;
};

/// True if the branch label changes within one grid step of `index`.
bool near_branch_change(const DetectorCurve& curve, Index index);

/// Compares two estimates from the same model, L and kT. The optional curves
/// provide the attaining-branch labels used for the cusp flags.
CoincidenceVerdict cross_detector_coincidence(const QcpEstimate& a, const QcpEstimate& b,
                                              const DetectorCurve* branches_a = nullptr,
                                              const DetectorCurve* branches_b = nullptr);

/// Everything derived from the curves of one detector.
struct DetectorAnalysis {
  Detector detector = Detector::ExternalFidelity;
  std::vector<DetectorCurve> curves;  // one per kT, in spec order
  std::vector<DetectorCurve> first;
  std::vector<DetectorCurve> second;
  StepFilterResult filter1;
  StepFilterResult filter2;
  std::vector<Window> windows;  // user windows, or seeded at the lowest kT
  std::vector<std::vector<std::optional<QcpEstimate>>> estimates;  // [window][kT]
  std::vector<std::optional<ZeroTExtrapolation>> extrapolations;   // [window]
};

struct CoincidenceRecord {
  double kT = 0.0;
  QcpEstimate fidelity;
  QcpEstimate trace_distance;
  CoincidenceVerdict verdict;
};

struct SweepAnalysis {
  std::vector<DetectorAnalysis> detectors;
  std::vector<CoincidenceRecord> coincidences;
  std::vector<std::string> warnings;
};

/// Half-width of auto-seeded windows, in units of the filter radius.
inline constexpr double kSeedWidthRadii = 5.0;

/// Derivatives, step filtering, windows, per-kT estimates, T -> 0 fits and
/// F_ext / D_int coincidence for the curves returned by sweep(spec).
SweepAnalysis analyze_sweep(const SweepSpec& spec, const std::vector<DetectorCurve>& curves);

}  // namespace teleqcp
