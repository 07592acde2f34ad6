#include "teleqcp/scan.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "teleqcp/thermal.hpp"

namespace teleqcp {

std::string detector_name(Detector d) {
  return d == Detector::ExternalFidelity ? "F_ext" : "D_int";
}

std::string parameter_name(TuningParameter p) {
  switch (p) {
    case TuningParameter::Delta: return "delta";
    case TuningParameter::Lambda: return "lambda";
    case TuningParameter::Gamma: return "gamma";
  }
  return "?";
}

ModelSpec with_parameter(ModelSpec base, TuningParameter p, double value) {
  switch (p) {
    case TuningParameter::Delta:
      if (base.family != ModelFamily::XXZ) throw std::invalid_argument("delta tunes only the XXZ model");
      base.delta = value;
      break;
    case TuningParameter::Lambda:
      if (base.family != ModelFamily::XYTransverse)
        throw std::invalid_argument("lambda tunes only the XY model");
      base.lambda = value;
      break;
    case TuningParameter::Gamma:
      if (base.family != ModelFamily::XYTransverse)
        throw std::invalid_argument("gamma tunes only the XY model");
      base.gamma = value;
      break;
  }
  return base;
}

namespace {

// Grid points are start + i * step; the stop value may be off by rounding.
constexpr double kGridSlack = 1e-9;

Index grid_points(double start, double stop, double step) {
  return static_cast<Index>(std::floor((stop - start) / step + kGridSlack)) + 1;
}

std::string format_value(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void SweepSpec::validate() const {
  auto fail = [&](const std::string& field, const std::string& what) {
    throw std::invalid_argument("sweep '" + name + "': " + field + " " + what);
  };
  try {
    base.validate();
    (void)with_parameter(base, parameter, start);
  } catch (const std::invalid_argument& e) {
    fail("model", e.what());
  }
  if (!std::isfinite(start) || !std::isfinite(stop) || !(start < stop)) fail("range", "needs start < stop");
  if (!(step > 0.0) || !std::isfinite(step)) fail("step", "must be positive");
  if (grid_points(start, stop, step) < 4) fail("range", "holds fewer than 4 grid points");
  if (temperatures.empty()) fail("temperatures", "must not be empty");
  for (double t : temperatures)
    if (!(t > 0.0) || !std::isfinite(t)) fail("temperatures", "must be positive and finite");
  if (detectors.empty()) fail("detectors", "must not be empty");
  for (const auto& w : windows) {
    if (!(w.lo < w.hi)) fail("windows", "need lo < hi");
    if (w.lo < start - kGridSlack || w.hi > stop + kGridSlack) fail("windows", "must lie inside the range");
    if (w.order < 0 || w.order > 2) fail("windows", "order must be 0, 1 or 2");
  }
  if (auto_windows < 1) fail("auto_windows", "must be at least 1");
  if (!(filter.radius > 0.0)) fail("filter.radius", "must be positive");
  if (!(filter.high_kT > 0.0)) fail("filter.high_kT", "must be positive");
  if (!(filter.min_relative >= 0.0 && filter.min_relative < 1.0))
    fail("filter.min_relative", "must lie in [0, 1)");
}

Eigen::VectorXd SweepSpec::grid() const {
  const Index n = grid_points(start, stop, step);
  Eigen::VectorXd g(n);
  for (Index i = 0; i < n; ++i) g(i) = start + static_cast<double>(i) * step;
  return g;
}

namespace {

struct PointValues {
  // [temperature][detector]
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::string>> branches;
  std::vector<CorrelatorSet> correlators;  // [temperature]
};

std::string cubic_sign(const CorrelatorSet& c) {
  const double s = c.z * c.z * c.z - c.z * c.zz;
  if (std::abs(s) <= 1e-12) return "0";
  return s > 0.0 ? "+" : "-";
}

PointValues evaluate_point(const SweepSpec& spec, double x, Evaluation mode) {
  const auto spectrum = std::make_shared<const Spectrum>(with_parameter(spec.base, spec.parameter, x));
  PointValues out;
  out.values.resize(spec.temperatures.size());
  out.branches.resize(spec.temperatures.size());
  for (std::size_t t = 0; t < spec.temperatures.size(); ++t) {
    const ThermalState ts(spectrum, spec.temperatures[t]);
    const CorrelatorSet c = correlators(ts);
    out.correlators.push_back(c);
    const double d_closed = internal_closed_form(c);
    const ExternalClosedForm f_closed = external_closed_form(c);

    std::optional<DetectorValue> d_proto;
    std::optional<ExternalDetectorValue> f_proto;
    if (mode == Evaluation::Protocol) {
      const Eigen::Matrix4cd rho12 = ts.bond_state(1);
      const DensityMatrix rho23(ts.bond_state(2));
      const DensityMatrix rho1(partial_trace(rho12, std::vector<int>{1}, 2));
      d_proto = internal_detector(rho1, rho23);
      f_proto = external_detector(rho23);
      if (std::abs(d_proto->value - d_closed) > kProtocolAgreement ||
          std::abs(f_proto->value - f_closed.value) > kProtocolAgreement) {
        throw NumericalConsistencyError(
            "protocol and closed form disagree at kT=" + format_value(spec.temperatures[t]) +
            ": D_int " + format_value(d_proto->value) + " vs " + format_value(d_closed) + ", F_ext " +
            format_value(f_proto->value) + " vs " + format_value(f_closed.value));
      }
    }
    for (Detector d : spec.detectors) {
      if (d == Detector::ExternalFidelity) {
        out.values[t].push_back(f_closed.value);
        out.branches[t].push_back(f_proto ? bell_name(f_proto->resource) : branch_name(f_closed.branch));
      } else {
        out.values[t].push_back(d_closed);
        out.branches[t].push_back(d_proto ? bell_name(d_proto->resource) : cubic_sign(c));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<DetectorCurve> sweep(const SweepSpec& spec, Evaluation mode, int workers) {
  spec.validate();
  if (workers < 1) throw std::invalid_argument("sweep: worker count must be at least 1");
  const Eigen::VectorXd grid = spec.grid();
  const Index n = grid.size();

  std::vector<PointValues> points(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < n; i = next++) {
      try {
        points[i] = evaluate_point(spec, grid(i), mode);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = static_cast<int>(std::min<Index>(workers, n));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work);
  }

  // Report the failure at the smallest parameter value, independent of scheduling.
  for (Index i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    const std::string where = " [sweep '" + spec.name + "', " + parameter_name(spec.parameter) + "=" +
                              format_value(grid(i)) + "]";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const NumericalConsistencyError& e) {
      throw NumericalConsistencyError(e.what() + where);
    } catch (const std::exception& e) {
      throw std::runtime_error(e.what() + where);
    }
  }

  std::vector<DetectorCurve> curves;
  for (std::size_t t = 0; t < spec.temperatures.size(); ++t) {
    for (std::size_t d = 0; d < spec.detectors.size(); ++d) {
      DetectorCurve c;
      c.model = spec.base;
      c.parameter = spec.parameter;
      c.detector = spec.detectors[d];
      c.kT = spec.temperatures[t];
      c.grid = grid;
      c.values.resize(n);
      c.branches.resize(static_cast<std::size_t>(n));
      c.correlators.resize(n, 4);
      for (Index i = 0; i < n; ++i) {
        c.values(i) = points[i].values[t][d];
        c.branches[i] = points[i].branches[t][d];
        const auto& k = points[i].correlators[t];
        c.correlators.row(i) << k.z, k.xx, k.yy, k.zz;
      }
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

DetectorCurve finite_difference(const DetectorCurve& curve, int order) {
  if (order != 1 && order != 2) throw std::invalid_argument("finite_difference: order must be 1 or 2");
  const Index n = curve.size();
  if (n < order + 2)
    throw std::invalid_argument("finite_difference: need at least " + std::to_string(order + 2) +
                                " points, got " + std::to_string(n));
  if (curve.values.size() != n) throw std::invalid_argument("finite_difference: grid/value size mismatch");
  const double h = curve.step();
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference: grid must be increasing");
  for (Index i = 1; i < n; ++i)
    if (std::abs(curve.grid(i) - curve.grid(i - 1) - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("finite_difference: grid is not uniform");

  const auto& f = curve.values;
  DetectorCurve out = curve;
  out.derivative_order = curve.derivative_order + order;
  Eigen::VectorXd& d = out.values;
  if (order == 1) {
    for (Index i = 1; i + 1 < n; ++i) d(i) = (f(i + 1) - f(i - 1)) / (2.0 * h);
    d(0) = (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h);
    d(n - 1) = (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h);
  } else {
    const double h2 = h * h;
    for (Index i = 1; i + 1 < n; ++i) d(i) = (f(i + 1) - 2.0 * f(i) + f(i - 1)) / h2;
    d(0) = (2.0 * f(0) - 5.0 * f(1) + 4.0 * f(2) - f(3)) / h2;
    d(n - 1) = (2.0 * f(n - 1) - 5.0 * f(n - 2) + 4.0 * f(n - 3) - f(n - 4)) / h2;
  }
  return out;
}

namespace {

bool masked(const Mask& mask, Index i) {
  return !mask.empty() && mask[static_cast<std::size_t>(i)];
}

void check_mask(const DetectorCurve& c, const Mask& mask, const char* what) {
  if (!mask.empty() && static_cast<Index>(mask.size()) != c.size())
    throw std::invalid_argument(std::string(what) + ": mask size does not match the grid");
}

}  // namespace

QcpEstimate locate_extremum(const DetectorCurve& dcurve, const Window& window, const Mask& mask,
                            ExtremumKind kind) {
  check_mask(dcurve, mask, "locate_extremum");
  if (!(window.lo <= window.hi)) throw std::invalid_argument("locate_extremum: window has lo > hi");
  const double h = dcurve.step();
  const double slack = 1e-9 * std::max(1.0, std::abs(h));
  Index best = -1;
  double best_score = 0.0;
  for (Index i = 0; i < dcurve.size(); ++i) {
    const double x = dcurve.grid(i);
    if (x < window.lo - slack || x > window.hi + slack || masked(mask, i)) continue;
    const double v = dcurve.values(i);
    const double score = kind == ExtremumKind::Magnitude ? std::abs(v)
                         : kind == ExtremumKind::Maximum ? v
                                                         : -v;
    if (best < 0 || score > best_score) {
      best = i;
      best_score = score;
    }
  }
  if (best < 0)
    throw std::invalid_argument("locate_extremum: no unmasked grid point in [" + format_value(window.lo) +
                                ", " + format_value(window.hi) + "]");
  QcpEstimate e;
  e.value = dcurve.grid(best);
  e.error = std::max(1, dcurve.derivative_order) * h;
  e.kT = dcurve.kT;
  e.length = dcurve.length();
  e.detector = dcurve.detector;
  e.order = dcurve.derivative_order;
  e.window = window;
  e.window.order = dcurve.derivative_order;
  e.grid_index = best;
  return e;
}

std::vector<Index> derivative_peaks(const DetectorCurve& dcurve, const Mask& mask, double min_relative) {
  check_mask(dcurve, mask, "derivative_peaks");
  const Eigen::VectorXd a = dcurve.values.cwiseAbs();
  const Index n = a.size();
  std::vector<Index> peaks;
  if (n < 3) return peaks;
  const double floor = min_relative * a.maxCoeff();
  for (Index i = 1; i + 1 < n; ++i) {
    if (masked(mask, i) || a(i) <= floor) continue;
    // Plateaus count once, at their left edge.
    if (a(i) > a(i - 1) || (a(i) == a(i - 1) && i == 1)) {
      Index j = i;
      while (j + 1 < n && a(j + 1) == a(i)) ++j;
      if (j + 1 < n && a(j + 1) < a(i)) peaks.push_back(i);
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [&](Index p, Index q) { return a(p) > a(q); });
  return peaks;
}

namespace {

/// Grid span of the hump around peak p: out to the nearest local minima of |d|.
std::pair<Index, Index> hump(const Eigen::VectorXd& a, Index p) {
  Index lo = p, hi = p;
  while (lo > 0 && a(lo - 1) < a(lo)) --lo;
  while (hi + 1 < a.size() && a(hi + 1) < a(hi)) ++hi;
  return {lo, hi};
}

}  // namespace

StepFilterResult filter_finite_size_steps(const std::vector<DetectorCurve>& dcurves,
                                          const StepFilterOptions& options) {
  StepFilterResult result;
  result.masks.assign(dcurves.size(), Mask{});
  result.masked_regions.assign(dcurves.size(), 0);
  if (dcurves.empty()) return result;
  for (const auto& c : dcurves) {
    if (c.detector != dcurves[0].detector || c.derivative_order != dcurves[0].derivative_order ||
        c.grid.size() != dcurves[0].grid.size() || !c.grid.isApprox(dcurves[0].grid))
      throw std::invalid_argument("filter_finite_size_steps: curves differ in detector, order or grid");
  }

  std::vector<std::size_t> by_kT(dcurves.size());
  std::iota(by_kT.begin(), by_kT.end(), std::size_t{0});
  std::stable_sort(by_kT.begin(), by_kT.end(),
                   [&](std::size_t p, std::size_t q) { return dcurves[p].kT > dcurves[q].kT; });
  const auto& reference = dcurves[by_kT.front()];
  if (dcurves.size() < 2 || reference.kT < options.high_kT) {
    result.insufficient_temperatures = true;
    return result;
  }

  const Eigen::VectorXd& grid = reference.grid;
  std::vector<Index> survivors = derivative_peaks(reference);

  for (std::size_t r = 1; r < by_kT.size(); ++r) {
    const std::size_t k = by_kT[r];
    const auto& c = dcurves[k];
    const Eigen::VectorXd a = c.values.cwiseAbs();
    const std::vector<Index> peaks = derivative_peaks(c);
    const double floor = options.min_relative * a.maxCoeff();
    const double reach = options.radius + options.drift * std::abs(dcurves[by_kT[r - 1]].kT - c.kT) + 1e-9;
    std::vector<bool> keep(peaks.size(), false);
    for (std::size_t q = 0; q < peaks.size(); ++q)
      keep[q] = std::any_of(survivors.begin(), survivors.end(),
                            [&](Index s) { return std::abs(grid(s) - grid(peaks[q])) <= reach; });
    Mask mask(static_cast<std::size_t>(c.size()), false);
    std::vector<Index> kept;
    for (std::size_t q = 0; q < peaks.size(); ++q) {
      if (keep[q] || a(peaks[q]) < floor) {
        kept.push_back(peaks[q]);
        continue;
      }
      const auto [lo, hi] = hump(a, peaks[q]);
      for (Index i = lo; i <= hi; ++i) mask[static_cast<std::size_t>(i)] = true;
      ++result.masked_regions[k];
    }
    // Surviving peaks are never masked, even where a neighbouring spike's span reaches them.
    for (Index p : kept) mask[static_cast<std::size_t>(p)] = false;
    result.masks[k] = std::move(mask);
    survivors = std::move(kept);
  }
  return result;
}

std::vector<Window> seed_windows(const DetectorCurve& dcurve, const Mask& mask, int count,
                                 double half_width, int order) {
  std::vector<Window> out;
  for (Index p : derivative_peaks(dcurve, mask)) {
    if (static_cast<int>(out.size()) >= count) break;
    const double x = dcurve.grid(p);
    // Skip peaks that fall inside a window already seeded.
    if (std::any_of(out.begin(), out.end(), [&](const Window& w) { return x >= w.lo && x <= w.hi; }))
      continue;
    const double lo = std::max(dcurve.grid(0), x - half_width);
    const double hi = std::min(dcurve.grid(dcurve.size() - 1), x + half_width);
    out.push_back({lo, hi, order});
  }
  std::sort(out.begin(), out.end(), [](const Window& a, const Window& b) { return a.lo < b.lo; });
  return out;
}

ZeroTExtrapolation extrapolate_to_zero_T(const std::vector<QcpEstimate>& estimates) {
  const Index n = static_cast<Index>(estimates.size());
  if (n < 3) throw std::invalid_argument("extrapolate_to_zero_T: need at least 3 estimates");
  Eigen::VectorXd t(n), y(n);
  for (Index i = 0; i < n; ++i) {
    t(i) = estimates[i].kT;
    y(i) = estimates[i].value;
  }
  std::vector<double> sorted(t.data(), t.data() + n);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("extrapolate_to_zero_T: temperatures must be distinct");

  const double tbar = t.mean(), ybar = y.mean();
  const double sxx = (t.array() - tbar).square().sum();
  const double sxy = ((t.array() - tbar) * (y.array() - ybar)).sum();
  ZeroTExtrapolation fit;
  fit.estimates = estimates;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * tbar;
  fit.residuals = y.array() - (fit.intercept + fit.slope * t.array());
  const double s2 = fit.residuals.squaredNorm() / static_cast<double>(n - 2);
  fit.intercept_stderr = std::sqrt(s2 * (1.0 / static_cast<double>(n) + tbar * tbar / sxx));
  const auto& w = estimates.front().window;
  fit.intercept_in_window = fit.intercept >= w.lo && fit.intercept <= w.hi;
  return fit;
}

bool near_branch_change(const DetectorCurve& curve, Index index) {
  const auto& b = curve.branches;
  const Index n = static_cast<Index>(b.size());
  if (index < 0 || index >= n) return false;
  for (Index i = std::max<Index>(index, 1); i <= std::min(index + 1, n - 1); ++i)
    if (b[i] != b[i - 1]) return true;
  return false;
}

CoincidenceVerdict cross_detector_coincidence(const QcpEstimate& a, const QcpEstimate& b,
                                              const DetectorCurve* branches_a,
                                              const DetectorCurve* branches_b) {
  CoincidenceVerdict v;
  v.consistent = std::abs(a.value - b.value) <= a.error + b.error + 1e-9;
  v.label = v.consistent ? "QCP-consistent" : "suspect-optimization-cusp";
  if (branches_a) v.a_on_branch_change = near_branch_change(*branches_a, a.grid_index);
  if (branches_b) v.b_on_branch_change = near_branch_change(*branches_b, b.grid_index);
  return v;
}

namespace {

bool has_peak_in(const DetectorCurve& d, const Mask& mask, const Window& w) {
  for (Index p : derivative_peaks(d, mask))
    if (d.grid(p) >= w.lo - 1e-9 && d.grid(p) <= w.hi + 1e-9) return true;
  return false;
}

}  // namespace

SweepAnalysis analyze_sweep(const SweepSpec& spec, const std::vector<DetectorCurve>& curves) {
  const std::size_t nt = spec.temperatures.size();
  if (curves.size() != nt * spec.detectors.size())
    throw std::invalid_argument("analyze_sweep: curve count does not match the spec");
  SweepAnalysis out;
  // Index of the coldest temperature; windows and derivative orders are fixed there.
  const std::size_t coldest = static_cast<std::size_t>(
      std::min_element(spec.temperatures.begin(), spec.temperatures.end()) - spec.temperatures.begin());

  for (std::size_t d = 0; d < spec.detectors.size(); ++d) {
    DetectorAnalysis a;
    a.detector = spec.detectors[d];
    for (std::size_t t = 0; t < nt; ++t) {
      a.curves.push_back(curves[t * spec.detectors.size() + d]);
      a.first.push_back(finite_difference(a.curves.back(), 1));
      a.second.push_back(finite_difference(a.curves.back(), 2));
    }
    a.filter1 = filter_finite_size_steps(a.first, spec.filter);
    a.filter2 = filter_finite_size_steps(a.second, spec.filter);
    if (a.filter1.insufficient_temperatures)
      out.warnings.push_back(detector_name(a.detector) +
                             ": no temperature at or above filter.high_kT; step filter skipped");

    const auto mask1 = [&](std::size_t t) -> const Mask& { return a.filter1.masks[t]; };
    const auto mask2 = [&](std::size_t t) -> const Mask& { return a.filter2.masks[t]; };
    if (spec.windows.empty()) {
      a.windows = seed_windows(a.first[coldest], mask1(coldest), spec.auto_windows,
                               kSeedWidthRadii * spec.filter.radius, 1);
    } else {
      a.windows = spec.windows;
    }
    // First order unless only the second derivative has a surviving peak.
    for (auto& w : a.windows) {
      if (w.order == 1 && !has_peak_in(a.first[coldest], mask1(coldest), w) &&
          has_peak_in(a.second[coldest], mask2(coldest), w))
        w.order = 2;
    }

    for (const auto& w : a.windows) {
      std::vector<std::optional<QcpEstimate>> row;
      std::vector<QcpEstimate> usable;
      for (std::size_t t = 0; t < nt; ++t) {
        static const Mask none;
        const auto& dc = w.order == 0 ? a.curves[t] : w.order == 1 ? a.first[t] : a.second[t];
        const auto& m = w.order == 0 ? none : w.order == 1 ? mask1(t) : mask2(t);
        // Order 0: the detector's own extremum, a minimum of F_ext or a maximum of D_int.
        const ExtremumKind kind = w.order != 0                        ? ExtremumKind::Magnitude
                                  : a.detector == Detector::ExternalFidelity ? ExtremumKind::Minimum
                                                                            : ExtremumKind::Maximum;
        try {
          QcpEstimate e = locate_extremum(dc, w, m, kind);
          e.window = w;
          row.push_back(e);
          usable.push_back(e);
        } catch (const std::invalid_argument&) {
          row.push_back(std::nullopt);
          out.warnings.push_back(detector_name(a.detector) + ": window [" + format_value(w.lo) + ", " +
                                 format_value(w.hi) + "] fully masked at kT=" +
                                 format_value(spec.temperatures[t]));
        }
      }
      a.estimates.push_back(std::move(row));
      std::vector<double> kts;
      for (const auto& e : usable) kts.push_back(e.kT);
      std::sort(kts.begin(), kts.end());
      const bool distinct = std::adjacent_find(kts.begin(), kts.end()) == kts.end();
      if (usable.size() >= 3 && distinct)
        a.extrapolations.push_back(extrapolate_to_zero_T(usable));
      else
        a.extrapolations.push_back(std::nullopt);
    }
    out.detectors.push_back(std::move(a));
  }

  // Pair F_ext and D_int estimates whose windows overlap, closest centres first.
  const auto find = [&](Detector det) -> const DetectorAnalysis* {
    for (const auto& a : out.detectors)
      if (a.detector == det) return &a;
    return nullptr;
  };
  const DetectorAnalysis* f = find(Detector::ExternalFidelity);
  const DetectorAnalysis* dd = find(Detector::InternalTraceDistance);
  if (f && dd) {
    for (std::size_t wf = 0; wf < f->windows.size(); ++wf) {
      const Window& a = f->windows[wf];
      std::optional<std::size_t> match;
      double best = 0.0;
      for (std::size_t wd = 0; wd < dd->windows.size(); ++wd) {
        const Window& b = dd->windows[wd];
        if (b.hi < a.lo || b.lo > a.hi) continue;
        const double gap = std::abs((a.lo + a.hi) - (b.lo + b.hi));
        if (!match || gap < best) {
          match = wd;
          best = gap;
        }
      }
      if (!match) continue;
      for (std::size_t t = 0; t < nt; ++t) {
        const auto& ef = f->estimates[wf][t];
        const auto& ed = dd->estimates[*match][t];
        if (!ef || !ed) continue;
        CoincidenceRecord r;
        r.kT = spec.temperatures[t];
        r.fidelity = *ef;
        r.trace_distance = *ed;
        r.verdict = cross_detector_coincidence(*ef, *ed, &f->curves[t], &dd->curves[t]);
        out.coincidences.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace teleqcp
