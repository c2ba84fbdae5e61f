#pragma once

// Numerical inversion of exponent curves and the two-sided check
//   tau(q) = -theta^{-1}(-q),   theta(p) = -tau^{-1}(-p).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfinv/error.hpp"
#include "mfinv/isotonic.hpp"
#include "mfinv/scaling.hpp"

namespace mfinv {

struct InvertedPoint {
  double target = 0.0;
  std::optional<double> value;  // order x with curve(x) = target
  double std_error = 0.0;
};

namespace detail {

// Second derivative estimate at interior node k of a non-uniform grid.
inline double second_derivative(std::span<const double> x, std::span<const double> f,
                                std::size_t k) {
  const double h1 = x[k] - x[k - 1], h2 = x[k + 1] - x[k];
  return 2.0 * ((f[k + 1] - f[k]) / h2 - (f[k] - f[k - 1]) / h1) / (h1 + h2);
}

inline constexpr double kInterpolationFloor = 1e-9;

}  // namespace detail

/// Inverts a (repaired) nondecreasing exponent curve by piecewise-linear
/// interpolation.  Targets outside the attained range come back without a value.
///
/// The standard error of an inverted value is the source standard error over
/// the local slope, floored at the local linear-interpolation error bound.
inline std::vector<InvertedPoint> invert_exponent_curve(const ExponentCurve& curve,
                                                        std::span<const double> targets) {
  const std::size_t n = curve.size();
  if (n < 2) throw InversionError("invert_exponent_curve: need at least two points");
  std::span<const double> x(curve.orders);
  const std::vector<double> f = isotonic_increasing<double>(curve.exponents);
  if (!(f.back() > f.front())) {
    throw InversionError("invert_exponent_curve: curve is flat after monotone repair");
  }

  // Interpolation error bound (in y) per segment: h^2 |f''| / 8 from the
  // neighbouring curvature estimates.
  std::vector<double> seg_err(n - 1, 0.0);
  if (n >= 3) {
    std::vector<double> curv(n, 0.0);
    for (std::size_t k = 1; k + 1 < n; ++k) curv[k] = std::abs(detail::second_derivative(x, f, k));
    curv[0] = curv[1];
    curv[n - 1] = curv[n - 2];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = x[i + 1] - x[i];
      seg_err[i] = h * h * std::max(curv[i], curv[i + 1]) / 8.0;
    }
  }

  std::vector<InvertedPoint> out;
  out.reserve(targets.size());
  for (double y : targets) {
    InvertedPoint pt;
    pt.target = y;
    if (!(y >= f.front() && y <= f.back())) {
      out.push_back(pt);
      continue;
    }
    std::size_t i = 0;
    while (i + 1 < n && !(f[i] <= y && y <= f[i + 1] && f[i + 1] > f[i])) ++i;
    const double slope = (f[i + 1] - f[i]) / (x[i + 1] - x[i]);
    const double t = (y - f[i]) / (f[i + 1] - f[i]);
    pt.value = x[i] + t * (x[i + 1] - x[i]);
    const double se_src = curve.stderrs[i] + t * (curve.stderrs[i + 1] - curve.stderrs[i]);
    pt.std_error = std::max({se_src / slope, seg_err[i] / slope, detail::kInterpolationFloor});
    out.push_back(pt);
  }
  return out;
}

/// One side of the check: measured curve (lhs) against the counterpart
/// predicted from the other curve (rhs), on the measured curve's grid.
struct InversionSide {
  std::vector<double> grid;
  std::vector<double> lhs;
  std::vector<double> lhs_stderr;
  std::vector<double> rhs;  // NaN where the inversion was not computable
  std::vector<double> rhs_stderr;
  double max_abs_diff = 0.0;
  bool within_error_bars = false;
  double coverage = 0.0;

  bool computed(std::size_t i) const { return !std::isnan(rhs[i]); }
  double diff(std::size_t i) const { return lhs[i] - rhs[i]; }
};

struct InversionReport {
  InversionSide tau_side;    // tau(q) vs -theta^{-1}(-q)
  InversionSide theta_side;  // theta(p) vs -tau^{-1}(-p)
  double max_abs_diff = 0.0;
  bool within_error_bars = false;
  double coverage = 0.0;
  bool reliable = false;
};

namespace detail {

// lhs = measured(x), rhs = -counterpart^{-1}(-x), agreement when
// |lhs - rhs| <= sigmas * sqrt(se_lhs^2 + se_rhs^2) at every computed point.
inline InversionSide compare_side(const ExponentCurve& measured, const ExponentCurve& counterpart,
                                  double sigmas) {
  InversionSide s;
  s.grid = measured.orders;
  s.lhs = measured.exponents;
  s.lhs_stderr = measured.stderrs;
  std::vector<double> targets(measured.size());
  for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = -measured.orders[i];
  const auto inv = invert_exponent_curve(counterpart, targets);
  s.rhs.assign(targets.size(), std::numeric_limits<double>::quiet_NaN());
  s.rhs_stderr.assign(targets.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t computed = 0;
  bool ok = true;
  for (std::size_t i = 0; i < inv.size(); ++i) {
    if (!inv[i].value) continue;
    ++computed;
    s.rhs[i] = -*inv[i].value;
    s.rhs_stderr[i] = inv[i].std_error;
    const double d = std::abs(s.lhs[i] - s.rhs[i]);
    s.max_abs_diff = std::max(s.max_abs_diff, d);
    const double bar = sigmas * std::hypot(s.lhs_stderr[i], s.rhs_stderr[i]);
    if (!(d <= bar)) ok = false;
  }
  s.coverage = s.grid.empty() ? 0.0 : static_cast<double>(computed) / s.grid.size();
  s.within_error_bars = computed > 0 && ok;
  return s;
}

}  // namespace detail

struct InversionOptions {
  double sigmas = 2.0;          // agreement band in combined standard errors
  double min_coverage = 0.3;    // below this the report is flagged unreliable
};

inline InversionReport inversion_check(const ExponentCurve& direct, const ExponentCurve& inverse,
                                       const InversionOptions& opt = {}) {
  if (direct.size() < 2 || inverse.size() < 2) {
    throw InversionError("inversion_check: both curves need at least two orders");
  }
  InversionReport r;
  r.tau_side = detail::compare_side(direct, inverse, opt.sigmas);
  r.theta_side = detail::compare_side(inverse, direct, opt.sigmas);
  if (r.tau_side.coverage == 0.0 && r.theta_side.coverage == 0.0) {
    throw InversionError("inversion_check: the curves' value ranges do not overlap");
  }
  r.max_abs_diff = std::max(r.tau_side.max_abs_diff, r.theta_side.max_abs_diff);
  r.within_error_bars = r.tau_side.within_error_bars && r.theta_side.within_error_bars;
  r.coverage = std::min(r.tau_side.coverage, r.theta_side.coverage);
  r.reliable = r.coverage >= opt.min_coverage;
  return r;
}

}  // namespace mfinv
