#pragma once

// Log-log regression of partition functions, scaling-range detection and the
// Legendre spectrum.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfinv/error.hpp"
#include "mfinv/partition.hpp"

namespace mfinv {

struct ScalingFit {
  double order = 0.0;
  double slope = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  double range_lo = 0.0;
  double range_hi = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = a + b x.  Needs at least 3 points for a
/// standard error; returns std_error 0 for n == 2.
inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw FitError("ols: need at least two paired points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw FitError("ols: abscissae are all equal");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  f.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  // a flat, noiseless column is a perfect fit
  f.r_squared = syy <= 1e-20 * static_cast<double>(n) ? 1.0 : std::max(0.0, 1.0 - ssr / syy);
  return f;
}

using ScaleRange = std::pair<double, double>;

namespace detail {

inline bool in_range(double s, const ScaleRange& r) {
  const double tol = 1e-9 * std::max(std::abs(r.first), std::abs(r.second));
  return s >= r.first - tol && s <= r.second + tol;
}

inline ScalingFit fit_row(const PartitionCurve& curve, std::size_t row, std::size_t first,
                          std::size_t last) {
  std::vector<double> x, y;
  for (std::size_t j = first; j <= last; ++j) {
    if (curve.missing(row, j)) continue;
    x.push_back(std::log(curve.scales[j]));
    y.push_back(curve.at(row, j));
  }
  if (x.size() < 5) {
    std::ostringstream os;
    os << "fit_power_law: order " << curve.orders[row] << " has " << x.size()
       << " points in range, need 5";
    throw FitError(os.str());
  }
  const LinearFit lf = ols(x, y);
  ScalingFit f;
  f.order = curve.orders[row];
  f.slope = lf.slope;
  f.std_error = lf.std_error;
  f.intercept = lf.intercept;
  f.range_lo = curve.scales[first];
  f.range_hi = curve.scales[last];
  f.r_squared = lf.r_squared;
  f.n_points = lf.n;
  return f;
}

inline std::pair<std::size_t, std::size_t> index_window(const PartitionCurve& curve,
                                                        const std::optional<ScaleRange>& range) {
  if (curve.scales.empty()) throw FitError("fit_power_law: curve has no scales");
  if (!range) return {0, curve.scales.size() - 1};
  std::size_t first = curve.scales.size(), last = 0;
  for (std::size_t j = 0; j < curve.scales.size(); ++j) {
    if (in_range(curve.scales[j], *range)) {
      first = std::min(first, j);
      last = j;
    }
  }
  if (first == curve.scales.size()) throw FitError("fit_power_law: no scales inside range");
  return {first, last};
}

}  // namespace detail

/// OLS of ln chi on ln scale for one order, over `range` (inclusive) or all scales.
inline ScalingFit fit_power_law(const PartitionCurve& curve, double order,
                                std::optional<ScaleRange> range = std::nullopt) {
  const auto row = curve.order_index(order);
  if (!row) {
    std::ostringstream os;
    os << "fit_power_law: order " << order << " is not on the curve's grid";
    throw FitError(os.str());
  }
  const auto [first, last] = detail::index_window(curve, range);
  return detail::fit_row(curve, *row, first, last);
}

struct ScalingRangeOptions {
  double min_decades = 1.5;
  double r2_floor = 0.95;
  double tie_tolerance = 1e-3;  // mean R^2 equal to three decimals counts as a tie
};

struct DetectedRange {
  double lo = 0.0;
  double hi = 0.0;
  double mean_r2 = 0.0;
};

/// Contiguous window of at least `min_decades` maximising the mean R^2 of the
/// anchor-order fits.  Ties go to the wider window, then the lower one.
/// Anchors not on the grid are replaced by the nearest grid order.
inline DetectedRange detect_scaling_range(const PartitionCurve& curve,
                                          std::span<const double> anchor_orders,
                                          const ScalingRangeOptions& opt = {}) {
  const std::size_t ns = curve.scales.size();
  if (ns < 10) {
    std::ostringstream os;
    os << "detect_scaling_range: need at least 10 scales, have " << ns;
    throw FitError(os.str());
  }
  if (anchor_orders.empty() || curve.orders.empty()) {
    throw FitError("detect_scaling_range: no anchor orders");
  }
  std::vector<std::size_t> rows;
  for (double a : anchor_orders) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.orders.size(); ++i) {
      if (std::abs(curve.orders[i] - a) < std::abs(curve.orders[best] - a)) best = i;
    }
    if (std::find(rows.begin(), rows.end(), best) == rows.end()) rows.push_back(best);
  }

  struct Window {
    std::size_t first, last;
    double r2;
  };
  std::vector<Window> windows;
  double top = -1.0;
  for (std::size_t first = 0; first < ns; ++first) {
    for (std::size_t last = first + 4; last < ns; ++last) {
      if (std::log10(curve.scales[last] / curve.scales[first]) < opt.min_decades - 1e-12) continue;
      double sum = 0.0;
      std::size_t used = 0;
      for (std::size_t row : rows) {
        try {
          sum += detail::fit_row(curve, row, first, last).r_squared;
          ++used;
        } catch (const FitError&) {
        }
      }
      if (used == 0) continue;
      windows.push_back({first, last, sum / static_cast<double>(used)});
      top = std::max(top, windows.back().r2);
    }
  }
  if (windows.empty() || top < opt.r2_floor) {
    std::ostringstream os;
    os << "detect_scaling_range: no window of >= " << opt.min_decades
       << " decades reaches R^2 >= " << opt.r2_floor << "; give the range manually";
    throw FitError(os.str());
  }
  const Window* best = nullptr;
  for (const Window& w : windows) {
    if (w.r2 < top - opt.tie_tolerance) continue;
    if (!best || w.last - w.first > best->last - best->first ||
        (w.last - w.first == best->last - best->first && w.first < best->first)) {
      best = &w;
    }
  }
  DetectedRange out;
  out.mean_r2 = best->r2;
  const std::size_t best_first = best->first, best_last = best->last;
  out.lo = curve.scales[best_first];
  out.hi = curve.scales[best_last];
  return out;
}

enum class ExponentKind { direct, inverse };

inline const char* to_string(ExponentKind k) noexcept {
  return k == ExponentKind::direct ? "direct" : "inverse";
}

/// tau(q) or theta(p) with OLS standard errors over a common range.
struct ExponentCurve {
  ExponentKind kind = ExponentKind::direct;
  std::vector<double> orders;
  std::vector<double> exponents;
  std::vector<double> stderrs;
  ScaleRange range_used{0.0, 0.0};
  std::vector<std::string> warnings;

  std::size_t size() const noexcept { return orders.size(); }
};

inline ExponentCurve exponent_curve(const PartitionCurve& curve, const ScaleRange& range) {
  ExponentCurve out;
  out.kind = curve.kind == PartitionKind::direct ? ExponentKind::direct : ExponentKind::inverse;
  out.range_used = range;
  const auto [first, last] = detail::index_window(curve, range);
  for (std::size_t i = 0; i < curve.orders.size(); ++i) {
    try {
      const ScalingFit f = detail::fit_row(curve, i, first, last);
      out.orders.push_back(f.order);
      out.exponents.push_back(f.slope);
      out.stderrs.push_back(f.std_error);
    } catch (const FitError& e) {
      out.warnings.push_back(std::string("exponent_curve: dropped: ") + e.what());
    }
  }
  return out;
}

struct RangeConsistency {
  double lower_ratio = 0.0;  // dv1 / (s1 * v_mean)
  double upper_ratio = 0.0;  // dv2 / (s2 * v_mean)
  bool lower_ok = false;
  bool upper_ok = false;
  bool consistent = false;
};

/// Checks dv ~ s * v_mean at both ends of the two scaling ranges, to within a
/// factor of 3.
inline RangeConsistency check_range_consistency(const ScaleRange& direct_range,
                                                const ScaleRange& inverse_range, double v_mean) {
  if (!(v_mean > 0.0)) throw ValidationError("check_range_consistency: v_mean must be positive");
  if (!(direct_range.first > 0.0) || !(direct_range.second > 0.0)) {
    throw ValidationError("check_range_consistency: direct range must be positive");
  }
  RangeConsistency r;
  r.lower_ratio = inverse_range.first / (direct_range.first * v_mean);
  r.upper_ratio = inverse_range.second / (direct_range.second * v_mean);
  auto ok = [](double x) { return x >= 1.0 / 3.0 && x <= 3.0; };
  r.lower_ok = ok(r.lower_ratio);
  r.upper_ok = ok(r.upper_ratio);
  r.consistent = r.lower_ok && r.upper_ok;
  return r;
}

struct SpectrumPoint {
  double order = 0.0;
  double alpha = 0.0;
  double f = 0.0;
};

/// alpha = d tau / d q by central differences (one-sided at the ends),
/// f = q alpha - tau.
inline std::vector<SpectrumPoint> legendre_spectrum(const ExponentCurve& curve) {
  const std::size_t n = curve.size();
  if (n < 2) throw ValidationError("legendre_spectrum: need at least two orders");
  std::vector<SpectrumPoint> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : i - 1;
    const std::size_t b = i + 1 == n ? n - 1 : i + 1;
    const double alpha =
        (curve.exponents[b] - curve.exponents[a]) / (curve.orders[b] - curve.orders[a]);
    out[i] = {curve.orders[i], alpha, curve.orders[i] * alpha - curve.exponents[i]};
  }
  return out;
}

}  // namespace mfinv
