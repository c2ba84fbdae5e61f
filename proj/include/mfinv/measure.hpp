#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfinv/cascade.hpp"
#include "mfinv/error.hpp"

namespace mfinv {

/// Log returns r(t) = ln(I(t) / I(t-1)); one element shorter than the input.
inline std::vector<double> compute_returns(std::span<const double> prices) {
  if (prices.size() < 2) throw ValidationError("prices: need at least 2 values");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      std::ostringstream os;
      os << "prices: value at index " << i << " is not strictly positive (" << prices[i] << ")";
      throw ValidationError(os.str());
    }
  }
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 1; t < prices.size(); ++t) out[t - 1] = std::log(prices[t] / prices[t - 1]);
  return out;
}

/// Drops returns whose magnitude exceeds `max_abs` (e.g. overnight gaps).
inline std::vector<double> drop_large_returns(std::span<const double> returns, double max_abs) {
  std::vector<double> out;
  out.reserve(returns.size());
  for (double r : returns) {
    if (std::abs(r) <= max_abs) out.push_back(r);
  }
  return out;
}

/// Nonnegative activity series v(t) with its total V and mean V/T.
struct VolatilitySeries {
  std::vector<double> values;
  double total = 0.0;
  double mean = 0.0;

  std::size_t size() const noexcept { return values.size(); }

  static VolatilitySeries from_values(std::vector<double> v) {
    if (v.empty()) throw ValidationError("volatility: series is empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
        std::ostringstream os;
        os << "volatility: value at index " << i << " is negative or not finite";
        throw ValidationError(os.str());
      }
      sum += v[i];
    }
    if (!(sum > 0.0)) throw ValidationError("volatility: all values are zero, measure undefined");
    VolatilitySeries out;
    out.values = std::move(v);
    out.total = sum;
    out.mean = sum / static_cast<double>(out.values.size());
    return out;
  }
};

/// v(t) = |r(t)|.
inline VolatilitySeries volatility_from_returns(std::span<const double> returns) {
  std::vector<double> v(returns.size());
  for (std::size_t i = 0; i < returns.size(); ++i) v[i] = std::abs(returns[i]);
  return VolatilitySeries::from_values(std::move(v));
}

enum class MeasureOrigin { volatility, cascade, inverse };

inline const char* to_string(MeasureOrigin o) noexcept {
  switch (o) {
    case MeasureOrigin::volatility: return "volatility";
    case MeasureOrigin::cascade: return "cascade";
    case MeasureOrigin::inverse: return "inverse";
  }
  return "unknown";
}

/// Box masses summing to one.  Boxes have equal width unless `widths` is set,
/// in which case widths[k] is the length of box k (summing to one as well).
struct ConservativeMeasure {
  std::vector<double> weights;
  std::vector<double> widths;
  std::optional<std::size_t> box_size;
  std::size_t used_length = 0;  // samples covered after truncation to a multiple of box_size
  MeasureOrigin origin = MeasureOrigin::volatility;

  std::size_t size() const noexcept { return weights.size(); }

  static ConservativeMeasure from_cascade(const GeneratedMeasure& g) {
    ConservativeMeasure m;
    m.weights = g.weights;
    m.widths = g.widths;
    m.used_length = g.weights.size();
    m.origin = MeasureOrigin::cascade;
    return m;
  }
};

/// mu_n(s) = (1/V) sum of v over box n.  The series is truncated to the
/// largest multiple of `box_size` so that every box is complete.
inline ConservativeMeasure box_measure(const VolatilitySeries& vol, std::size_t box_size) {
  if (box_size == 0) throw ValidationError("box_measure: box size must be positive");
  if (box_size > vol.size()) {
    std::ostringstream os;
    os << "box_measure: box size " << box_size << " exceeds series length " << vol.size();
    throw ValidationError(os.str());
  }
  const std::size_t boxes = vol.size() / box_size;
  ConservativeMeasure m;
  m.box_size = box_size;
  m.used_length = boxes * box_size;
  m.origin = MeasureOrigin::volatility;
  m.weights.resize(boxes);
  double total = 0.0;
  const double* v = vol.values.data();
  for (std::size_t b = 0; b < boxes; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < box_size; ++i) s += v[b * box_size + i];
    m.weights[b] = s;
    total += s;
  }
  if (!(total > 0.0)) {
    throw ValidationError("box_measure: truncated series carries no mass");
  }
  for (double& w : m.weights) w /= total;
  return m;
}

/// Discrete inverse measure.  The cumulative mass M(a) is linear inside each
/// box; inverse weight j is the length of {a : M(a) in [(j-1)/G, j/G]}, using
/// M*(b) = inf{a : M(a) > b} for b < 1 and M*(1) = 1.
inline ConservativeMeasure invert_measure(const ConservativeMeasure& measure,
                                          std::size_t grid_count) {
  const std::size_t n = measure.size();
  if (n == 0) throw ValidationError("invert_measure: empty measure");
  if (grid_count == 0) throw ValidationError("invert_measure: grid count must be positive");
  if (!measure.widths.empty() && measure.widths.size() != n) {
    throw ValidationError("invert_measure: widths and weights differ in length");
  }

  double mass_total = 0.0, width_total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(measure.weights[k] >= 0.0)) throw ValidationError("invert_measure: negative weight");
    mass_total += measure.weights[k];
    width_total += measure.widths.empty() ? 1.0 : measure.widths[k];
  }
  if (std::abs(mass_total - 1.0) > 1e-9) {
    throw ValidationError("invert_measure: weights do not sum to 1");
  }

  auto width_of = [&](std::size_t k) {
    return (measure.widths.empty() ? 1.0 : measure.widths[k]) / width_total;
  };

  // Crossing positions M*(j/G), j = 0..G, by a single merge-like sweep.
  std::vector<double> cross(grid_count + 1);
  std::size_t k = 0;
  double c_lo = 0.0;  // cumulative mass at the left edge of box k
  double x_lo = 0.0;  // position of the left edge of box k
  for (std::size_t j = 0; j < grid_count; ++j) {
    const double b = static_cast<double>(j) / static_cast<double>(grid_count);
    // first box whose right-edge cumulative mass exceeds b
    while (k < n && c_lo + measure.weights[k] / mass_total <= b) {
      c_lo += measure.weights[k] / mass_total;
      x_lo += width_of(k);
      ++k;
    }
    if (k == n) {
      cross[j] = 1.0;
    } else {
      const double mk = measure.weights[k] / mass_total;
      const double frac = std::clamp((b - c_lo) / mk, 0.0, 1.0);
      cross[j] = std::min(1.0, x_lo + frac * width_of(k));
    }
  }
  cross[grid_count] = 1.0;

  ConservativeMeasure out;
  out.origin = MeasureOrigin::inverse;
  out.used_length = grid_count;
  out.weights.resize(grid_count);
  const double support = cross[grid_count] - cross[0];
  if (!(support > 0.0)) throw ValidationError("invert_measure: measure has empty support");
  for (std::size_t j = 0; j < grid_count; ++j) out.weights[j] = (cross[j + 1] - cross[j]) / support;
  return out;
}

}  // namespace mfinv
