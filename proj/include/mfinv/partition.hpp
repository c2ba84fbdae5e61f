#pragma once

// Direct partition functions chi_q(s) = sum_n mu_n(s)^q over box sizes, and
// inverse partition functions chi*_p(dv) = sum_j (s_j / T)^p over the exit
// times s_j at which the cumulative activity first reaches j * dv.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mfinv/error.hpp"
#include "mfinv/measure.hpp"

namespace mfinv {

namespace detail {

// ln sum exp(q * log_w[n]) with the largest term factored out.  For q > 0 the
// reference is the largest weight, for q < 0 the smallest, so every scaled
// term lies in (0, 1].  Entries of -inf stand for zero weights.
inline double log_moment_from_logs(std::span<const double> log_w, double q) {
  if (q == 0.0) return std::log(static_cast<double>(log_w.size()));
  double ref = q > 0.0 ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity();
  for (double lw : log_w) ref = q > 0.0 ? std::max(ref, lw) : std::min(ref, lw);
  double sum = 0.0;
  for (double lw : log_w) sum += std::exp(q * (lw - ref));
  return std::log(sum) + q * ref;
}

inline std::vector<double> logs_of(std::span<const double> weights) {
  std::vector<double> out(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) out[i] = std::log(weights[i]);
  return out;
}

// Index of the first non-positive weight, if any.
inline std::optional<std::size_t> first_nonpositive(std::span<const double> weights) {
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0)) return i;
  }
  return std::nullopt;
}

}  // namespace detail

/// ln sum_n w_n^q, stable for tiny weights and large |q|.
///
/// Zero weights are allowed for q >= 0 (0^0 counts as 1).  A zero weight with
/// q < 0 raises DomainError naming the box.
template <class Weights>
double log_moment_sum(const Weights& weights, double q) {
  std::span<const double> w(std::data(weights), std::size(weights));
  if (w.empty()) throw ValidationError("log_moment_sum: no weights");
  if (!std::isfinite(q)) throw ValidationError("log_moment_sum: order must be finite");
  bool any_positive = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 0.0 || std::isnan(w[i])) {
      std::ostringstream os;
      os << "log_moment_sum: weight " << i << " is negative";
      throw ValidationError(os.str());
    }
    if (w[i] > 0.0) {
      any_positive = true;
    } else if (q < 0.0) {
      std::ostringstream os;
      os << "log_moment_sum: box " << i << " has zero mass, negative order " << q << " undefined";
      throw DomainError(os.str());
    }
  }
  if (!any_positive && q > 0.0) throw DomainError("log_moment_sum: all weights are zero");
  return detail::log_moment_from_logs(detail::logs_of(w), q);
}

enum class PartitionKind { direct, inverse };

/// ln chi over an (order, scale) grid.  Missing cells hold NaN; nothing is
/// ever imputed.
struct PartitionCurve {
  PartitionKind kind = PartitionKind::direct;
  std::vector<double> orders;
  std::vector<double> scales;      // box sizes (direct) or thresholds (inverse)
  std::vector<double> log_values;  // row-major, orders.size() x scales.size()
  std::vector<std::string> warnings;

  double at(std::size_t order_idx, std::size_t scale_idx) const {
    return log_values[order_idx * scales.size() + scale_idx];
  }
  double& at(std::size_t order_idx, std::size_t scale_idx) {
    return log_values[order_idx * scales.size() + scale_idx];
  }
  bool missing(std::size_t order_idx, std::size_t scale_idx) const {
    return std::isnan(at(order_idx, scale_idx));
  }

  std::optional<std::size_t> order_index(double order, double tol = 1e-9) const {
    for (std::size_t i = 0; i < orders.size(); ++i) {
      if (std::abs(orders[i] - order) <= tol) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

inline void check_order_grid(std::span<const double> grid, std::vector<std::string>& warnings,
                             const char* who) {
  if (grid.empty()) throw ValidationError(std::string(who) + ": empty order grid");
  bool wide = false;
  for (double q : grid) {
    if (!std::isfinite(q) || q < -20.0 || q > 20.0) {
      std::ostringstream os;
      os << who << ": order " << q << " outside [-20, 20]";
      throw ValidationError(os.str());
    }
    if (q < -4.0 || q > 8.0) wide = true;
  }
  if (wide) {
    warnings.push_back(std::string(who) +
                       ": orders outside [-4, 8] rely on few extreme boxes and may be "
                       "statistically insignificant");
  }
}

template <class T>
void check_increasing(std::span<const T> scales, const char* who) {
  if (scales.empty()) throw ValidationError(std::string(who) + ": no scales");
  for (std::size_t i = 1; i < scales.size(); ++i) {
    if (!(scales[i] > scales[i - 1])) {
      throw ValidationError(std::string(who) + ": scales must be strictly increasing");
    }
  }
}

}  // namespace detail

inline PartitionCurve direct_partition(const VolatilitySeries& vol,
                                       std::span<const std::size_t> box_sizes,
                                       std::span<const double> q_grid) {
  PartitionCurve curve;
  curve.kind = PartitionKind::direct;
  detail::check_order_grid(q_grid, curve.warnings, "direct_partition");
  detail::check_increasing(box_sizes, "direct_partition");
  curve.orders.assign(q_grid.begin(), q_grid.end());
  for (std::size_t s : box_sizes) curve.scales.push_back(static_cast<double>(s));
  curve.log_values.assign(curve.orders.size() * curve.scales.size(),
                          std::numeric_limits<double>::quiet_NaN());

  for (std::size_t j = 0; j < box_sizes.size(); ++j) {
    const ConservativeMeasure m = box_measure(vol, box_sizes[j]);
    const std::vector<double> logs = detail::logs_of(m.weights);
    const bool has_zero = detail::first_nonpositive(m.weights).has_value();
    for (std::size_t i = 0; i < curve.orders.size(); ++i) {
      const double q = curve.orders[i];
      if (q < 0.0 && has_zero) continue;
      curve.at(i, j) = detail::log_moment_from_logs(logs, q);
    }
  }
  return curve;
}

/// Exit times for one threshold.
struct ExitTimeSequence {
  double threshold = 0.0;
  std::vector<double> times;  // s_j, in samples
  std::size_t series_length = 0;

  std::size_t count() const noexcept { return times.size(); }
};

/// s_j from  sum_{k<=j} s_k = inf{t : int_0^t nu >= j dv}, where nu equals
/// v(i) on [i, i+1).  Exactly floor(V / dv) times are returned.
inline ExitTimeSequence exit_times(const VolatilitySeries& vol, double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw ValidationError("exit_times: threshold must be positive and finite");
  }
  const double jd = std::floor(vol.total / threshold);
  if (jd < 1.0) {
    std::ostringstream os;
    os << "exit_times: threshold " << threshold << " exceeds total activity " << vol.total;
    throw ValidationError(os.str());
  }
  const auto count = static_cast<std::size_t>(jd);
  const std::size_t n = vol.size();
  const double* v = vol.values.data();

  ExitTimeSequence out;
  out.threshold = threshold;
  out.series_length = n;
  out.times.resize(count);

  std::size_t i = 0;
  long double cum = 0.0L;  // activity accumulated before sample i
  double prev = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    const long double level = static_cast<long double>(j + 1) * threshold;
    while (i < n && cum + v[i] < level) cum += v[i++];
    double t;
    if (i == n) {
      // rounding left the last level a hair above the total
      t = static_cast<double>(n);
    } else {
      t = static_cast<double>(static_cast<long double>(i) + (level - cum) / v[i]);
    }
    out.times[j] = t - prev;
    prev = t;
  }
  return out;
}

/// ln chi*_p over thresholds.  A threshold with fewer than
/// `min_exit_count` exit times is left missing and noted in the warnings.
inline PartitionCurve inverse_partition(const VolatilitySeries& vol,
                                        std::span<const double> thresholds,
                                        std::span<const double> p_grid,
                                        std::size_t min_exit_count = 10) {
  PartitionCurve curve;
  curve.kind = PartitionKind::inverse;
  detail::check_order_grid(p_grid, curve.warnings, "inverse_partition");
  detail::check_increasing(thresholds, "inverse_partition");
  if (!(thresholds.front() > 0.0)) {
    throw ValidationError("inverse_partition: thresholds must be positive");
  }
  curve.orders.assign(p_grid.begin(), p_grid.end());
  curve.scales.assign(thresholds.begin(), thresholds.end());
  curve.log_values.assign(curve.orders.size() * curve.scales.size(),
                          std::numeric_limits<double>::quiet_NaN());

  const double length = static_cast<double>(vol.size());
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const double dv = thresholds[j];
    const double jcount = std::floor(vol.total / dv);
    if (jcount < static_cast<double>(min_exit_count)) {
      std::ostringstream os;
      os << "inverse_partition: threshold " << dv << " yields " << jcount
         << " exit times (< " << min_exit_count << "), column left missing";
      curve.warnings.push_back(os.str());
      continue;
    }
    ExitTimeSequence ex = exit_times(vol, dv);
    for (double& s : ex.times) s /= length;
    const std::vector<double> logs = detail::logs_of(ex.times);
    const bool has_zero = detail::first_nonpositive(ex.times).has_value();
    for (std::size_t i = 0; i < curve.orders.size(); ++i) {
      const double p = curve.orders[i];
      if (p < 0.0 && has_zero) continue;
      curve.at(i, j) = detail::log_moment_from_logs(logs, p);
    }
  }
  return curve;
}

}  // namespace mfinv
