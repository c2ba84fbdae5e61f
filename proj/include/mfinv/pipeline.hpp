#pragma once

// End-to-end direct and inverse analyses built from the individual stages.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mfinv/grids.hpp"
#include "mfinv/inversion.hpp"
#include "mfinv/measure.hpp"
#include "mfinv/partition.hpp"
#include "mfinv/scaling.hpp"

namespace mfinv {

struct PipelineOptions {
  std::vector<double> q_grid = order_grid(-4.0, 8.0, 0.25);
  std::vector<double> p_grid = order_grid(-4.0, 8.0, 0.25);
  std::vector<double> anchors{-2.0, 0.0, 2.0, 4.0};
  std::optional<ScaleRange> direct_range;   // overrides detection
  std::optional<ScaleRange> inverse_range;  // overrides detection
  BoxGridOptions box_grid;
  double thresholds_per_decade = 10.0;
  std::size_t min_exit_count = 10;
  ScalingRangeOptions detection;
  InversionOptions inversion;
};

/// Truncates the series to the largest 5-smooth length so that the box-size
/// grid can be drawn from its divisors.
inline VolatilitySeries truncate_for_boxes(const VolatilitySeries& vol) {
  const std::size_t len = smooth_length(vol.size());
  if (len == vol.size()) return vol;
  return VolatilitySeries::from_values(
      std::vector<double>(vol.values.begin(), vol.values.begin() + static_cast<std::ptrdiff_t>(len)));
}

struct DirectResult {
  std::size_t used_length = 0;
  std::vector<std::size_t> box_sizes;
  PartitionCurve partition;
  ScaleRange range{0.0, 0.0};
  bool range_detected = false;
  double range_r2 = 0.0;
  ExponentCurve exponents;
  std::vector<SpectrumPoint> spectrum;
};

/// `vol` must already have a length whose divisors form the box grid (see
/// truncate_for_boxes).
inline DirectResult run_direct(const VolatilitySeries& vol, const PipelineOptions& opt) {
  DirectResult r;
  r.used_length = vol.size();
  r.box_sizes = box_size_grid(vol.size(), opt.box_grid);
  r.partition = direct_partition(vol, r.box_sizes, opt.q_grid);
  if (opt.direct_range) {
    r.range = *opt.direct_range;
  } else {
    const DetectedRange d = detect_scaling_range(r.partition, opt.anchors, opt.detection);
    r.range = {d.lo, d.hi};
    r.range_detected = true;
    r.range_r2 = d.mean_r2;
  }
  r.exponents = exponent_curve(r.partition, r.range);
  if (r.exponents.size() >= 2) r.spectrum = legendre_spectrum(r.exponents);
  return r;
}

struct ExitStats {
  double threshold = 0.0;
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double total_time = 0.0;
};

inline ExitStats summarize(const ExitTimeSequence& ex) {
  ExitStats s;
  s.threshold = ex.threshold;
  s.count = ex.count();
  for (double t : ex.times) s.total_time += t;
  s.mean = s.count ? s.total_time / static_cast<double>(s.count) : 0.0;
  double ss = 0.0;
  for (double t : ex.times) ss += (t - s.mean) * (t - s.mean);
  s.std_dev = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
  return s;
}

struct InverseResult {
  std::vector<double> thresholds;
  std::vector<ExitStats> exit_stats;
  PartitionCurve partition;
  ScaleRange range{0.0, 0.0};
  bool range_detected = false;
  double range_r2 = 0.0;
  ExponentCurve exponents;
};

/// Thresholds mirror the box grid of the same series: dv = s * v_mean.
inline InverseResult run_inverse(const VolatilitySeries& vol, const PipelineOptions& opt) {
  InverseResult r;
  const std::vector<std::size_t> boxes = box_size_grid(vol.size(), opt.box_grid);
  r.thresholds = threshold_grid(static_cast<double>(boxes.front()),
                                static_cast<double>(boxes.back()), vol.mean,
                                opt.thresholds_per_decade);
  for (double dv : r.thresholds) {
    if (dv <= vol.total) r.exit_stats.push_back(summarize(exit_times(vol, dv)));
  }
  r.partition = inverse_partition(vol, r.thresholds, opt.p_grid, opt.min_exit_count);
  if (opt.inverse_range) {
    r.range = *opt.inverse_range;
  } else {
    const DetectedRange d = detect_scaling_range(r.partition, opt.anchors, opt.detection);
    r.range = {d.lo, d.hi};
    r.range_detected = true;
    r.range_r2 = d.mean_r2;
  }
  r.exponents = exponent_curve(r.partition, r.range);
  return r;
}

struct InvertCheckResult {
  DirectResult direct;
  InverseResult inverse;
  double v_mean = 0.0;
  RangeConsistency consistency;
  InversionReport report;
};

/// Runs both analyses.  `inverse_vol` defaults to `direct_vol`; passing a
/// different series gives a negative control.
inline InvertCheckResult run_invert_check(const VolatilitySeries& direct_vol,
                                          const VolatilitySeries* inverse_vol,
                                          const PipelineOptions& opt) {
  const VolatilitySeries& inv = inverse_vol ? *inverse_vol : direct_vol;
  InvertCheckResult r;
  r.direct = run_direct(direct_vol, opt);
  r.inverse = run_inverse(inv, opt);
  r.v_mean = inv.mean;
  r.consistency = check_range_consistency(r.direct.range, r.inverse.range, r.v_mean);
  r.report = inversion_check(r.direct.exponents, r.inverse.exponents, opt.inversion);
  return r;
}

}  // namespace mfinv
