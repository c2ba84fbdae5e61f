#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

#include "mfinv/error.hpp"

namespace mfinv {

/// lo, lo + step, ..., hi (inclusive up to rounding).
inline std::vector<double> order_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw ValidationError("order_grid: need step > 0 and hi >= lo");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo + static_cast<double>(i) * step;
    if (std::abs(g[i]) < 1e-12) g[i] = 0.0;
  }
  return g;
}

/// Largest 2^a 3^b 5^c not exceeding n.  Such lengths have many divisors
/// spread evenly on a log axis.
inline std::size_t smooth_length(std::size_t n) {
  if (n == 0) throw ValidationError("smooth_length: empty series");
  std::size_t best = 1;
  for (std::size_t a = 1; a <= n; a *= 2) {
    for (std::size_t b = a; b <= n; b *= 3) {
      for (std::size_t c = b; c <= n; c *= 5) best = std::max(best, c);
    }
  }
  return best;
}

inline std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> lo, hi;
  for (std::size_t d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      lo.push_back(d);
      if (d != n / d) hi.push_back(n / d);
    }
  }
  lo.insert(lo.end(), hi.rbegin(), hi.rend());
  return lo;
}

struct BoxGridOptions {
  double points_per_decade = 10.0;
  std::size_t min_box = 1;
  std::size_t min_boxes = 10;  // largest box leaves at least this many boxes
};

/// Divisors of `length` nearest (on a log axis) to a log-spaced target grid
/// from min_box to length / min_boxes.  Strictly increasing, deduplicated.
inline std::vector<std::size_t> box_size_grid(std::size_t length, const BoxGridOptions& opt = {}) {
  if (length < opt.min_boxes * std::max<std::size_t>(opt.min_box, 1)) {
    std::ostringstream os;
    os << "box_size_grid: series of length " << length << " is too short";
    throw ValidationError(os.str());
  }
  const std::size_t smax = length / opt.min_boxes;
  std::vector<std::size_t> divs;
  for (std::size_t d : divisors(length)) {
    if (d >= opt.min_box && d <= smax) divs.push_back(d);
  }
  if (divs.empty()) throw ValidationError("box_size_grid: no admissible divisors");
  const double l0 = std::log10(static_cast<double>(divs.front()));
  const double l1 = std::log10(static_cast<double>(divs.back()));
  const auto n = static_cast<std::size_t>(std::ceil((l1 - l0) * opt.points_per_decade)) + 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = n == 1 ? l0 : l0 + (l1 - l0) * static_cast<double>(i) / (n - 1);
    std::size_t best = divs.front();
    for (std::size_t d : divs) {
      if (std::abs(std::log10(static_cast<double>(d)) - target) <
          std::abs(std::log10(static_cast<double>(best)) - target)) {
        best = d;
      }
    }
    if (out.empty() || best > out.back()) out.push_back(best);
  }
  return out;
}

/// Log-spaced thresholds from s_min * v_mean to s_max * v_mean, mirroring
/// the box sizes through dv = s * v_mean.
inline std::vector<double> threshold_grid(double s_min, double s_max, double v_mean,
                                          double points_per_decade = 10.0) {
  if (!(s_min > 0.0) || !(s_max > s_min) || !(v_mean > 0.0)) {
    throw ValidationError("threshold_grid: need 0 < s_min < s_max and v_mean > 0");
  }
  const double decades = std::log10(s_max / s_min);
  const auto n = static_cast<std::size_t>(std::ceil(decades * points_per_decade)) + 1;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = s_min * v_mean * std::pow(s_max / s_min, u);
  }
  return out;
}

}  // namespace mfinv
