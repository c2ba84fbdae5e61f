#pragma once

// Self-similar multinomial cascades and their exact scaling exponents.
//
// A cascade with probabilities m_i and contraction ratios r_i has a moment
// scaling function tau(q) solving  sum_i m_i^q r_i^(-tau) = 1.  Its inverse
// measure is again self-similar with the roles of m and r swapped, so its
// exponent theta(p) solves the same equation on the swapped specification.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mfinv/error.hpp"

namespace mfinv {

struct CascadeSpec {
  std::vector<double> weights;  // m_i
  std::vector<double> ratios;   // r_i

  std::size_t branches() const noexcept { return weights.size(); }

  bool equal_ratios(double tol = 1e-12) const noexcept {
    for (double r : ratios) {
      if (std::abs(r - ratios.front()) > tol) return false;
    }
    return !ratios.empty();
  }

  /// The specification of the inverse measure: m* = r, r* = m.
  CascadeSpec swapped() const { return CascadeSpec{ratios, weights}; }

  /// Throws ValidationError naming the first violated invariant.  The tiling
  /// condition sum r_i = 1 is only needed to generate a measure on [0, 1].
  void validate(bool require_tiling = false) const {
    if (weights.size() < 2) {
      throw ValidationError("cascade: branch count must be >= 2");
    }
    if (ratios.size() != weights.size()) {
      throw ValidationError("cascade: weights and ratios differ in length");
    }
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] > 0.0 && weights[i] < 1.0)) {
        std::ostringstream os;
        os << "cascade: weight m[" << i << "] = " << weights[i] << " not in (0,1)";
        throw ValidationError(os.str());
      }
      if (!(ratios[i] > 0.0 && ratios[i] < 1.0)) {
        std::ostringstream os;
        os << "cascade: ratio r[" << i << "] = " << ratios[i] << " not in (0,1)";
        throw ValidationError(os.str());
      }
    }
    const double msum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::abs(msum - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "cascade: weights sum to " << msum << ", expected 1";
      throw ValidationError(os.str());
    }
    if (require_tiling) {
      const double rsum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
      if (std::abs(rsum - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "cascade: ratios sum to " << rsum << ", expected 1 for generation";
        throw ValidationError(os.str());
      }
    }
  }
};

/// Finest-level box masses of a generated cascade, left to right.
struct GeneratedMeasure {
  std::vector<double> weights;
  std::vector<double> widths;  // empty when all ratios are equal (regular grid)
  int depth = 0;
  CascadeSpec spec;
  bool shuffled = false;
  std::optional<std::uint64_t> seed;
};

inline constexpr std::size_t kMaxCascadeBoxes = std::size_t{1} << 26;

/// Multiplicative construction.  With a seed, the (m_i, r_i) pairs are
/// permuted independently at every node.
inline GeneratedMeasure generate_cascade(const CascadeSpec& spec, int depth,
                                         std::optional<std::uint64_t> seed = std::nullopt) {
  spec.validate(/*require_tiling=*/true);
  if (depth < 1) throw ValidationError("cascade: depth must be positive");

  const std::size_t n = spec.branches();
  std::size_t total = 1;
  for (int level = 0; level < depth; ++level) {
    if (total > kMaxCascadeBoxes / n) {
      std::ostringstream os;
      os << "cascade: " << n << "^" << depth << " boxes exceeds the limit of 2^26";
      throw ResourceError(os.str());
    }
    total *= n;
  }

  const bool track_widths = !spec.equal_ratios();
  GeneratedMeasure out;
  out.depth = depth;
  out.spec = spec;
  out.shuffled = seed.has_value();
  out.seed = seed;

  std::vector<double> mass{1.0}, width{1.0};
  std::vector<double> next_mass, next_width;
  mass.reserve(total);
  next_mass.reserve(total);
  if (track_widths) {
    width.reserve(total);
    next_width.reserve(total);
  }

  std::mt19937_64 rng(seed.value_or(0));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int level = 0; level < depth; ++level) {
    next_mass.clear();
    next_width.clear();
    for (std::size_t k = 0; k < mass.size(); ++k) {
      if (seed) std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        next_mass.push_back(mass[k] * spec.weights[i]);
        if (track_widths) next_width.push_back(width[k] * spec.ratios[i]);
      }
    }
    mass.swap(next_mass);
    if (track_widths) width.swap(next_width);
  }

  out.weights = std::move(mass);
  if (track_widths) out.widths = std::move(width);
  return out;
}

namespace detail {

// Root of h(x) = log sum_i exp(order * log_prob_i - x * log_ratio_i).  h is
// strictly increasing and convex in x because every log_ratio_i < 0.
inline double solve_moran(const std::vector<double>& probs, const std::vector<double>& ratios,
                          double order, const char* name) {
  const std::size_t n = probs.size();
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = order * std::log(probs[i]);
    b[i] = -std::log(ratios[i]);  // > 0
  }

  // Returns h(x) and sets dh = h'(x).
  auto h = [&](double x, double& dh) {
    double top = -INFINITY;
    for (std::size_t i = 0; i < n; ++i) top = std::max(top, a[i] + x * b[i]);
    double s = 0.0, ds = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = std::exp(a[i] + x * b[i] - top);
      s += e;
      ds += e * b[i];
    }
    dh = ds / s;
    return top + std::log(s);
  };
  auto residual = [](double hx) { return std::expm1(hx); };

  constexpr double kTol = 1e-12;
  constexpr int kMaxIter = 200;
  double x = order - 1.0;
  double dh = 0.0;
  double hx = h(x, dh);
  int iter = 0;
  bool newton_ok = true;
  for (; iter < kMaxIter && std::abs(residual(hx)) > kTol; ++iter) {
    const double step = hx / dh;
    const double nx = x - step;
    if (!std::isfinite(nx) || nx < -100.0 || nx > 100.0) {
      newton_ok = false;
      break;
    }
    x = nx;
    hx = h(x, dh);
  }
  if (newton_ok && std::abs(residual(hx)) <= kTol) return x;

  // Bracket around the Newton start, widened geometrically, then bisect.
  double lo = order - 2.0, hi = order;
  double width = 1.0;
  double hlo = h(lo, dh), hhi = h(hi, dh);
  for (int k = 0; k < 200 && !(hlo <= 0.0 && hhi >= 0.0); ++k) {
    width *= 2.0;
    if (hlo > 0.0) lo -= width, hlo = h(lo, dh);
    if (hhi < 0.0) hi += width, hhi = h(hi, dh);
  }
  for (; iter < 10 * kMaxIter; ++iter) {
    x = 0.5 * (lo + hi);
    hx = h(x, dh);
    if (std::abs(residual(hx)) <= kTol || hi - lo < 1e-15 * std::max(1.0, std::abs(x))) break;
    (hx < 0.0 ? lo : hi) = x;
  }
  if (std::abs(residual(hx)) > kTol) {
    std::ostringstream os;
    os.precision(17);
    os << name << ": no convergence at order " << order << ", residual " << residual(hx);
    throw NumericalError(os.str());
  }
  return x;
}

}  // namespace detail

/// Exact tau(q) of a self-similar measure.
inline double analytic_tau(const CascadeSpec& spec, double q) {
  spec.validate();
  if (!std::isfinite(q)) throw ValidationError("analytic_tau: order must be finite");
  if (spec.equal_ratios()) {
    double s = 0.0;
    for (double m : spec.weights) s += std::pow(m, q);
    return std::log(s) / std::log(spec.ratios.front());
  }
  return detail::solve_moran(spec.weights, spec.ratios, q, "analytic_tau");
}

/// Exact theta(p) of the inverse measure; requires sum r_i = 1 so the swapped
/// specification is itself a probability vector.
inline double analytic_theta(const CascadeSpec& spec, double p) {
  spec.validate(/*require_tiling=*/true);
  if (!std::isfinite(p)) throw ValidationError("analytic_theta: order must be finite");
  const CascadeSpec inv = spec.swapped();
  if (inv.equal_ratios()) return analytic_tau(inv, p);
  return detail::solve_moran(inv.weights, inv.ratios, p, "analytic_theta");
}

}  // namespace mfinv
