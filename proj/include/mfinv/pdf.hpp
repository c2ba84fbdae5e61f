#pragma once

// Densities of exit times normalised by their standard deviation,
// rho(x) = sigma f(x sigma) with x = s / sigma.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "mfinv/error.hpp"
#include "mfinv/partition.hpp"
#include "mfinv/scaling.hpp"

namespace mfinv {

enum class Binning { linear, log };

inline const char* to_string(Binning b) noexcept { return b == Binning::linear ? "linear" : "log"; }

struct PdfEstimate {
  double threshold = 0.0;
  double sigma = 0.0;
  Binning binning = Binning::log;
  std::vector<double> bin_edges;  // bin_centers.size() + 1, strictly increasing
  std::vector<double> bin_centers;
  std::vector<double> densities;  // empty bins report 0
  std::vector<std::size_t> counts;
  std::size_t n_samples = 0;
  std::vector<std::string> warnings;

  double width(std::size_t k) const { return bin_edges[k + 1] - bin_edges[k]; }

  /// sum density * width; 1 up to rounding when every sample is binned.
  double integral() const {
    double s = 0.0;
    for (std::size_t k = 0; k < densities.size(); ++k) s += densities[k] * width(k);
    return s;
  }
};

/// Histogram of x = s / sigma, with sigma the sample standard deviation.
/// Log binning uses geometric edges between the smallest and largest x.
inline PdfEstimate estimate_pdf(const ExitTimeSequence& exits, Binning binning = Binning::log,
                                std::size_t bin_count = 40) {
  const std::size_t n = exits.count();
  if (n < 2) throw ValidationError("estimate_pdf: need at least 2 exit times");
  if (bin_count == 0) throw ValidationError("estimate_pdf: bin count must be positive");

  double mean = 0.0;
  for (double s : exits.times) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : exits.times) ss += (s - mean) * (s - mean);
  const double sigma = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sigma > 0.0)) {
    throw DomainError("estimate_pdf: exit times have zero variance, distribution is degenerate");
  }

  PdfEstimate pdf;
  pdf.threshold = exits.threshold;
  pdf.sigma = sigma;
  pdf.binning = binning;
  pdf.n_samples = n;
  if (n < 100) {
    std::ostringstream os;
    os << "estimate_pdf: only " << n << " exit times, density estimate is coarse";
    pdf.warnings.push_back(os.str());
  }

  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = exits.times[i] / sigma;
  const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *lo_it, hi = *hi_it;
  if (binning == Binning::log && !(lo > 0.0)) {
    throw DomainError("estimate_pdf: log binning needs strictly positive exit times");
  }

  pdf.bin_edges.resize(bin_count + 1);
  for (std::size_t k = 0; k <= bin_count; ++k) {
    const double u = static_cast<double>(k) / static_cast<double>(bin_count);
    pdf.bin_edges[k] = binning == Binning::linear ? lo + u * (hi - lo) : lo * std::pow(hi / lo, u);
  }
  pdf.bin_edges.front() = lo;
  pdf.bin_edges.back() = hi;

  pdf.counts.assign(bin_count, 0);
  const double log_span = binning == Binning::log ? std::log(hi / lo) : 0.0;
  for (double xi : x) {
    double u = binning == Binning::linear ? (xi - lo) / (hi - lo) : std::log(xi / lo) / log_span;
    auto k = static_cast<std::ptrdiff_t>(std::floor(u * static_cast<double>(bin_count)));
    k = std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(bin_count) - 1);
    // settle rounding at the edges so bins are half-open [e_k, e_{k+1})
    while (k > 0 && xi < pdf.bin_edges[k]) --k;
    while (k + 1 < static_cast<std::ptrdiff_t>(bin_count) && xi >= pdf.bin_edges[k + 1]) ++k;
    ++pdf.counts[static_cast<std::size_t>(k)];
  }

  pdf.bin_centers.resize(bin_count);
  pdf.densities.resize(bin_count);
  for (std::size_t k = 0; k < bin_count; ++k) {
    const double a = pdf.bin_edges[k], b = pdf.bin_edges[k + 1];
    pdf.bin_centers[k] = binning == Binning::linear ? 0.5 * (a + b) : std::sqrt(a * b);
    pdf.densities[k] = static_cast<double>(pdf.counts[k]) / (static_cast<double>(n) * (b - a));
  }
  return pdf;
}

enum class TailShape { exponential, power_law, indeterminate };

inline const char* to_string(TailShape t) noexcept {
  switch (t) {
    case TailShape::exponential: return "exponential";
    case TailShape::power_law: return "power_law";
    case TailShape::indeterminate: return "indeterminate";
  }
  return "unknown";
}

struct TailOptions {
  double plateau_variation = 0.2;  // max relative density change across the lowest decade
  std::size_t plateau_min_count = 100;
  std::size_t tail_min_count = 5;  // bins with fewer samples are left out of the tail fits
  double r2_margin = 0.02;
};

struct TailReport {
  bool plateau_evaluated = false;
  bool left_plateau = false;
  double left_variation = 0.0;
  double decade_lo = 0.0;
  TailShape right_tail = TailShape::indeterminate;
  double semilog_r2 = 0.0;
  double loglog_r2 = 0.0;
  double semilog_slope = 0.0;
  double loglog_slope = 0.0;
  std::size_t tail_bins = 0;
};

/// Left tail: compares the pooled density of the two half-decades of the
/// lowest populated decade.  Right tail: ln rho against x (exponential) or
/// against ln x (power law) above the median; the better R^2 wins when the
/// margin is at least `r2_margin`.
inline TailReport tail_diagnostics(const PdfEstimate& pdf, const TailOptions& opt = {}) {
  TailReport rep;
  const std::size_t nb = pdf.densities.size();
  const double total = static_cast<double>(pdf.n_samples);
  const std::size_t need = std::min<std::size_t>(opt.plateau_min_count, pdf.n_samples / 10);

  for (std::size_t b = 0; b < nb && !rep.plateau_evaluated; ++b) {
    const double xa = pdf.bin_edges[b];
    if (!(xa > 0.0)) continue;
    const double split = xa * std::sqrt(10.0), top = 10.0 * xa;
    double c1 = 0, w1 = 0, c2 = 0, w2 = 0;
    for (std::size_t k = b; k < nb && pdf.bin_centers[k] <= top; ++k) {
      (pdf.bin_centers[k] < split ? c1 : c2) += static_cast<double>(pdf.counts[k]);
      (pdf.bin_centers[k] < split ? w1 : w2) += pdf.width(k);
    }
    if (w1 == 0.0 || w2 == 0.0 || c1 + c2 < static_cast<double>(std::max<std::size_t>(need, 2))) {
      continue;
    }
    const double d1 = c1 / (total * w1), d2 = c2 / (total * w2);
    rep.plateau_evaluated = true;
    rep.decade_lo = xa;
    rep.left_variation = std::abs(d1 - d2) / (0.5 * (d1 + d2));
    rep.left_plateau = rep.left_variation < opt.plateau_variation;
  }

  std::size_t cum = 0, median_bin = 0;
  for (std::size_t k = 0; k < nb; ++k) {
    cum += pdf.counts[k];
    if (2 * cum >= pdf.n_samples) {
      median_bin = k;
      break;
    }
  }
  std::vector<double> xs, lxs, lys;
  for (std::size_t k = median_bin; k < nb; ++k) {
    if (pdf.counts[k] < opt.tail_min_count) continue;
    xs.push_back(pdf.bin_centers[k]);
    lxs.push_back(std::log(pdf.bin_centers[k]));
    lys.push_back(std::log(pdf.densities[k]));
  }
  rep.tail_bins = xs.size();
  if (xs.size() >= 3) {
    const LinearFit semi = ols(xs, lys);
    rep.semilog_r2 = semi.r_squared;
    rep.semilog_slope = semi.slope;
    if (xs.front() > 0.0) {
      const LinearFit ll = ols(lxs, lys);
      rep.loglog_r2 = ll.r_squared;
      rep.loglog_slope = ll.slope;
    }
    if (rep.semilog_r2 - rep.loglog_r2 >= opt.r2_margin) {
      rep.right_tail = TailShape::exponential;
    } else if (rep.loglog_r2 - rep.semilog_r2 >= opt.r2_margin) {
      rep.right_tail = TailShape::power_law;
    }
  }
  return rep;
}

}  // namespace mfinv
