// Estimates tau(q) and theta(p) on a binomial cascade and compares both with
// the closed forms, then tests the inversion formula.

#include <cstdio>

#include "mfinv.hpp"

int main() {
  const mfinv::CascadeSpec spec{{0.6, 0.4}, {0.5, 0.5}};
  const auto measure = mfinv::generate_cascade(spec, 14, std::nullopt);
  const auto vol = mfinv::VolatilitySeries::from_values(measure.weights);

  mfinv::PipelineOptions opt;
  const auto r = mfinv::run_invert_check(vol, nullptr, opt);

  std::printf("direct range [%g, %g], inverse range [%g, %g]\n", r.direct.range.first,
              r.direct.range.second, r.inverse.range.first, r.inverse.range.second);
  std::printf("%6s %10s %10s %10s %10s\n", "order", "tau", "exact", "theta", "exact");
  for (double q : {-2.0, 0.0, 1.0, 2.0, 4.0}) {
    double tau = 0, theta = 0;
    for (std::size_t k = 0; k < r.direct.exponents.size(); ++k) {
      if (r.direct.exponents.orders[k] == q) tau = r.direct.exponents.exponents[k];
    }
    for (std::size_t k = 0; k < r.inverse.exponents.size(); ++k) {
      if (r.inverse.exponents.orders[k] == q) theta = r.inverse.exponents.exponents[k];
    }
    std::printf("%6.2f %10.5f %10.5f %10.5f %10.5f\n", q, tau, mfinv::analytic_tau(spec, q), theta,
                mfinv::analytic_theta(spec, q));
  }
  std::printf("max |tau + theta^-1(-q)| = %.4f, within error bars: %s\n", r.report.max_abs_diff,
              r.report.within_error_bars ? "yes" : "no");
}
