#include <algorithm>
#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "mfinv/cascade.hpp"
#include "mfinv/grids.hpp"
#include "mfinv/inversion.hpp"

using Catch::Approx;
using mfinv::ExponentCurve;

namespace {

ExponentCurve make_curve(const std::vector<double>& orders, auto f, double se = 0.0) {
  ExponentCurve c;
  c.orders = orders;
  for (double x : orders) c.exponents.push_back(f(x));
  c.stderrs.assign(orders.size(), se);
  return c;
}

const mfinv::CascadeSpec kBinomial{{0.6, 0.4}, {0.5, 0.5}};

ExponentCurve analytic_tau_curve(const mfinv::CascadeSpec& s, double step = 0.25) {
  return make_curve(mfinv::order_grid(-4, 8, step), [&](double q) { return mfinv::analytic_tau(s, q); });
}
ExponentCurve analytic_theta_curve(const mfinv::CascadeSpec& s, double step = 0.25) {
  auto c = make_curve(mfinv::order_grid(-4, 8, step), [&](double p) { return mfinv::analytic_theta(s, p); });
  c.kind = mfinv::ExponentKind::inverse;
  return c;
}

}  // namespace

TEST_CASE("inverting a linear curve") {
  const auto c = make_curve(mfinv::order_grid(-4, 8, 0.25), [](double q) { return q - 1; });
  const std::vector<double> t{2.0, -5.0, 7.0, 7.5, -5.5};
  const auto r = mfinv::invert_exponent_curve(c, t);
  REQUIRE(r[0].value);
  CHECK(*r[0].value == Approx(3.0).margin(1e-12));
  CHECK(*r[1].value == Approx(-4.0).margin(1e-12));
  CHECK(*r[2].value == Approx(8.0).margin(1e-12));
  CHECK_FALSE(r[3].value);
  CHECK_FALSE(r[4].value);
  CHECK(r[0].std_error == Approx(mfinv::detail::kInterpolationFloor));
}

TEST_CASE("inverting the analytic theta curve") {
  // dense grid: the piecewise-linear error is well below 1e-6
  const auto c = analytic_theta_curve(kBinomial, 1e-3);
  // theta(-tau(2)) = -2, so the preimage of -2 is -tau(2)
  const std::vector<double> t{-2.0};
  const auto r = mfinv::invert_exponent_curve(c, t);
  REQUIRE(r[0].value);
  CHECK(*r[0].value == Approx(-mfinv::analytic_tau(kBinomial, 2)).margin(1e-6));
  CHECK(*r[0].value == Approx(-0.943416).margin(1e-6));
  // and theta(p) = -tau(2) sits at p = -tau(-tau(2)) (by the same identity)
  const std::vector<double> t2{-mfinv::analytic_tau(kBinomial, 2)};
  const auto r2 = mfinv::invert_exponent_curve(c, t2);
  REQUIRE(r2[0].value);
  CHECK(*r2[0].value == Approx(-mfinv::analytic_tau(kBinomial, 0.943416)).margin(1e-5));
}

TEST_CASE("standard errors propagate through the local slope") {
  auto c = make_curve(mfinv::order_grid(0, 4, 1), [](double q) { return 2 * q; }, 0.1);
  const std::vector<double> t{3.0};
  const auto r = mfinv::invert_exponent_curve(c, t);
  CHECK(*r[0].value == Approx(1.5));
  CHECK(r[0].std_error == Approx(0.05));
}

TEST_CASE("non-monotone curves are repaired, flat ones rejected") {
  auto c = make_curve({0, 1, 2, 3}, [](double q) { return q; });
  c.exponents = {0, 2, 1, 3};  // pooled to 0, 1.5, 1.5, 3
  const std::vector<double> t{0.75, 1.5, 2.25};
  const auto r = mfinv::invert_exponent_curve(c, t);
  CHECK(*r[0].value == Approx(0.5));
  CHECK(*r[1].value >= 1.0);
  CHECK(*r[1].value <= 2.0);
  CHECK(*r[2].value == Approx(2.5));

  auto flat = make_curve({0, 1, 2}, [](double) { return 1.0; });
  CHECK_THROWS_AS(mfinv::invert_exponent_curve(flat, t), mfinv::InversionError);
  flat.exponents = {2, 1, 0};
  CHECK_THROWS_AS(mfinv::invert_exponent_curve(flat, t), mfinv::InversionError);
  auto one = make_curve({0}, [](double) { return 1.0; });
  CHECK_THROWS_AS(mfinv::invert_exponent_curve(one, t), mfinv::InversionError);
}

TEST_CASE("inversion check on closed forms") {
  for (const auto& s : {kBinomial, mfinv::CascadeSpec{{0.7, 0.3}, {0.5, 0.5}}}) {
    const auto rep = mfinv::inversion_check(analytic_tau_curve(s, 1e-3), analytic_theta_curve(s, 1e-3));
    CHECK(rep.max_abs_diff <= 1e-6);
    CHECK(rep.within_error_bars);
    CHECK(rep.coverage > 0);
    CHECK(rep.coverage <= 1);
    CHECK(rep.reliable);
  }
}

TEST_CASE("inversion check on the uniform measure") {
  const auto lin = make_curve(mfinv::order_grid(-4, 8, 0.25), [](double q) { return q - 1; });
  const auto rep = mfinv::inversion_check(lin, lin);
  CHECK(rep.max_abs_diff == Approx(0).margin(1e-12));
  CHECK(rep.within_error_bars);
  for (std::size_t i = 0; i < rep.tau_side.grid.size(); ++i) {
    if (rep.tau_side.computed(i)) CHECK(rep.tau_side.rhs[i] == Approx(rep.tau_side.grid[i] - 1));
  }
}

TEST_CASE("a shifted direct curve fails the check") {
  auto tau = analytic_tau_curve(kBinomial);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    tau.exponents[i] += 0.5;
    tau.stderrs[i] = 0.02;
  }
  auto theta = analytic_theta_curve(kBinomial);
  theta.stderrs.assign(theta.size(), 0.02);
  const auto rep = mfinv::inversion_check(tau, theta);
  CHECK_FALSE(rep.within_error_bars);
  CHECK(rep.max_abs_diff > 0.3);
}

TEST_CASE("self-consistency at step 0.25 is within the interpolation bound") {
  const auto tau = analytic_tau_curve(kBinomial);
  // the exact inverse of tau sampled as a curve: theta(p) = -tau^{-1}(-p)
  ExponentCurve theta;
  theta.kind = mfinv::ExponentKind::inverse;
  theta.orders = mfinv::order_grid(-4, 8, 0.25);
  for (double p : theta.orders) theta.exponents.push_back(mfinv::analytic_theta(kBinomial, p));
  theta.stderrs.assign(theta.size(), 0.0);
  const auto rep = mfinv::inversion_check(tau, theta);
  // chord error of a sampled curve is at most h^2 |f''| / 8 in value, which
  // becomes h^2 |f''| / (8 |f'|) in abscissa when that curve is inverted
  auto chord_bound = [](const ExponentCurve& c) {
    double worst = 0;
    for (std::size_t i = 1; i + 1 < c.size(); ++i) {
      const double h = c.orders[i + 1] - c.orders[i];
      const double f2 = std::abs(c.exponents[i + 1] - 2 * c.exponents[i] + c.exponents[i - 1]) / (h * h);
      const double f1 = std::min(c.exponents[i] - c.exponents[i - 1], c.exponents[i + 1] - c.exponents[i]) / h;
      worst = std::max(worst, h * h * f2 / 8 / f1);
    }
    return worst;
  };
  const double chord = std::max(chord_bound(tau), chord_bound(theta));
  INFO("max diff " << rep.max_abs_diff << " chord bound " << chord);
  CHECK(rep.max_abs_diff > 0);
  CHECK(rep.max_abs_diff <= chord);
  CHECK(rep.within_error_bars);

  // both directions agree on their overlap within twice the interpolation tolerance
  const auto& a = rep.tau_side;
  const auto& b = rep.theta_side;
  double worst_a = 0, worst_b = 0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (a.computed(i)) worst_a = std::max(worst_a, std::abs(a.diff(i)));
  }
  for (std::size_t i = 0; i < b.grid.size(); ++i) {
    if (b.computed(i)) worst_b = std::max(worst_b, std::abs(b.diff(i)));
  }
  double bound = 0;
  for (std::size_t i = 0; i < a.grid.size(); ++i) {
    if (a.computed(i)) bound = std::max(bound, a.rhs_stderr[i]);
  }
  for (std::size_t i = 0; i < b.grid.size(); ++i) {
    if (b.computed(i)) bound = std::max(bound, b.rhs_stderr[i]);
  }
  CHECK(std::abs(worst_a - worst_b) <= 2 * bound);
}

TEST_CASE("disjoint curves cannot be compared") {
  const auto a = make_curve({0, 1, 2}, [](double q) { return q + 100; });
  const auto b = make_curve({0, 1, 2}, [](double q) { return q + 200; });
  CHECK_THROWS_AS(mfinv::inversion_check(a, b), mfinv::InversionError);
}
