#include <cmath>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "mfinv/cascade.hpp"
#include "mfinv/grids.hpp"
#include "mfinv/partition.hpp"
#include "mfinv/pipeline.hpp"
#include "mfinv/scaling.hpp"

using Catch::Approx;
using mfinv::PartitionCurve;

namespace {

std::vector<double> log_scales(double lo, double hi, std::size_t n) {
  std::vector<double> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = lo * std::pow(hi / lo, double(j) / double(n - 1));
  return s;
}

// ln chi = slope(q) ln s + c(q), optionally bent by `kink` extra slope outside [a, b].
PartitionCurve synthetic(const std::vector<double>& orders, const std::vector<double>& scales,
                         double kink = 0.0, std::size_t a = 0, std::size_t b = 0) {
  PartitionCurve c;
  c.orders = orders;
  c.scales = scales;
  c.log_values.resize(orders.size() * scales.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    for (std::size_t j = 0; j < scales.size(); ++j) {
      double y = (orders[i] - 1) * std::log(scales[j]) + 0.3 * orders[i];
      if (kink != 0.0 && j < a) y += kink * (std::log(scales[j]) - std::log(scales[a]));
      if (kink != 0.0 && j > b) y += kink * (std::log(scales[j]) - std::log(scales[b]));
      c.at(i, j) = y;
    }
  }
  return c;
}

const std::vector<double> kAnchors{-2, 0, 2, 4};

}  // namespace

TEST_CASE("ols on exact data") {
  std::vector<double> x, y;
  for (int i = 1; i <= 8; ++i) {
    x.push_back(std::log(double(i)));
    y.push_back(1.5 * x.back() + std::log(3.0));
  }
  const auto f = mfinv::ols(x, y);
  CHECK(f.slope == Approx(1.5).margin(1e-12));
  CHECK(f.intercept == Approx(std::log(3.0)).margin(1e-12));
  CHECK(f.std_error == Approx(0.0).margin(1e-12));
  CHECK(f.r_squared == Approx(1.0).margin(1e-12));
}

TEST_CASE("ols standard error against a hand computation") {
  const std::vector<double> x{0, 1, 2, 3, 4}, y{0.1, 0.9, 2.2, 2.8, 4.1};
  const auto f = mfinv::ols(x, y);
  // sxx = 10, sxy = 9.9, residual SS computed by hand
  CHECK(f.slope == Approx(0.99));
  double ssr = 0;
  for (int i = 0; i < 5; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  CHECK(f.std_error == Approx(std::sqrt(ssr / 3 / 10)));
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(mfinv::ols(one, one), mfinv::FitError);
  const std::vector<double> same{2, 2, 2}, three{1, 2, 3};
  CHECK_THROWS_AS(mfinv::ols(same, three), mfinv::FitError);
}

TEST_CASE("fit_power_law on exact synthetic data") {
  const auto c = synthetic({-1, 0, 1, 2.5}, log_scales(1, 1000, 12));
  const auto f = mfinv::fit_power_law(c, 2.5);
  CHECK(f.slope == Approx(1.5).margin(1e-12));
  CHECK(f.intercept == Approx(0.75).margin(1e-10));
  CHECK(f.std_error == Approx(0.0).margin(1e-10));
  CHECK(f.r_squared == Approx(1.0));
  CHECK(f.n_points == 12);
  CHECK(f.range_lo == Approx(1));
  CHECK(f.range_hi == Approx(1000));

  const auto sub = mfinv::fit_power_law(c, 2.5, mfinv::ScaleRange{5, 300});
  CHECK(sub.n_points < 12);
  CHECK(sub.range_lo >= 5);
  CHECK(sub.range_hi <= 300);
  CHECK_THROWS_AS(mfinv::fit_power_law(c, 2.5, mfinv::ScaleRange{5, 20}), mfinv::FitError);
  CHECK_THROWS_AS(mfinv::fit_power_law(c, 7.0), mfinv::FitError);
}

TEST_CASE("fit_power_law is invariant to rescaling chi") {
  auto c = synthetic({2}, log_scales(1, 100, 15));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0, 0.05);
  for (double& y : c.log_values) y += nd(rng);
  const auto a = mfinv::fit_power_law(c, 2);
  for (double& y : c.log_values) y += std::log(17.0);
  const auto b = mfinv::fit_power_law(c, 2);
  CHECK(std::abs(a.slope - b.slope) <= 1e-12);
  CHECK(b.intercept == Approx(a.intercept + std::log(17.0)));
}

TEST_CASE("stderr stays zero as exact points are added") {
  const auto c = synthetic({3}, log_scales(1, 1000, 30));
  for (std::size_t hi = 5; hi < 30; ++hi) {
    const auto f = mfinv::fit_power_law(c, 3, mfinv::ScaleRange{c.scales[0], c.scales[hi]});
    CHECK(f.std_error <= 1e-10);
  }
}

TEST_CASE("missing cells are skipped, not imputed") {
  auto c = synthetic({-1}, log_scales(1, 1000, 12));
  c.at(0, 3) = std::nan("");
  c.at(0, 7) = std::nan("");
  const auto f = mfinv::fit_power_law(c, -1);
  CHECK(f.n_points == 10);
  CHECK(f.slope == Approx(-2).margin(1e-12));
}

TEST_CASE("conservation columns on a cascade") {
  const auto g = mfinv::generate_cascade({{0.7, 0.3}, {0.5, 0.5}}, 12);
  const auto vol = mfinv::VolatilitySeries::from_values(g.weights);
  const auto boxes = mfinv::box_size_grid(vol.size());
  const auto q = mfinv::order_grid(-4, 8, 0.25);
  const auto c = mfinv::direct_partition(vol, boxes, q);
  CHECK(mfinv::fit_power_law(c, 1).slope == Approx(0).margin(1e-9));
  CHECK(mfinv::fit_power_law(c, 0).slope == Approx(-1).margin(1e-9));
  const auto f4 = mfinv::fit_power_law(c, 4);
  CHECK(f4.slope == Approx(-std::log2(std::pow(0.7, 4) + std::pow(0.3, 4))).margin(1e-6));
  CHECK(f4.slope == Approx(2.0104).margin(1e-4));

  const auto e = mfinv::exponent_curve(c, {boxes.front(), boxes.back()});
  REQUIRE(e.size() == q.size());
  for (std::size_t i = 1; i < e.size(); ++i) CHECK(e.exponents[i] > e.exponents[i - 1]);
  CHECK(e.exponents[*c.order_index(0)] == Approx(-1).margin(1e-9));
}

TEST_CASE("range detection returns the full range of an exact power law") {
  const auto c = synthetic(mfinv::order_grid(-4, 8, 1), log_scales(1, 1000, 20));
  const auto r = mfinv::detect_scaling_range(c, kAnchors);
  CHECK(r.lo == Approx(1));
  CHECK(r.hi == Approx(1000));
  CHECK(r.mean_r2 == Approx(1.0));
}

TEST_CASE("range detection cuts off kinked ends") {
  const auto s = log_scales(1, 1000, 20);
  const auto c = synthetic(mfinv::order_grid(-4, 8, 1), s, 1.0, 3, 16);
  const auto r = mfinv::detect_scaling_range(c, kAnchors);
  CHECK(r.lo == Approx(s[3]));
  CHECK(r.hi == Approx(s[16]));
}

TEST_CASE("range detection on cascade data keeps the whole dyadic range") {
  const auto g = mfinv::generate_cascade({{0.6, 0.4}, {0.5, 0.5}}, 14);
  const auto vol = mfinv::VolatilitySeries::from_values(g.weights);
  const auto boxes = mfinv::box_size_grid(vol.size());
  const auto c = mfinv::direct_partition(vol, boxes, mfinv::order_grid(-4, 8, 0.25));
  const auto r = mfinv::detect_scaling_range(c, kAnchors);
  CHECK(r.lo == Approx(double(boxes.front())));
  CHECK(r.hi == Approx(double(boxes.back())));
}

TEST_CASE("range detection errors") {
  const auto few = synthetic({0, 2}, log_scales(1, 1000, 9));
  CHECK_THROWS_AS(mfinv::detect_scaling_range(few, kAnchors), mfinv::FitError);
  const auto narrow = synthetic({0, 2}, log_scales(1, 10, 20));
  CHECK_THROWS_AS(mfinv::detect_scaling_range(narrow, kAnchors), mfinv::FitError);
  auto noise = synthetic({0, 2}, log_scales(1, 1000, 20));
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd(0, 3);
  for (std::size_t j = 0; j < 20; ++j) {
    noise.at(0, j) = nd(rng);
    noise.at(1, j) = nd(rng);
  }
  CHECK_THROWS_AS(mfinv::detect_scaling_range(noise, kAnchors), mfinv::FitError);
}

TEST_CASE("exponent_curve drops orders that cannot be fitted") {
  auto c = synthetic({0, 1, 2}, log_scales(1, 1000, 8));
  for (std::size_t j = 0; j < 5; ++j) c.at(0, j) = std::nan("");
  const auto e = mfinv::exponent_curve(c, {1, 1000});
  CHECK(e.orders == std::vector<double>{1, 2});
  CHECK(e.warnings.size() == 1);
}

TEST_CASE("range consistency") {
  const double vm = 2.69e-4;
  auto r = mfinv::check_range_consistency({10, 1e4}, {10 * vm, 1e4 * vm}, vm);
  CHECK(r.lower_ratio == Approx(1));
  CHECK(r.upper_ratio == Approx(1));
  CHECK(r.consistent);
  r = mfinv::check_range_consistency({10, 1e4}, {1 * vm, 1e4 * vm}, vm);
  CHECK(r.lower_ratio == Approx(0.1));
  CHECK_FALSE(r.lower_ok);
  CHECK(r.upper_ok);
  CHECK_FALSE(r.consistent);
  CHECK(mfinv::check_range_consistency({10, 100}, {30 * vm, 100 * vm / 3}, vm).consistent);
  CHECK_THROWS_AS(mfinv::check_range_consistency({10, 100}, {1, 2}, 0), mfinv::ValidationError);
}

TEST_CASE("cascade direct and inverse ranges are consistent") {
  const auto g = mfinv::generate_cascade({{0.6, 0.4}, {0.5, 0.5}}, 14);
  const auto vol = mfinv::VolatilitySeries::from_values(g.weights);
  const mfinv::PipelineOptions opt;
  const auto d = mfinv::run_direct(vol, opt);
  const auto i = mfinv::run_inverse(vol, opt);
  CHECK(mfinv::check_range_consistency(d.range, i.range, vol.mean).consistent);
}

TEST_CASE("legendre spectrum") {
  mfinv::ExponentCurve uniform;
  uniform.orders = mfinv::order_grid(-4, 8, 0.25);
  for (double q : uniform.orders) uniform.exponents.push_back(q - 1);
  uniform.stderrs.assign(uniform.orders.size(), 0);
  for (const auto& p : mfinv::legendre_spectrum(uniform)) {
    CHECK(p.alpha == Approx(1).margin(1e-12));
    CHECK(p.f == Approx(1).margin(1e-12));
  }

  const mfinv::CascadeSpec spec{{0.6, 0.4}, {0.5, 0.5}};
  mfinv::ExponentCurve b;
  b.orders = mfinv::order_grid(-40, 40, 0.25);
  for (double q : b.orders) b.exponents.push_back(mfinv::analytic_tau(spec, q));
  b.stderrs.assign(b.orders.size(), 0);
  const auto sp = mfinv::legendre_spectrum(b);
  double amin = 1e9, amax = -1e9, fmax = -1e9;
  for (const auto& p : sp) {
    amin = std::min(amin, p.alpha);
    amax = std::max(amax, p.alpha);
    fmax = std::max(fmax, p.f);
  }
  CHECK(amin >= -std::log2(0.6) - 1e-9);
  CHECK(amax <= -std::log2(0.4) + 1e-9);
  CHECK(amin == Approx(-std::log2(0.6)).margin(1e-3));
  CHECK(amax == Approx(-std::log2(0.4)).margin(1e-3));
  CHECK(fmax == Approx(-mfinv::analytic_tau(spec, 0)).margin(1e-9));
}
