#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "relaysec/numerics.hpp"

using namespace relaysec::numerics;

namespace {
// reference values from mpmath at 30 digits
struct Ref {
  double x;
  double y;
};
const Ref kErfcx[] = {
    {-1.0, 5.0089800807622834663},   {0.3, 0.73459933456765514229},   {1.0, 0.42758357615580700441},
    {3.0, 0.17900115118138995042},   {4.0, 0.13699945762506138989},   {5.0, 0.11070463773306862637},
    {7.5, 0.074573693062876683005},  {20.0, 0.028174348741051319319}, {100.0, 0.0056416137829894329036},
    {1e6, 5.6418958354747419216e-7},
};
const Ref kLambert[] = {
    {1.0, 0.567143290409783873},
    {-0.3, -0.48940222718021493357},
    {1e6, 11.383358086140052622},
    {4000.0, 6.4326612995288778144},
};
}  // namespace

TEST_CASE("erfc_scaled matches reference values") {
  for (const auto& r : kErfcx) {
    CAPTURE(r.x);
    CHECK(erfc_scaled(r.x) == doctest::Approx(r.y).epsilon(1e-13));
  }
  CHECK(erfc_scaled(0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("exp_times_erfc stays finite where the factors do not") {
  // exp(900) overflows, erfc(30) underflows, product is fine
  double v = exp_times_erfc(900.0, 30.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(std::exp(900.0 - 900.0) * erfc_scaled(30.0)).epsilon(1e-13));
  CHECK(exp_times_erfc(0.0, 0.5) == doctest::Approx(std::erfc(0.5)).epsilon(1e-14));
  CHECK(exp_times_erfc(2.0, -1.5) == doctest::Approx(std::exp(2.0) * std::erfc(-1.5)).epsilon(1e-13));
}

TEST_CASE("lambert_w0 matches reference values and inverts w e^w") {
  for (const auto& r : kLambert) {
    CAPTURE(r.x);
    CHECK(lambert_w0(r.x) == doctest::Approx(r.y).epsilon(1e-14));
  }
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(-kInvE) == doctest::Approx(-1.0).epsilon(1e-6));
  for (double x : {-0.2, 0.01, 2.5, 77.0, 1e10}) {
    double w = lambert_w0(x);
    CHECK(w * std::exp(w) == doctest::Approx(x).epsilon(1e-13));
  }
  CHECK_THROWS_AS(lambert_w0(-0.5), std::domain_error);
  CHECK_THROWS_AS(lambert_w0(std::nan("")), std::domain_error);
}

TEST_CASE("adaptive quadrature") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, M_PI) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return 1.0 / x; }, 1.0, 16.0) == doctest::Approx(std::log(16.0)).epsilon(1e-12));
  // integrable endpoint singularity
  QuadratureSpec loose{1e-9, 1e-9, 500};
  CHECK(integrate([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, loose) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(integrate([](double x) { return x; }, 2.0, 2.0) == 0.0);

  QuadratureSpec tight{1e-30, 1e-30, 2};
  CHECK_THROWS_AS(integrate([](double x) { return std::cos(40 * x); }, 0.0, 10.0, tight), QuadratureError);
  try {
    integrate([](double x) { return std::cos(40 * x); }, 0.0, 10.0, tight);
  } catch (const QuadratureError& e) {
    CHECK(std::isfinite(e.estimate()));
    CHECK(e.error_bound() > 0.0);
  }
  CHECK_THROWS_AS((QuadratureSpec{-1.0, 1e-8, 10}.validate()), std::invalid_argument);
}

TEST_CASE("random streams are reproducible and separated") {
  RandomStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  std::vector<std::uint64_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
  CHECK(a.counter() == 64);

  RandomStream s(7);
  CHECK(s.substream(1).key() == RandomStream(7).substream(1).key());
  CHECK(s.substream(1).key() != s.substream(2).key());

  std::set<std::uint64_t> seen(va.begin(), va.end());
  CHECK(seen.size() == va.size());
}

TEST_CASE("uniforms and exponential draws") {
  RandomStream r(1);
  double sum = 0.0, sum_exp = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform_open_closed();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    double v = r.uniform();
    REQUIRE(v >= 0.0);
    REQUIRE(v < 1.0);
    sum += v;
    sum_exp += sample_exponential(2.5, r);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_exp / n == doctest::Approx(2.5).epsilon(0.02));
  CHECK(exponential_from_uniform(3.0, 1.0) == 0.0);
  CHECK(exponential_from_uniform(1.0, std::exp(-2.0)) == doctest::Approx(2.0));
}

TEST_CASE("lambert_w0 round trip over random arguments") {
  RandomStream r(99);
  for (int i = 0; i < 1000; ++i) {
    // half near the branch point, half spread log-uniformly up to 1e6
    double x = i % 2 ? -kInvE + (kInvE + 1.0) * r.uniform() : std::pow(10.0, 6.0 * r.uniform());
    double w = lambert_w0(x);
    REQUIRE(std::abs(w * std::exp(w) - x) <= 1e-10 * std::max(1.0, std::abs(x)));
  }
}
