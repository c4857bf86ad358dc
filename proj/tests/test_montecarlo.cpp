#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "relaysec/analytic.hpp"
#include "relaysec/channel.hpp"
#include "relaysec/montecarlo.hpp"

using namespace relaysec;
using namespace relaysec::mc;

namespace {

McConfig config(std::uint64_t n, std::uint64_t seed, unsigned workers = 1) {
  McConfig c;
  c.n_samples = n;
  c.seed = seed;
  c.workers = workers;
  c.theta_grid = {0.1, 0.5, 1.0};
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  McConfig c;
  CHECK_NOTHROW(c.validate());
  c.n_samples = 999;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = McConfig{};
  c.theta_grid = {};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.theta_grid = {0.0};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.theta_grid = {1.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("simulation matches a direct per-sample computation") {
  auto p = SystemParams::epa(1000.0, 0.5, 1.0);
  p.rt = 1.3;
  const std::uint64_t n = 100000;  // spans two chunks, the second partial
  auto r = simulate(p, config(n, 17));

  std::vector<double> g_sr(kChunkSize), g_rd(kChunkSize);
  std::uint64_t out01 = 0, out1 = 0, ok = 0;
  double dsum = 0.0;
  for (std::uint64_t c = 0, done = 0; done < n; ++c) {
    std::uint64_t m = std::min<std::uint64_t>(kChunkSize, n - done);
    draw_chunk(p, 17, c, std::span(g_sr).first(m), std::span(g_rd).first(m));
    for (std::uint64_t i = 0; i < m; ++i) {
      auto s = link_sinrs(p, {g_sr[i], g_rd[i]});
      double d = fractional_equivocation(s, p.rs);
      out01 += d < 0.1;
      out1 += d < 1.0;
      ok += 0.5 * std::log2(1.0 + s.gamma_d) >= p.rt;
      dsum += d;
    }
    done += m;
  }
  CHECK(r.n_samples == n);
  CHECK(r.gsop.at(0.1).value == doctest::Approx(double(out01) / n).epsilon(1e-12));
  CHECK(r.gsop.at(1.0).value == doctest::Approx(double(out1) / n).epsilon(1e-12));
  CHECK(r.afe.value == doctest::Approx(dsum / n).epsilon(1e-10));
  CHECK(r.ailr.value == doctest::Approx((1.0 - dsum / n) * p.rs).epsilon(1e-10));
  // decoding threshold ties are measure-zero, allow one sample of slack
  CHECK(std::abs(r.throughput.value - p.rs * double(ok) / n) <= 1.0 / n);
}

TEST_CASE("draws follow the exponential means") {
  SystemParams p;
  p.omega_sr = 4.0;
  p.omega_rd = 0.25;
  std::vector<double> a(kChunkSize), b(kChunkSize);
  draw_chunk(p, 1, 0, a, b);
  double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  CHECK(sa / a.size() == doctest::Approx(4.0).epsilon(0.02));
  CHECK(sb / b.size() == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("results depend on seed only, not on worker count") {
  auto p = SystemParams::epa(1000.0, 0.3, 0.8);
  auto a = simulate(p, config(300000, 5, 1));
  auto b = simulate(p, config(300000, 5, 4));
  auto c = simulate(p, config(300000, 5, 3));
  auto d = simulate(p, config(300000, 6, 1));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(!(a == d));
}

TEST_CASE("estimator invariants") {
  for (double rs : {0.3, 1.0, 2.5}) {
    CAPTURE(rs);
    auto p = SystemParams::epa(300.0, 0.5, rs);
    auto cfg = config(200000, 2);
    cfg.theta_grid = {0.05, 0.1, 0.2, 0.5, 0.7, 1.0};
    auto r = simulate(p, cfg);
    double prev = 0.0;
    for (auto& [th, e] : r.gsop) {
      CHECK(e.value >= prev);
      prev = e.value;
    }
    // Delta = 1 forces Delta >= theta for every theta, so AFE >= 1 - GSOP(1)
    CHECK(r.afe.value >= 1.0 - r.gsop.at(1.0).value - 1e-12);
    CHECK(r.afe.value <= 1.0);
    CHECK(r.throughput.value <= rs);
  }
}

TEST_CASE("empirical CDF shares the sample set with simulate") {
  auto p = SystemParams::epa(1000.0, 0.5, 1.0);
  auto cfg = config(100000, 8);
  auto r = simulate(p, cfg);
  std::vector<double> grid{0.0, 1.0, std::pow(2.0, 0.2), 2.0, 4.0};
  auto cdf = empirical_cdf_phi(p, grid, cfg);
  REQUIRE(cdf.size() == grid.size());
  CHECK(cdf[0].estimate.value == 0.0);
  for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i].estimate.value >= cdf[i - 1].estimate.value);
  // Pr(phi <= x) and Pr(phi < x) coincide for a continuous distribution
  CHECK(cdf[2].estimate.value == doctest::Approx(r.gsop.at(0.1).value).epsilon(1e-12));
  CHECK(cdf[4].estimate.value == doctest::Approx(r.gsop.at(1.0).value).epsilon(1e-12));
  std::vector<double> unsorted{2.0, 1.0};
  CHECK_THROWS_AS(empirical_cdf_phi(p, unsorted, cfg), std::invalid_argument);
  std::vector<double> negative{-1.0, 1.0};
  CHECK_THROWS_AS(empirical_cdf_phi(p, negative, cfg), std::invalid_argument);
}

TEST_CASE("very high secrecy rate saturates") {
  auto p = SystemParams::epa(1000.0, 0.5, 200.0);
  auto r = simulate(p, config(50000, 1));
  CHECK(r.afe.value < 0.05);
  CHECK(r.gsop.at(1.0).value == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.throughput.value == 0.0);
}

TEST_CASE("confidence interval shrinks as 1/sqrt(n)") {
  auto p = SystemParams::epa(100.0, 0.5, 1.0);
  auto a = simulate(p, config(200000, 4));
  auto b = simulate(p, config(800000, 4));
  double ratio = a.gsop.at(1.0).half_width / b.gsop.at(1.0).half_width;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
  ratio = a.afe.half_width / b.afe.half_width;
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));
  double g = a.gsop.at(1.0).value;
  CHECK(a.gsop.at(1.0).half_width == doctest::Approx(1.96 * std::sqrt(g * (1 - g) / 200000)));
}

TEST_CASE("accumulator edge cases") {
  McAccumulator acc(1.0, 1.0, {0.5, 1.0});
  std::vector<double> phi(2000, 16.0), gd(2000, 1e6);
  acc.add_batch(phi, gd);
  auto r = acc.report(0);
  CHECK(r.afe.value == 1.0);
  CHECK(r.ailr.value == 0.0);
  CHECK(r.gsop.at(1.0).value == 0.0);
  CHECK(r.throughput.value == 1.0);

  McAccumulator a(1.0, 1.0, {1.0}), b(1.0, 1.0, {1.0}), whole(1.0, 1.0, {1.0});
  std::vector<double> p1{1.0, 2.0, 3.0}, g1{0.1, 5.0, 2.0};
  std::vector<double> p2{4.5, 0.9}, g2{3.1, 2.9};
  a.add_batch(p1, g1);
  b.add_batch(p2, g2);
  a.merge(b);
  whole.add_batch(p1, g1);
  whole.add_batch(p2, g2);
  CHECK(a.count() == 5);
  CHECK(a.report(0) == whole.report(0));
  // success needs gamma_d >= 2^{2 rt} - 1 = 3
  CHECK(whole.report(0).throughput.value == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("closed form tracks simulation at 30 dB") {
  auto p = SystemParams::epa(1000.0, 0.5, 1.0);
  auto r = simulate(p, config(1000000, 1));
  for (double th : {0.1, 0.5, 1.0}) {
    CAPTURE(th);
    CHECK(std::abs(analytic::gsop(p, th) - r.gsop.at(th).value) <= 0.02);
  }
  CHECK(std::abs(analytic::afe(p) - r.afe.value) <= 0.01);
}
