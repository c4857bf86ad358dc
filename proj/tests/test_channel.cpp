#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "relaysec/channel.hpp"
#include "relaysec/numerics.hpp"

using namespace relaysec;

TEST_CASE("transmit SNRs split the budget") {
  SystemParams p;
  p.gamma_p = 999.0;
  auto s = transmit_snrs(p);
  CHECK(s.source == doctest::Approx(333.0));
  CHECK(s.relay == doctest::Approx(333.0));
  CHECK(s.destination == doctest::Approx(333.0));

  p.gamma_p = 1000.0;
  p.eta1 = 0.5;
  p.eta2 = 0.25;
  p.eta3 = 0.25;
  s = transmit_snrs(p);
  CHECK(s.source == 500.0);
  CHECK(s.relay == 250.0);
  CHECK(s.destination == 250.0);
}

TEST_CASE("epa and relay placement") {
  auto p = SystemParams::epa(db_to_linear(30.0), 0.5, 1.0);
  CHECK(p.gamma_p == doctest::Approx(1000.0));
  CHECK(p.omega_sr == doctest::Approx(16.0));
  CHECK(p.omega_rd == doctest::Approx(16.0));
  CHECK(p.eta1 + p.eta2 + p.eta3 == doctest::Approx(1.0));
  CHECK(p.violation().empty());
  p.place_relay(0.2);
  CHECK(p.omega_sr == doctest::Approx(std::pow(0.2, -4.0)));
  CHECK(p.omega_rd == doctest::Approx(std::pow(0.8, -4.0)));
  CHECK(linear_to_db(db_to_linear(17.5)) == doctest::Approx(17.5));
}

TEST_CASE("SINRs for a hand-worked realization") {
  SystemParams p;
  p.gamma_p = 30.0;  // 10 each
  ChannelRealization c{2.0, 0.5};
  auto s = link_sinrs(p, c);
  // gamma_r = 20/(5+1); gamma_d = 20*5/(20+5+5+1)
  CHECK(s.gamma_r == doctest::Approx(20.0 / 6.0));
  CHECK(s.gamma_d == doctest::Approx(100.0 / 31.0));
  CHECK(s.phi() == doctest::Approx((1 + 100.0 / 31.0) / (1 + 20.0 / 6.0)));
  auto cap = capacities(s);
  CHECK(cap.legitimate == doctest::Approx(0.5 * std::log2(1 + 100.0 / 31.0)));
  CHECK(cap.eavesdropper == doctest::Approx(0.5 * std::log2(1 + 20.0 / 6.0)));
  CHECK(amplification_factor(p, c, 1.0) == doctest::Approx(1.0 / std::sqrt(20.0 + 5.0 + 1.0)));
  CHECK_THROWS_AS(amplification_factor(p, c, 0.0), std::domain_error);
}

TEST_CASE("destination SINR never exceeds the harmonic-mean bound") {
  numerics::RandomStream rng(5);
  for (int i = 0; i < 20000; ++i) {
    SystemParams p;
    p.gamma_p = std::pow(10.0, 5.0 * rng.uniform());
    double a = rng.uniform() + 1e-3, b = rng.uniform() + 1e-3, c = rng.uniform() + 1e-3;
    p.eta1 = a / (a + b + c);
    p.eta2 = b / (a + b + c);
    p.eta3 = 1.0 - p.eta1 - p.eta2;
    ChannelRealization h{numerics::sample_exponential(3.0, rng), numerics::sample_exponential(0.7, rng)};
    auto s = link_sinrs(p, h);
    REQUIRE(s.gamma_d <= gamma_d_upper_bound(p, h) * (1 + 1e-12));
  }
}

TEST_CASE("fractional equivocation clamps to [0, 1]") {
  CHECK(fractional_equivocation_from_phi(0.5, 1.0) == 0.0);
  CHECK(fractional_equivocation_from_phi(1.0, 1.0) == 0.0);
  CHECK(fractional_equivocation_from_phi(2.0, 1.0) == doctest::Approx(0.5));
  CHECK(fractional_equivocation_from_phi(4.0, 1.0) == 1.0);
  CHECK(fractional_equivocation_from_phi(1e9, 1.0) == 1.0);
  CHECK_THROWS_AS(fractional_equivocation_from_phi(2.0, 0.0), std::domain_error);
}

TEST_CASE("validation names the broken invariant") {
  auto msg = [](SystemParams p) { return p.violation(); };
  SystemParams ok;
  CHECK(msg(ok).empty());
  CHECK_NOTHROW(ok.validate());

  SystemParams p = ok;
  p.eta1 = p.eta2 = p.eta3 = 0.2;
  CHECK(msg(p).find("eta sum") != std::string::npos);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = ok;
  p.gamma_p = 0.0;
  CHECK(msg(p).find("gamma_p") != std::string::npos);
  p = ok;
  p.eta3 = 0.0;
  p.eta2 = 2.0 / 3.0;
  CHECK(msg(p).find("eta values") != std::string::npos);
  p = ok;
  p.rs = -1.0;
  CHECK(msg(p).find("rs must") != std::string::npos);
  p = ok;
  p.rs = 2.0;
  p.rt = 1.0;
  CHECK(msg(p).find("rt >= rs") != std::string::npos);
  p = ok;
  p.omega_sr = 0.0;
  CHECK(msg(p).find("omega") != std::string::npos);
  p = ok;
  p.d = 1.2;
  CHECK(msg(p).find("d must") != std::string::npos);
  p = ok;
  p.d = 0.3;  // omegas still 16
  CHECK(msg(p).find("inconsistent") != std::string::npos);
}
