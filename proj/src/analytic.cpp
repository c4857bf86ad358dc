#include "relaysec/analytic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace relaysec::analytic {

namespace {

std::atomic<std::uint64_t> g_clamp_warnings{0};

void require_phi(double phi) {
  if (!(phi >= 1.0)) {
    std::ostringstream msg;
    msg << "cdf_phi: phi must be >= 1 (got " << phi << ")";
    throw std::domain_error(msg.str());
  }
}

void require_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    std::ostringstream msg;
    msg << "theta must lie in (0, 1] (got " << theta << ")";
    throw std::domain_error(msg.str());
  }
}

double sq(double x) { return x * x; }

double tau_of(const SystemParams& p, double theta) { return std::exp2(2.0 * p.rs * theta); }

// Exponent c in T = rs * exp(-(2^{2 rt} - 1) c).
double throughput_rate(const SystemParams& p) {
  return (p.eta1 * p.omega_sr + p.omega_rd * (p.eta2 + p.eta3)) /
         (p.gamma_p * p.eta1 * p.eta2 * p.omega_rd * p.omega_sr);
}

}  // namespace

PsiSet psi_set(const SystemParams& p, double t) {
  const double gp = p.gamma_p;
  const double e1 = p.eta1;
  const double e2 = p.eta2;
  const double e3 = p.eta3;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;
  const double e23 = e2 + e3;

  PsiSet s;
  s.psi1 = std::sqrt(sq(e23) *
                     (sq(e2) * sq(t - 1.0) + 2.0 * e2 * e3 * (2.0 * t * t - t - 1.0) + sq(e3) * sq(1.0 - 2.0 * t)) /
                     (sq(gp) * sq(e1) * sq(e2) * sq(e3)));
  s.psi2 = sq(e2) * (2.0 * t * t - 2.0 * t + 1.0) + sq(e3) * (5.0 * t * t - 4.0 * t + 1.0) +
           2.0 * e2 * e3 * (3.0 * t * t - t + gp * e1 * t * s.psi1 - 1.0);
  s.psi3 = 1.0 / (2.0 * ord * std::sqrt(gp * e1 * e2 * e3 * t * osr));
  s.psi4 = (t - 1.0) * e23 / (gp * e1 * e2 * osr);

  const double d5 = 2.0 * gp * e1 * e2 * e3 * osr;
  s.psi5 = e23 * std::sqrt(-2.0 * t * (sq(e2) + e2 * e3 + 2.0 * sq(e3)) + t * t * sq(e2 + 2.0 * e3) + sq(e2 - e3)) / d5 +
           e23 * (e2 * (t - 1.0) + e3 * (2.0 * t - 1.0)) / d5;

  // The published form writes a bare (tau - 1) in the first fraction; tau_1
  // is the only tau in scope.
  const double d6 = 4.0 * gp * e1 * e2 * e3 * t * sq(ord) * osr;
  s.psi6 = (2.0 * e2 * ord * (e1 * t * osr + e3 * (t - 1.0) * ord) + sq(e2) * sq(ord)) / d6 +
           sq(e1 * t * osr + e3 * (1.0 - t) * ord) / d6;

  const double d7 = 2.0 * gp * e1 * e2 * e3 * ord * osr;
  s.psi7 = (e1 * osr * (e2 - e3 * t + e3) - e1 * (gp * e2 * e3 * ord * s.psi1 + osr * std::sqrt(s.psi2))) / d7 +
           ord * (-e2 - e3) * (e2 * (t - 1.0) + e3 * (2.0 * t - 1.0)) / d7;

  s.psi8 = (sq(e2) * (t - 1.0) + sq(e3) * (2.0 * t - 1.0) + e2 * e3 * (3.0 * t + gp * e1 * s.psi1 - 2.0)) /
           (2.0 * gp * e1 * e2 * e3 * osr);
  return s;
}

PhiTermBreakdown phi_terms(const SystemParams& p, double phi) {
  require_phi(phi);
  const auto snr = transmit_snrs(p);
  const double gs = snr.source;
  const double gr = snr.relay;
  const double gd = snr.destination;
  const double gp = p.gamma_p;
  const double e1 = p.eta1;
  const double e2 = p.eta2;
  const double e3 = p.eta3;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;
  const double e23 = e2 + e3;
  const double a = e1 * osr + ord * e23;

  // g_SR thresholds bounding the integration regions.
  const double x0 = (gr + gd) * (phi - 1.0) / (gs * gr);
  const double k2 = 2.0 * sq(gd) + 3.0 * gd * gr + sq(gr);
  const double x1 =
      (phi * k2 - sq(gd + gr)) / (2.0 * gd * gr * gs) +
      0.5 * std::sqrt((sq(phi) * sq(k2) - 2.0 * phi * (2.0 * sq(gd) + gd * gr + sq(gr)) * sq(gd + gr) +
                       sq(sq(gd) - sq(gr))) /
                      (sq(gd) * sq(gr) * sq(gs)));
  const double psi4 = x0 / osr;
  const double psi5 = x1 / osr;
  const double phi4 = sq(e2) + sq(e3) * sq(phi - 1.0) + 2.0 * e2 * e3 * (2.0 * gp * e1 * x1 * phi + phi - 1.0);

  const double share = ord * e23 / a;
  const double tail_x0 = std::exp(-(phi - 1.0) * a / (gp * e1 * e2 * ord * osr));

  PhiTermBreakdown t;
  t.t1 = -share * (tail_x0 - 1.0);
  t.t2 = (std::exp(-psi5) - std::exp(-psi4)) * std::exp(-e1 * osr * psi5 / (ord * e23)) +
         share * (tail_x0 - std::exp(-psi5 * a / (ord * e23)));
  t.t3 = share * (std::exp(-x1 * a / (e23 * ord * osr)) - 1.0) - std::exp(-x1 / osr) + 1.0;

  const double root = std::sqrt(gp * e1 * e2 * e3 * phi * osr);
  const double psi6 = psi_set(p, phi).psi6;
  const double z = (e1 * phi * osr + ord * std::sqrt(phi4)) / (2.0 * ord * root);
  t.t4 = numerics::kSqrtPi * e1 * phi * osr / (2.0 * ord * root) * numerics::exp_times_erfc(psi6, z) +
         std::exp(-x1 / osr) * (1.0 - std::exp((e2 - e3 * phi + e3 - std::sqrt(phi4)) / (2.0 * gp * e2 * e3 * ord)));
  return t;
}

double cdf_phi_unclamped(double phi, const SystemParams& p) {
  require_phi(phi);
  const PsiSet s = psi_set(p, phi);
  const double e1 = p.eta1;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;

  // exp(psi6) * erfc(z) is formed in log space: psi6 and z^2 both grow large
  // together at low SNR.
  const double z = s.psi3 * (e1 * phi * osr + ord * std::sqrt(s.psi2));
  const double erfc_term = numerics::kSqrtPi * e1 * phi * osr * s.psi3 * numerics::exp_times_erfc(s.psi6, z);
  return erfc_term - std::exp(-s.psi5) +
         (std::exp(-s.psi5) - std::exp(-s.psi4)) * std::exp(-e1 * osr * s.psi5 / (ord * (p.eta2 + p.eta3))) -
         std::exp(s.psi7) + std::exp(-s.psi8) + 1.0;
}

double cdf_phi(double phi, const SystemParams& p) {
  const double raw = cdf_phi_unclamped(phi, p);
  if (raw < 0.0 || raw > 1.0 || std::isnan(raw)) {
    g_clamp_warnings.fetch_add(1, std::memory_order_relaxed);
    if (std::isnan(raw)) {
      throw std::range_error("cdf_phi: closed form evaluated to NaN");
    }
    return std::clamp(raw, 0.0, 1.0);
  }
  return raw;
}

std::uint64_t clamp_warning_count() noexcept { return g_clamp_warnings.load(std::memory_order_relaxed); }
void reset_clamp_warning_count() noexcept { g_clamp_warnings.store(0, std::memory_order_relaxed); }

double gsop(const SystemParams& p, double theta) {
  require_theta(theta);
  return cdf_phi(tau_of(p, theta), p);
}

double afe(const SystemParams& p, const numerics::QuadratureSpec& spec) {
  const double upper = std::exp2(2.0 * p.rs);
  const double integral = numerics::integrate([&](double x) { return cdf_phi(x, p) / x; }, 1.0, upper, spec);
  return 1.0 - integral / (2.0 * p.rs * numerics::kLn2);
}

double afe_literal(const SystemParams& p, const numerics::QuadratureSpec& spec) {
  const double upper = std::pow(2.0, 2.0 * p.rs);
  const double ln2_2rs = std::log(2.0) * 2.0 * p.rs;
  const double integral = numerics::integrate([&](double x) { return cdf_phi(x, p) / x; }, 1.0, upper, spec);
  return 1.0 - (1.0 - std::log(upper) / ln2_2rs) * cdf_phi(upper, p) -
         (std::log(1.0) * cdf_phi(1.0, p) + integral) / ln2_2rs;
}

double ailr(const SystemParams& p, const numerics::QuadratureSpec& spec) { return (1.0 - afe(p, spec)) * p.rs; }

double gsop_asymptotic_leading(const SystemParams& p, double theta) {
  require_theta(theta);
  const double t = tau_of(p, theta);
  return std::sqrt(M_PI * p.eta1 * t * p.omega_sr / (4.0 * p.gamma_p * p.eta2 * p.eta3 * sq(p.omega_rd)));
}

double gsop_asymptotic(const SystemParams& p, double theta) {
  const double t = tau_of(p, theta);
  const double e1 = p.eta1;
  const double e2 = p.eta2;
  const double e3 = p.eta3;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;
  return gsop_asymptotic_leading(p, theta) +
         (2.0 * (1.0 - e1) * e3 * (t - 1.0) * ord + e1 * osr * (e1 + e3 * t - 1.0)) /
             (2.0 * p.gamma_p * e1 * e2 * e3 * ord * osr);
}

double afe_asymptotic(const SystemParams& p) {
  const double gp = p.gamma_p;
  const double e1 = p.eta1;
  const double e2 = p.eta2;
  const double e3 = p.eta3;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;
  const double upper = std::exp2(2.0 * p.rs);
  // Both logarithms of 2^{2 rs} are natural; this matches term-by-term
  // integration of gsop_asymptotic over [1, 2^{2 rs}].
  const double ln_upper = std::log(upper);
  const double bracket =
      -2.0 * numerics::kSqrtPi * std::sqrt(gp) * std::pow(e1, 1.5) * std::sqrt(e2) * std::sqrt(e3) *
          (std::sqrt(upper) - 1.0) * std::pow(osr, 1.5) +
      ln_upper * (2.0 * e3 * ord * (gp * e1 * e2 * osr - e1 + 1.0) - (e1 - 1.0) * e1 * osr) +
      e3 * (upper - 1.0) * (2.0 * (e1 - 1.0) * ord - e1 * osr);
  return bracket / (2.0 * gp * e1 * e2 * e3 * ord * osr * ln_upper);
}

double ailr_asymptotic(const SystemParams& p) { return (1.0 - afe_asymptotic(p)) * p.rs; }

double throughput(const SystemParams& p) {
  return p.rs * std::exp(-(std::exp2(2.0 * p.rt) - 1.0) * throughput_rate(p));
}

double throughput_product_form(const SystemParams& p) {
  const auto snr = transmit_snrs(p);
  const double tau2 = std::exp2(2.0 * p.rt) - 1.0;
  const double x_sr = tau2 * (snr.relay + snr.destination) / (snr.relay * snr.source);
  const double x_rd = tau2 / snr.relay;
  const double survive_sr = std::exp(-x_sr / p.omega_sr);
  const double survive_rd = std::exp(-x_rd / p.omega_rd);
  return p.rs * survive_sr * survive_rd;
}

double eta2_throughput_optimal(double eta3, double omega_sr, double omega_rd) {
  if (!(eta3 > 0.0 && eta3 < 1.0)) {
    throw std::domain_error("eta2_throughput_optimal: eta3 must lie in (0, 1)");
  }
  if (omega_sr == omega_rd) {
    return 0.5 - 0.5 * eta3;
  }
  const double diff = omega_rd - omega_sr;
  const double root = std::sqrt(omega_rd * (eta3 * diff + omega_sr) / sq(diff));
  const double base = -eta3 - omega_sr / diff;
  return omega_sr > omega_rd ? base - root : base + root;
}

namespace {

SystemParams with_allocation(const SystemParams& p, double eta2, double eta3, double rs) {
  SystemParams q = p;
  q.eta2 = eta2;
  q.eta3 = eta3;
  q.eta1 = 1.0 - eta2 - eta3;
  q.rs = rs;
  q.rt = rs;
  return q;
}

}  // namespace

ThroughputMax max_throughput_in_rs(double eta2, double eta3, const SystemParams& p) {
  const SystemParams base = with_allocation(p, eta2, eta3, 1.0);
  const double c = throughput_rate(base);
  // log T = ln rs - (4^rs - 1) c is strictly concave in rs, so golden section
  // on a bracket past the stationary point converges to the maximum.
  double lo = 0.0;
  double hi = std::max(1.0, std::log(50.0 / c + 1.0) / std::log(4.0) + 1.0);
  auto objective = [&](double rs) { return rs <= 0.0 ? -INFINITY : std::log(rs) - (std::exp2(2.0 * rs) - 1.0) * c; };
  const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  for (int i = 0; i < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++i) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = objective(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = objective(x1);
    }
  }
  const double rs = 0.5 * (lo + hi);
  ThroughputMax out;
  out.rs_opt = rs;
  out.eta2_opt = eta2;
  out.t_max = throughput(with_allocation(p, eta2, eta3, rs));
  out.numeric_fallback = true;
  return out;
}

ThroughputMax max_throughput(double eta3, const SystemParams& p) {
  if (!(eta3 > 0.0 && eta3 < 1.0)) {
    throw std::domain_error("max_throughput: eta3 must lie in (0, 1)");
  }
  const double gp = p.gamma_p;
  const double osr = p.omega_sr;
  const double ord = p.omega_rd;
  const double eta2 = eta2_throughput_optimal(eta3, osr, ord);
  const double eta1 = 1.0 - eta2 - eta3;
  if (!(eta2 > 0.0 && eta1 > 0.0)) {
    throw std::domain_error("max_throughput: optimal eta2 leaves the simplex");
  }

  // Stationary point of rs * exp(-(4^rs - 1) c): (rs ln 4) e^{rs ln 4} = 1/c.
  // The Lambert-W argument is taken positive (the eta2 + eta3 - 1 factor is
  // -eta1); with the opposite sign it lies below -1/e for any useful SNR.
  const double arg = gp * eta2 * ord * osr * eta1 / ((eta2 + eta3) * (ord - osr) + osr);
  ThroughputMax closed;
  bool closed_ok = true;
  try {
    closed.rs_opt = numerics::lambert_w0(arg) / std::log(4.0);
  } catch (const std::domain_error&) {
    closed_ok = false;
  }
  closed.eta2_opt = eta2;
  if (closed_ok) {
    const double rs = closed.rs_opt;
    closed.t_max = rs * std::exp((1.0 - std::exp2(2.0 * rs)) * (ord * (eta2 + eta3) + osr * (1.0 - eta2 - eta3)) /
                                 (gp * eta2 * ord * osr * (1.0 - eta2 - eta3)));
  }

  const ThroughputMax numeric = max_throughput_in_rs(eta2, eta3, p);
  if (!closed_ok || !(closed.rs_opt > 0.0) || std::abs(closed.t_max - numeric.t_max) > 0.01 * numeric.t_max ||
      std::abs(closed.rs_opt - numeric.rs_opt) > 0.01 * numeric.rs_opt) {
    return numeric;
  }
  return closed;
}

ThroughputMax max_throughput_envelope(const SystemParams& p, double eta3_min) {
  if (!(eta3_min > 0.0 && eta3_min < 0.5)) {
    throw std::domain_error("max_throughput_envelope: eta3_min must lie in (0, 0.5)");
  }
  ThroughputMax best;
  // Sampled rather than assumed monotone so the envelope stays honest for
  // unusual omega ratios.
  constexpr int kSteps = 400;
  for (int i = 0; i <= kSteps; ++i) {
    const double eta3 = eta3_min + (1.0 - 2.0 * eta3_min) * i / kSteps;
    ThroughputMax m;
    try {
      m = max_throughput(eta3, p);
    } catch (const std::domain_error&) {
      continue;
    }
    if (m.t_max > best.t_max) best = m;
  }
  return best;
}

double diversity_order(const std::function<double(double)>& f, double snr_db_lo, double snr_db_hi, int points) {
  if (!(snr_db_hi > snr_db_lo) || snr_db_lo < 40.0) {
    throw std::domain_error("diversity_order: requires snr_db_hi > snr_db_lo >= 40 dB");
  }
  if (points < 5) {
    throw std::domain_error("diversity_order: needs at least 5 points");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (int i = 0; i < points; ++i) {
    const double db = snr_db_lo + (snr_db_hi - snr_db_lo) * i / (points - 1);
    const double gamma_p = db_to_linear(db);
    const double v = f(gamma_p);
    if (!(v >= 1e-300)) {
      std::ostringstream msg;
      msg << "diversity_order: outage value " << v << " underflows at " << db << " dB";
      throw std::range_error(msg.str());
    }
    xs.push_back(std::log10(gamma_p));
    ys.push_back(-std::log10(v));
  }
  double mx = 0.0;
  double my = 0.0;
  for (int i = 0; i < points; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= points;
  my /= points;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int i = 0; i < points; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

double diversity_order(const SystemParams& p, double theta, double snr_db_lo, double snr_db_hi, int points) {
  return diversity_order(
      [&](double gamma_p) {
        SystemParams q = p;
        q.gamma_p = gamma_p;
        return gsop(q, theta);
      },
      snr_db_lo, snr_db_hi, points);
}

}  // namespace relaysec::analytic
