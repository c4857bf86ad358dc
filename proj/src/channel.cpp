#include "relaysec/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace relaysec {

SystemParams SystemParams::epa(double gamma_p, double d, double rs, double alpha) {
  SystemParams p;
  p.gamma_p = gamma_p;
  p.eta1 = p.eta2 = p.eta3 = 1.0 / 3.0;
  p.rs = rs;
  p.rt = rs;
  p.alpha = alpha;
  p.place_relay(d);
  return p;
}

SystemParams& SystemParams::place_relay(double dist) {
  d = dist;
  omega_sr = std::pow(dist, -alpha);
  omega_rd = std::pow(1.0 - dist, -alpha);
  return *this;
}

std::string SystemParams::violation() const {
  std::ostringstream msg;
  auto finite_positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!finite_positive(gamma_p)) {
    msg << "gamma_p must be > 0 (got " << gamma_p << ")";
  } else if (!finite_positive(eta1) || !finite_positive(eta2) || !finite_positive(eta3)) {
    msg << "eta values must be > 0 (got " << eta1 << ", " << eta2 << ", " << eta3 << ")";
  } else if (std::abs(eta1 + eta2 + eta3 - 1.0) > 1e-9) {
    msg << "eta sum must equal 1 (got " << eta1 + eta2 + eta3 << ")";
  } else if (!finite_positive(rs)) {
    msg << "rs must be > 0 (got " << rs << ")";
  } else if (!(rt >= rs) || !std::isfinite(rt)) {
    msg << "rt must satisfy rt >= rs (got rs=" << rs << ", rt=" << rt << ")";
  } else if (!finite_positive(omega_sr) || !finite_positive(omega_rd)) {
    msg << "omega_sr and omega_rd must be > 0";
  } else if (!finite_positive(alpha)) {
    msg << "alpha must be > 0";
  } else if (d && !(*d > 0.0 && *d < 1.0)) {
    msg << "d must lie in (0, 1) (got " << *d << ")";
  } else if (d) {
    const double want_sr = std::pow(*d, -alpha);
    const double want_rd = std::pow(1.0 - *d, -alpha);
    if (std::abs(omega_sr - want_sr) > 1e-9 * want_sr || std::abs(omega_rd - want_rd) > 1e-9 * want_rd) {
      msg << "omegas inconsistent with relay position d=" << *d;
    }
  }
  return msg.str();
}

void SystemParams::validate() const {
  if (auto v = violation(); !v.empty()) {
    throw std::invalid_argument(v);
  }
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

TransmitSnrs transmit_snrs(const SystemParams& p) {
  return {p.eta1 * p.gamma_p, p.eta2 * p.gamma_p, p.eta3 * p.gamma_p};
}

double amplification_factor(const SystemParams& p, const ChannelRealization& c, double n0) {
  if (!(n0 > 0.0)) {
    throw std::domain_error("amplification_factor: n0 must be > 0");
  }
  const double ps = p.eta1 * p.gamma_p * n0;
  const double pd = p.eta3 * p.gamma_p * n0;
  return 1.0 / std::sqrt(ps * c.g_sr + pd * c.g_rd + n0);
}

LinkSinrs link_sinrs(const SystemParams& p, const ChannelRealization& c) {
  const auto snr = transmit_snrs(p);
  const double sr = snr.source * c.g_sr;
  const double rd = snr.relay * c.g_rd;
  const double dr = snr.destination * c.g_rd;
  return {sr / (dr + 1.0), sr * rd / (sr + rd + dr + 1.0)};
}

double gamma_d_upper_bound(const SystemParams& p, const ChannelRealization& c) {
  const auto snr = transmit_snrs(p);
  const double fwd = snr.relay + snr.destination;
  return snr.relay / fwd * std::min(snr.source * c.g_sr, fwd * c.g_rd);
}

Capacities capacities(const LinkSinrs& s) {
  return {0.5 * std::log2(1.0 + s.gamma_d), 0.5 * std::log2(1.0 + s.gamma_r)};
}

double fractional_equivocation_from_phi(double phi, double rs) {
  if (!(rs > 0.0)) {
    throw std::domain_error("fractional_equivocation: rs must be > 0");
  }
  if (phi <= 1.0) return 0.0;
  const double log_phi = std::log2(phi);
  if (log_phi >= 2.0 * rs) return 1.0;
  return std::clamp(log_phi / (2.0 * rs), 0.0, 1.0);
}

double fractional_equivocation(const LinkSinrs& s, double rs) {
  return fractional_equivocation_from_phi(s.phi(), rs);
}

}  // namespace relaysec
