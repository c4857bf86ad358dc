#pragma once

#include <optional>
#include <string>

namespace relaysec {

/// Operating point of the source -> untrusted relay -> destination link with
/// destination-based jamming. All SNRs are linear and referenced to N0 = 1.
struct SystemParams {
  double gamma_p = 1000.0;  ///< total transmit SNR P/N0
  double eta1 = 1.0 / 3.0;  ///< power fraction at the source
  double eta2 = 1.0 / 3.0;  ///< power fraction at the relay
  double eta3 = 1.0 / 3.0;  ///< power fraction at the destination (jamming)
  double rs = 1.0;          ///< target secrecy rate, bits/s/Hz
  double rt = 1.0;          ///< codeword transmission rate, bits/s/Hz
  double omega_sr = 16.0;   ///< mean gain of S->R
  double omega_rd = 16.0;   ///< mean gain of R->D (= D->R)
  double alpha = 4.0;       ///< path-loss exponent
  std::optional<double> d;  ///< normalized S->R distance; fixes the omegas when set

  /// Equal power allocation at the given SNR, with omegas from the relay
  /// position `d`.
  static SystemParams epa(double gamma_p, double d, double rs, double alpha = 4.0);

  /// Sets d and recomputes omega_sr = d^-alpha, omega_rd = (1-d)^-alpha.
  SystemParams& place_relay(double d);

  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;

  /// Empty when valid, otherwise a message naming the violated invariant.
  std::string violation() const;
};

double db_to_linear(double db);
double linear_to_db(double linear);

struct ChannelRealization {
  double g_sr = 0.0;
  double g_rd = 0.0;  ///< shared by R->D and D->R (reciprocal link)
};

struct TransmitSnrs {
  double source = 0.0;
  double relay = 0.0;
  double destination = 0.0;
};

struct LinkSinrs {
  double gamma_r = 0.0;  ///< SINR at the relay (eavesdropper)
  double gamma_d = 0.0;  ///< end-to-end SINR at the destination

  /// (1 + gamma_d) / (1 + gamma_r)
  double phi() const { return (1.0 + gamma_d) / (1.0 + gamma_r); }
};

struct Capacities {
  double legitimate = 0.0;
  double eavesdropper = 0.0;
};

TransmitSnrs transmit_snrs(const SystemParams& p);

/// AF gain 1/sqrt(P_S g_SR + P_D g_RD + N0) with P_X = eta_X gamma_P N0.
double amplification_factor(const SystemParams& p, const ChannelRealization& c, double n0);

LinkSinrs link_sinrs(const SystemParams& p, const ChannelRealization& c);

/// Harmonic-mean upper bound on gamma_d used by the closed-form analysis:
/// gamma_R/(gamma_R+gamma_D) * min(gamma_S g_SR, (gamma_R+gamma_D) g_RD).
double gamma_d_upper_bound(const SystemParams& p, const ChannelRealization& c);

Capacities capacities(const LinkSinrs& s);

/// Fraction of the message uncertainty left at the relay for one fading draw.
double fractional_equivocation(const LinkSinrs& s, double rs);

/// Same quantity expressed directly in phi.
double fractional_equivocation_from_phi(double phi, double rs);

}  // namespace relaysec
