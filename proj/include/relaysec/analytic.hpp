#pragma once

#include <cstdint>
#include <functional>

#include "relaysec/channel.hpp"
#include "relaysec/numerics.hpp"

namespace relaysec::analytic {

/// Auxiliary quantities of the closed-form outage expression, evaluated at a
/// threshold tau on phi.
struct PsiSet {
  double psi1 = 0.0;
  double psi2 = 0.0;
  double psi3 = 0.0;
  double psi4 = 0.0;
  double psi5 = 0.0;
  double psi6 = 0.0;
  double psi7 = 0.0;
  double psi8 = 0.0;
};

PsiSet psi_set(const SystemParams& p, double tau);

/// The four probability terms whose sum is the closed-form CDF of phi:
///   t1 = Pr(g_SR < x0, g_RD > gS g_SR/(gR+gD))
///   t2 = region-approximated middle term
///   t3 = Pr(g_SR < x1, g_RD < gS g_SR/(gR+gD))
///   t4 = Pr(g_SR > x1, g_RD < upper root)
struct PhiTermBreakdown {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
  double t4 = 0.0;

  double sum() const { return t1 + t2 + t3 + t4; }
};

/// Evaluates each term from its own closed form (thresholds computed in the
/// transmit-SNR domain rather than through the psi set).
PhiTermBreakdown phi_terms(const SystemParams& p, double phi);

/// Single-expression closed form, unclamped. Requires phi >= 1.
double cdf_phi_unclamped(double phi, const SystemParams& p);

/// Closed-form approximation of Pr(phi_rv <= phi), clamped to [0, 1].
/// Each clamp increments clamp_warning_count().
double cdf_phi(double phi, const SystemParams& p);

std::uint64_t clamp_warning_count() noexcept;
void reset_clamp_warning_count() noexcept;

/// Generalized secrecy outage probability Pr(Delta < theta), theta in (0, 1].
double gsop(const SystemParams& p, double theta);

/// Average fractional equivocation via
///   1 - 1/(2 rs ln 2) * integral_1^{4^rs} cdf_phi(x)/x dx.
double afe(const SystemParams& p, const numerics::QuadratureSpec& spec = {});

/// The unsimplified integration-by-parts form, kept as a cross-check of afe().
double afe_literal(const SystemParams& p, const numerics::QuadratureSpec& spec = {});

/// Average information leakage rate (1 - afe) * rs.
double ailr(const SystemParams& p, const numerics::QuadratureSpec& spec = {});

/// High-SNR GSOP: sqrt term ~ gamma_p^-1/2 plus a 1/gamma_p correction.
double gsop_asymptotic(const SystemParams& p, double theta);

/// Leading sqrt(pi eta1 tau Omega_SR / (4 gamma_p eta2 eta3 Omega_RD^2)) term alone.
double gsop_asymptotic_leading(const SystemParams& p, double theta);

double afe_asymptotic(const SystemParams& p);
double ailr_asymptotic(const SystemParams& p);

/// Confidential throughput rs * Pr(legitimate decoding at rate rt), using the
/// harmonic-mean bound on the destination SINR.
double throughput(const SystemParams& p);

/// Same quantity written as the product of the two exponential survival
/// functions; kept separate as an algebraic cross-check.
double throughput_product_form(const SystemParams& p);

struct ThroughputMax {
  double t_max = 0.0;
  double rs_opt = 0.0;
  double eta2_opt = 0.0;
  /// Set when the Lambert-W closed form was rejected and the 1-D numeric
  /// maximizer in rs supplied the result.
  bool numeric_fallback = false;
};

/// Closed-form eta2 that maximizes throughput for a given eta3.
double eta2_throughput_optimal(double eta3, double omega_sr, double omega_rd);

/// Maximum throughput over (rs = rt, eta2) for fixed eta3, with
/// eta1 = 1 - eta2 - eta3. Uses gamma_p and the omegas of `p`.
ThroughputMax max_throughput(double eta3, const SystemParams& p);

/// Golden-section maximizer of throughput in rs = rt at fixed (eta2, eta3).
ThroughputMax max_throughput_in_rs(double eta2, double eta3, const SystemParams& p);

/// Supremum of max_throughput over eta3 in [eta3_min, 1 - eta3_min]. The
/// maximum is monotone decreasing in eta3, so this is attained at eta3_min.
ThroughputMax max_throughput_envelope(const SystemParams& p, double eta3_min = 1e-3);

/// Least-squares slope of -log10(f) against log10(gamma_p) on `points`
/// log-spaced SNRs in [snr_db_lo, snr_db_hi].
double diversity_order(const std::function<double(double gamma_p)>& f, double snr_db_lo, double snr_db_hi,
                       int points = 11);

/// Diversity order of the closed-form GSOP at the allocation and rates of `p`.
double diversity_order(const SystemParams& p, double theta, double snr_db_lo, double snr_db_hi,
                       int points = 11);

}  // namespace relaysec::analytic
