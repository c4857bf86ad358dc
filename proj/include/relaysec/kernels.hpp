#pragma once

// Batch kernels for the Monte Carlo inner loop. Every kernel has a scalar
// reference implementation and, on x86-64, an AVX2 variant chosen at runtime.
// The SINR arithmetic is bit-identical across variants; the log-based
// equivocation kernel agrees to a few ulp.

#include <cstdint>
#include <span>
#include <string_view>

namespace relaysec::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa) noexcept;

/// True when the variant was compiled in and the CPU supports it.
bool isa_available(Isa isa) noexcept;

/// Best available variant, unless RELAYSEC_ISA=scalar|avx2 names another
/// available one. Resolved once on first use.
Isa active_isa() noexcept;

/// Overrides the dispatch choice. Throws std::invalid_argument when the
/// variant is unavailable.
void set_active_isa(Isa isa);

struct TransmitSnr {
  double source = 0.0;
  double relay = 0.0;
  double destination = 0.0;
};

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
};

/// phi = (1 + gamma_d)/(1 + gamma_r) and gamma_d for each (g_sr, g_rd) pair.
void phi_and_gamma_d(Isa isa, std::span<const double> g_sr, std::span<const double> g_rd, TransmitSnr snr,
                     std::span<double> phi, std::span<double> gamma_d);

/// clamp(log2(phi) / (2 rs), 0, 1) per element.
void equivocation(Isa isa, std::span<const double> phi, double rs, std::span<double> delta);

/// Number of elements strictly below `threshold`.
std::uint64_t count_below(Isa isa, std::span<const double> values, double threshold);

/// Number of elements less than or equal to `threshold`.
std::uint64_t count_at_most(Isa isa, std::span<const double> values, double threshold);

Moments moments(Isa isa, std::span<const double> values);

inline void phi_and_gamma_d(std::span<const double> g_sr, std::span<const double> g_rd, TransmitSnr snr,
                            std::span<double> phi, std::span<double> gamma_d) {
  phi_and_gamma_d(active_isa(), g_sr, g_rd, snr, phi, gamma_d);
}
inline void equivocation(std::span<const double> phi, double rs, std::span<double> delta) {
  equivocation(active_isa(), phi, rs, delta);
}
inline std::uint64_t count_below(std::span<const double> values, double threshold) {
  return count_below(active_isa(), values, threshold);
}
inline std::uint64_t count_at_most(std::span<const double> values, double threshold) {
  return count_at_most(active_isa(), values, threshold);
}
inline Moments moments(std::span<const double> values) { return moments(active_isa(), values); }

}  // namespace relaysec::kernels
