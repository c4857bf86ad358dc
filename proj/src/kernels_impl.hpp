#pragma once

#include <cstddef>
#include <cstdint>

#include "relaysec/kernels.hpp"

namespace relaysec::kernels::detail {

struct KernelTable {
  void (*phi_and_gamma_d)(const double* g_sr, const double* g_rd, std::size_t n, TransmitSnr snr, double* phi,
                          double* gamma_d);
  void (*equivocation)(const double* phi, std::size_t n, double rs, double* delta);
  std::uint64_t (*count_below)(const double* values, std::size_t n, double threshold);
  std::uint64_t (*count_at_most)(const double* values, std::size_t n, double threshold);
  Moments (*moments)(const double* values, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

#if defined(RELAYSEC_BUILD_AVX2)
const KernelTable& avx2_table() noexcept;
#endif

// Per-element scalar bodies, shared with the vector variants' tail loops.
inline void phi_and_gamma_d_one(double g_sr, double g_rd, TransmitSnr snr, double& phi, double& gamma_d) {
  const double sr = snr.source * g_sr;
  const double rd = snr.relay * g_rd;
  const double dr = snr.destination * g_rd;
  const double gamma_r = sr / (dr + 1.0);
  gamma_d = (sr * rd) / (((sr + rd) + dr) + 1.0);
  phi = (1.0 + gamma_d) / (1.0 + gamma_r);
}

}  // namespace relaysec::kernels::detail
