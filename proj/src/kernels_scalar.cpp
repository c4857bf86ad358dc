#include <algorithm>
#include <cmath>

#include "kernels_impl.hpp"

namespace relaysec::kernels::detail {

namespace {

void phi_and_gamma_d_scalar(const double* g_sr, const double* g_rd, std::size_t n, TransmitSnr snr, double* phi,
                            double* gamma_d) {
  for (std::size_t i = 0; i < n; ++i) {
    phi_and_gamma_d_one(g_sr[i], g_rd[i], snr, phi[i], gamma_d[i]);
  }
}

void equivocation_scalar(const double* phi, std::size_t n, double rs, double* delta) {
  const double inv_two_rs = 1.0 / (2.0 * rs);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::max(phi[i], 1.0);
    delta[i] = std::clamp(std::log2(x) * inv_two_rs, 0.0, 1.0);
  }
}

std::uint64_t count_below_scalar(const double* values, std::size_t n, double threshold) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += values[i] < threshold ? 1 : 0;
  return count;
}

std::uint64_t count_at_most_scalar(const double* values, std::size_t n, double threshold) {
  std::uint64_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += values[i] <= threshold ? 1 : 0;
  return count;
}

Moments moments_scalar(const double* values, std::size_t n) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    m.sum += values[i];
    m.sum_sq += values[i] * values[i];
  }
  return m;
}

constexpr KernelTable kScalar{phi_and_gamma_d_scalar, equivocation_scalar, count_below_scalar, count_at_most_scalar,
                              moments_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace relaysec::kernels::detail
