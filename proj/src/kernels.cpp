#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace relaysec::kernels {

namespace {

bool cpu_has_avx2() noexcept {
#if defined(RELAYSEC_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa resolve_default() noexcept {
  if (const char* env = std::getenv("RELAYSEC_ISA")) {
    const std::string_view want{env};
    if (want == "scalar") return Isa::scalar;
    if (want == "avx2" && isa_available(Isa::avx2)) return Isa::avx2;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& active_slot() noexcept {
  static std::atomic<int> slot{static_cast<int>(resolve_default())};
  return slot;
}

const detail::KernelTable& table(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return detail::scalar_table();
    case Isa::avx2:
#if defined(RELAYSEC_BUILD_AVX2)
      if (cpu_has_avx2()) return detail::avx2_table();
#endif
      break;
  }
  throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
}

void require_same_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": span sizes differ");
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
      return cpu_has_avx2();
  }
  return false;
}

Isa active_isa() noexcept { return static_cast<Isa>(active_slot().load(std::memory_order_relaxed)); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
  active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

void phi_and_gamma_d(Isa isa, std::span<const double> g_sr, std::span<const double> g_rd, TransmitSnr snr,
                     std::span<double> phi, std::span<double> gamma_d) {
  require_same_size(g_sr.size(), g_rd.size(), "phi_and_gamma_d");
  require_same_size(g_sr.size(), phi.size(), "phi_and_gamma_d");
  require_same_size(g_sr.size(), gamma_d.size(), "phi_and_gamma_d");
  table(isa).phi_and_gamma_d(g_sr.data(), g_rd.data(), g_sr.size(), snr, phi.data(), gamma_d.data());
}

void equivocation(Isa isa, std::span<const double> phi, double rs, std::span<double> delta) {
  if (!(rs > 0.0)) throw std::domain_error("equivocation: rs must be > 0");
  require_same_size(phi.size(), delta.size(), "equivocation");
  table(isa).equivocation(phi.data(), phi.size(), rs, delta.data());
}

std::uint64_t count_below(Isa isa, std::span<const double> values, double threshold) {
  return table(isa).count_below(values.data(), values.size(), threshold);
}

std::uint64_t count_at_most(Isa isa, std::span<const double> values, double threshold) {
  return table(isa).count_at_most(values.data(), values.size(), threshold);
}

Moments moments(Isa isa, std::span<const double> values) { return table(isa).moments(values.data(), values.size()); }

}  // namespace relaysec::kernels
