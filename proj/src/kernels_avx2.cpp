#include <immintrin.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <initializer_list>

#include "kernels_impl.hpp"

namespace relaysec::kernels::detail {

namespace {

constexpr std::size_t kLanes = 4;

void phi_and_gamma_d_avx2(const double* g_sr, const double* g_rd, std::size_t n, TransmitSnr snr, double* phi,
                          double* gamma_d) {
  const __m256d vs = _mm256_set1_pd(snr.source);
  const __m256d vr = _mm256_set1_pd(snr.relay);
  const __m256d vd = _mm256_set1_pd(snr.destination);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d a = _mm256_loadu_pd(g_sr + i);
    const __m256d b = _mm256_loadu_pd(g_rd + i);
    const __m256d sr = _mm256_mul_pd(vs, a);
    const __m256d rd = _mm256_mul_pd(vr, b);
    const __m256d dr = _mm256_mul_pd(vd, b);
    const __m256d gr = _mm256_div_pd(sr, _mm256_add_pd(dr, one));
    const __m256d den = _mm256_add_pd(_mm256_add_pd(_mm256_add_pd(sr, rd), dr), one);
    const __m256d gd = _mm256_div_pd(_mm256_mul_pd(sr, rd), den);
    _mm256_storeu_pd(gamma_d + i, gd);
    _mm256_storeu_pd(phi + i, _mm256_div_pd(_mm256_add_pd(one, gd), _mm256_add_pd(one, gr)));
  }
  for (; i < n; ++i) {
    phi_and_gamma_d_one(g_sr[i], g_rd[i], snr, phi[i], gamma_d[i]);
  }
}

// Natural log for finite x >= 1 (cephes rational form on [sqrt(1/2), sqrt(2))).
inline __m256d log_avx2(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i half_exp = _mm256_set1_epi64x(0x3FE0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), half_exp));

  // Unbiased exponent as double via the 2^52 magic constant.
  const __m256i raw_exp = _mm256_srli_epi64(bits, 52);
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(raw_exp, magic_bits)),
                            _mm256_set1_pd(4503599627370496.0 + 1022.0));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
  e = _mm256_sub_pd(e, _mm256_and_pd(small, one));
  // m < sqrt(1/2): x = 2m - 1, else x = m - 1.
  m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), one);

  const __m256d z = _mm256_mul_pd(m, m);
  auto horner = [&](std::initializer_list<double> coeffs, bool monic) {
    auto it = coeffs.begin();
    __m256d acc = monic ? _mm256_add_pd(m, _mm256_set1_pd(*it++)) : _mm256_set1_pd(*it++);
    for (; it != coeffs.end(); ++it) acc = _mm256_add_pd(_mm256_mul_pd(acc, m), _mm256_set1_pd(*it));
    return acc;
  };
  const __m256d p = horner({1.01875663804580931796E-4, 4.97494994976747001425E-1, 4.70579119878881725854E0,
                            1.44989225341610930846E1, 1.79368678507819816313E1, 7.70838733755885391666E0},
                           false);
  const __m256d q = horner({1.12873587189167450590E1, 4.52279145837532221105E1, 8.29875266912776603211E1,
                            7.11544750618563894466E1, 2.31251620126765340583E1},
                           true);
  __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, p), q));
  y = _mm256_add_pd(y, _mm256_mul_pd(e, _mm256_set1_pd(-2.121944400546905827679e-4)));
  y = _mm256_sub_pd(y, _mm256_mul_pd(z, _mm256_set1_pd(0.5)));
  __m256d r = _mm256_add_pd(m, y);
  return _mm256_add_pd(r, _mm256_mul_pd(e, _mm256_set1_pd(0.693359375)));
}

void equivocation_avx2(const double* phi, std::size_t n, double rs, double* delta) {
  const double inv_two_rs = 1.0 / (2.0 * rs);
  const __m256d scale = _mm256_set1_pd(inv_two_rs * 1.44269504088896340736);  // log2(e)
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d x = _mm256_max_pd(_mm256_loadu_pd(phi + i), one);
    const __m256d d = _mm256_mul_pd(log_avx2(x), scale);
    _mm256_storeu_pd(delta + i, _mm256_min_pd(_mm256_max_pd(d, zero), one));
  }
  for (; i < n; ++i) {
    const double x = std::max(phi[i], 1.0);
    delta[i] = std::clamp(std::log2(x) * inv_two_rs, 0.0, 1.0);
  }
}

template <int Predicate>
std::uint64_t count_cmp_avx2(const double* values, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::uint64_t count = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(values + i), t, Predicate);
    count += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(_mm256_movemask_pd(mask))));
  }
  for (; i < n; ++i) {
    if constexpr (Predicate == _CMP_LT_OQ) {
      count += values[i] < threshold ? 1 : 0;
    } else {
      count += values[i] <= threshold ? 1 : 0;
    }
  }
  return count;
}

std::uint64_t count_below_avx2(const double* values, std::size_t n, double threshold) {
  return count_cmp_avx2<_CMP_LT_OQ>(values, n, threshold);
}

std::uint64_t count_at_most_avx2(const double* values, std::size_t n, double threshold) {
  return count_cmp_avx2<_CMP_LE_OQ>(values, n, threshold);
}

Moments moments_avx2(const double* values, std::size_t n) {
  __m256d sum = _mm256_setzero_pd();
  __m256d sum_sq = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d v = _mm256_loadu_pd(values + i);
    sum = _mm256_add_pd(sum, v);
    sum_sq = _mm256_add_pd(sum_sq, _mm256_mul_pd(v, v));
  }
  alignas(32) double s[kLanes];
  alignas(32) double s2[kLanes];
  _mm256_store_pd(s, sum);
  _mm256_store_pd(s2, sum_sq);
  Moments m{(s[0] + s[1]) + (s[2] + s[3]), (s2[0] + s2[1]) + (s2[2] + s2[3])};
  for (; i < n; ++i) {
    m.sum += values[i];
    m.sum_sq += values[i] * values[i];
  }
  return m;
}

constexpr KernelTable kAvx2{phi_and_gamma_d_avx2, equivocation_avx2, count_below_avx2, count_at_most_avx2,
                            moments_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace relaysec::kernels::detail
