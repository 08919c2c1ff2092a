// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.

#include <immintrin.h>

#include <cstdint>
#include <limits>

#include "bsqkd/kernels.hpp"

namespace bsqkd::kernels::avx2 {

namespace {

constexpr double kTiny = 0x1.0p-1000;

// log2 of positive normal doubles. x = 2^e m with m in [sqrt(1/2), sqrt(2)),
// ln m = 2 atanh(s) with s = (m-1)/(m+1), |s| < 0.172; the odd series is cut
// after s^23, where the remainder is below 1e-19.
inline __m256d log2_pd(__m256d x) {
  const __m256i mantissa_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  const __m256i magic_bits = _mm256_set1_epi64x(0x4330000000000000LL);  // 2^52
  const __m256d magic = _mm256_set1_pd(0x1.0p52);

  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(biased, magic_bits)), magic);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mantissa_mask), one_bits));

  const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d poly = _mm256_set1_pd(1.0 / 23.0);
  for (int k = 10; k >= 0; --k) {
    poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / (2.0 * k + 1.0)));
  }
  const __m256d ln_m = _mm256_mul_pd(_mm256_add_pd(s, s), poly);
  return _mm256_fmadd_pd(ln_m, _mm256_set1_pd(1.4426950408889634), e);
}

inline __m256d entropy_pd(__m256d x) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d tiny = _mm256_set1_pd(kTiny);
  const __m256d y = _mm256_sub_pd(one, x);
  const __m256d valid =
      _mm256_and_pd(_mm256_cmp_pd(x, tiny, _CMP_GT_OQ), _mm256_cmp_pd(x, one, _CMP_LT_OQ));
  const __m256d lx = log2_pd(_mm256_max_pd(x, tiny));
  const __m256d ly = log2_pd(_mm256_max_pd(y, tiny));
  const __m256d h = _mm256_sub_pd(_mm256_setzero_pd(),
                                  _mm256_add_pd(_mm256_mul_pd(x, lx), _mm256_mul_pd(y, ly)));
  return _mm256_and_pd(valid, h);
}

inline __m256i tail_mask(std::size_t remaining) {
  const __m256i lane = _mm256_set_epi64x(3, 2, 1, 0);
  return _mm256_cmpgt_epi64(_mm256_set1_epi64x(static_cast<long long>(remaining)), lane);
}

inline __m256d objective_pd(const Chi0Objective& obj, __m256d x) {
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d xi = _mm256_mul_pd(
      _mm256_sub_pd(_mm256_set1_pd(obj.xi_offset), _mm256_mul_pd(_mm256_set1_pd(obj.xi_slope), x)),
      _mm256_set1_pd(obj.xi_scale));
  const __m256d vacuum = _mm256_mul_pd(_mm256_set1_pd(obj.w_vacuum), x);
  const __m256d positive = _mm256_cmp_pd(xi, _mm256_setzero_pd(), _CMP_GT_OQ);

  __m256d a = inf;
  if (obj.use_clicked) {
    const __m256d num = _mm256_sub_pd(_mm256_set1_pd(obj.err_clicked),
                                      _mm256_mul_pd(_mm256_set1_pd(obj.half_gamma0), x));
    a = _mm256_div_pd(_mm256_mul_pd(num, _mm256_set1_pd(obj.inv_gamma1)), xi);
  }
  __m256d b = inf;
  if (obj.use_nonclicked) {
    const __m256d num = _mm256_sub_pd(_mm256_set1_pd(obj.err_nonclicked),
                                      _mm256_mul_pd(_mm256_set1_pd(obj.half_one_minus_gamma0), x));
    b = _mm256_div_pd(_mm256_mul_pd(num, _mm256_set1_pd(obj.inv_one_minus_gamma1)), xi);
  }
  __m256d eps = _mm256_min_pd(a, b);
  eps = _mm256_min_pd(_mm256_max_pd(eps, _mm256_setzero_pd()), _mm256_set1_pd(0.5));

  const __m256d credit =
      _mm256_mul_pd(_mm256_mul_pd(_mm256_set1_pd(obj.w_single), xi),
                    _mm256_sub_pd(_mm256_set1_pd(1.0), entropy_pd(eps)));
  return _mm256_add_pd(vacuum, _mm256_and_pd(positive, credit));
}

}  // namespace

void scan(const Chi0Objective& obj, std::span<const double> xs, std::span<double> out) noexcept {
  const std::size_t n = xs.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, objective_pd(obj, _mm256_loadu_pd(xs.data() + i)));
  }
  if (i < n) {
    const __m256i mask = tail_mask(n - i);
    _mm256_maskstore_pd(out.data() + i, mask,
                        objective_pd(obj, _mm256_maskload_pd(xs.data() + i, mask)));
  }
}

void binary_entropy(std::span<const double> x, std::span<double> out) noexcept {
  const std::size_t n = x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out.data() + i, entropy_pd(_mm256_loadu_pd(x.data() + i)));
  }
  if (i < n) {
    const __m256i mask = tail_mask(n - i);
    _mm256_maskstore_pd(out.data() + i, mask, entropy_pd(_mm256_maskload_pd(x.data() + i, mask)));
  }
}

}  // namespace bsqkd::kernels::avx2
