#include "kernels_detail.hpp"

#if LSLDG_HAVE_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <limits>

namespace lsldg::kernels::avx2 {

bool compiled() { return true; }

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// exp(x) for four doubles: 2^n * R(r) with n = round(x/ln2), r = x - n*ln2,
// R the Pade approximant 1 + 2p/(q - p). Inputs past the clamp points flush
// to 0 / inf.
inline __m256d exp_pd(__m256d x) {
    const __m256d kLog2E = _mm256_set1_pd(1.4426950408889634074);
    const __m256d kLn2Hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d kLn2Lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d kP0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d kP1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d kP2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d kQ0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d kQ1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d kQ2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d kQ3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d kUnder = _mm256_set1_pd(-745.2);  // exp is sub-denormal below
    const __m256d kOver = _mm256_set1_pd(709.782712893384);
    const __m256d kMagic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52

    __m256d xc = _mm256_max_pd(_mm256_min_pd(x, kOver), kUnder);
    __m256d nf = _mm256_round_pd(_mm256_mul_pd(xc, kLog2E),
                                 _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(nf, kLn2Hi, xc);
    r = _mm256_fnmadd_pd(nf, kLn2Lo, r);
    __m256d r2 = _mm256_mul_pd(r, r);
    __m256d p = _mm256_fmadd_pd(kP0, r2, kP1);
    p = _mm256_fmadd_pd(p, r2, kP2);
    p = _mm256_mul_pd(p, r);
    __m256d q = _mm256_fmadd_pd(kQ0, r2, kQ1);
    q = _mm256_fmadd_pd(q, r2, kQ2);
    q = _mm256_fmadd_pd(q, r2, kQ3);
    __m256d e = _mm256_fmadd_pd(_mm256_set1_pd(2.0),
                                _mm256_div_pd(p, _mm256_sub_pd(q, p)),
                                _mm256_set1_pd(1.0));
    // 2^n through the exponent bits; |n| <= 1076 so the magic-add trick
    // recovers the integer exactly. Scaling happens in two halves so the
    // edges (n = 1024, gradual underflow) stay representable.
    __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(nf, kMagic)),
                                  _mm256_castpd_si256(kMagic));
    const __m256i bias = _mm256_set1_epi64x(1023);
    // floor(n/2) per 64-bit lane; the 32-bit arithmetic shift is exact here
    // because every lane is a sign-extended small integer
    __m256i half = _mm256_srai_epi32(ni, 1);
    __m256i rest = _mm256_sub_epi64(ni, half);
    __m256d pow_a = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(half, bias), 52));
    __m256d pow_b = _mm256_castsi256_pd(
        _mm256_slli_epi64(_mm256_add_epi64(rest, bias), 52));
    e = _mm256_mul_pd(_mm256_mul_pd(e, pow_a), pow_b);
    e = _mm256_blendv_pd(e, _mm256_setzero_pd(),
                         _mm256_cmp_pd(x, kUnder, _CMP_LT_OQ));
    e = _mm256_blendv_pd(e,
                         _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                         _mm256_cmp_pd(x, kOver, _CMP_GT_OQ));
    return e;
}

}  // namespace

void squared_distances(const double* points, std::size_t n, std::size_t dim,
                       const double* query, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = points + i * dim;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= dim; c += 4) {
            __m256d d = _mm256_sub_pd(_mm256_loadu_pd(row + c),
                                      _mm256_loadu_pd(query + c));
            acc = _mm256_fmadd_pd(d, d, acc);
        }
        double s = hsum(acc);
        for (; c < dim; ++c) {
            const double d = row[c] - query[c];
            s += d * d;
        }
        out[i] = s;
    }
}

void exp_affine(const double* in, std::size_t n, double scale, double shift,
                double* out) {
    const __m256d vscale = _mm256_set1_pd(scale);
    const __m256d vshift = _mm256_set1_pd(shift);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d t = _mm256_fmadd_pd(vscale, _mm256_loadu_pd(in + i), vshift);
        _mm256_storeu_pd(out + i, exp_pd(t));
    }
    for (; i < n; ++i) out[i] = std::exp(scale * in[i] + shift);
}

void gradient_row(const double* centers, double x, double inv_s2,
                  const double* kernel, std::size_t n, double* out) {
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vs = _mm256_set1_pd(inv_s2);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(centers + i), vx);
        __m256d r = _mm256_mul_pd(_mm256_mul_pd(d, vs),
                                  _mm256_loadu_pd(kernel + i));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) out[i] = (centers[i] - x) * inv_s2 * kernel[i];
}

void curvature_row(const double* centers, double x, double inv_s2,
                   const double* kernel, std::size_t n, double* out) {
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vs = _mm256_set1_pd(inv_s2);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(centers + i), vx);
        __m256d t = _mm256_fmsub_pd(_mm256_mul_pd(d, d), vs, one);
        __m256d r = _mm256_mul_pd(_mm256_mul_pd(t, vs),
                                  _mm256_loadu_pd(kernel + i));
        _mm256_storeu_pd(out + i, r);
    }
    for (; i < n; ++i) {
        const double d = centers[i] - x;
        out[i] = (d * d * inv_s2 - 1.0) * inv_s2 * kernel[i];
    }
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double dot3(const double* a, const double* b, const double* c, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i] * b[i] * c[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double s = hsum(acc);
    for (; i < n; ++i) s += a[i];
    return s;
}

double min(const double* a, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    if (n >= 4) {
        __m256d vm = _mm256_loadu_pd(a);
        for (i = 4; i + 4 <= n; i += 4)
            vm = _mm256_min_pd(vm, _mm256_loadu_pd(a + i));
        alignas(32) double lanes[4];
        _mm256_store_pd(lanes, vm);
        m = lanes[0];
        for (int k = 1; k < 4; ++k) m = lanes[k] < m ? lanes[k] : m;
    }
    for (; i < n; ++i) m = a[i] < m ? a[i] : m;
    return m;
}

void weighted_mean(const double* points, std::size_t n, std::size_t dim,
                   const double* w, double* out) {
    std::memset(out, 0, dim * sizeof(double));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = points + i * dim;
        const __m256d wi = _mm256_set1_pd(w[i]);
        std::size_t c = 0;
        for (; c + 4 <= dim; c += 4) {
            __m256d acc = _mm256_loadu_pd(out + c);
            acc = _mm256_fmadd_pd(wi, _mm256_loadu_pd(row + c), acc);
            _mm256_storeu_pd(out + c, acc);
        }
        for (; c < dim; ++c) out[c] += w[i] * row[c];
    }
}

}  // namespace lsldg::kernels::avx2

#else  // !LSLDG_HAVE_AVX2

#include <cstdlib>

namespace lsldg::kernels::avx2 {

bool compiled() { return false; }

// Stubs; never reached because backend_available(avx2) is false.
namespace {
[[noreturn]] void unreachable() { std::abort(); }
}  // namespace

void squared_distances(const double*, std::size_t, std::size_t, const double*,
                       double*) {
    unreachable();
}
void exp_affine(const double*, std::size_t, double, double, double*) {
    unreachable();
}
void gradient_row(const double*, double, double, const double*, std::size_t,
                  double*) {
    unreachable();
}
void curvature_row(const double*, double, double, const double*, std::size_t,
                   double*) {
    unreachable();
}
double dot(const double*, const double*, std::size_t) { unreachable(); }
double dot3(const double*, const double*, const double*, std::size_t) {
    unreachable();
}
double sum(const double*, std::size_t) { unreachable(); }
double min(const double*, std::size_t) { unreachable(); }
void weighted_mean(const double*, std::size_t, std::size_t, const double*,
                   double*) {
    unreachable();
}

}  // namespace lsldg::kernels::avx2

#endif
