#include "phrasevec/simd.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

// Compiled without -mavx2; each kernel carries a function-level target
// attribute so the TU stays safe to link on any x86-64 host. Callers reach
// these only after the dispatcher has checked CPUID.

namespace phrasevec::simd::detail {

bool cpu_has_avx2() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

__attribute__((target("avx2,fma")))
double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    double lanes[4];
    _mm256_storeu_pd(lanes, acc0);
    double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

__attribute__((target("avx2,fma")))
double sumsq_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(x + i);
        __m256d v1 = _mm256_loadu_pd(x + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    acc0 = _mm256_add_pd(acc0, acc1);
    double lanes[4];
    _mm256_storeu_pd(lanes, acc0);
    double acc = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

__attribute__((target("avx2,fma")))
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) x[i] *= a;
}

}  // namespace phrasevec::simd::detail

#endif  // __x86_64__
