#pragma once

// Double-precision vector kernels behind a runtime-dispatched interface.
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2 variant; the active variant is picked once per process from CPUID
// (override with the PHRASEVEC_SIMD environment variable or force_level()).
// The scalar and AVX2 paths are equivalence-tested against each other:
// element-wise kernels agree to ~1 ulp, reductions to the reassociation
// error of the accumulator split.

#include <cstddef>

namespace phrasevec::simd {

enum class Level { scalar, avx2 };

const char* level_name(Level level);

// Level in use for subsequent kernel calls. Resolved on first use.
Level active_level();

// Pin the dispatch to one level (tests, reproducing a run from another host).
void force_level(Level level);

// x . y
double dot(const double* x, const double* y, std::size_t n);

// sum of squares of x
double sumsq(const double* x, std::size_t n);

// y += a * x
void axpy(double a, const double* x, double* y, std::size_t n);

// x *= a
void scale(double a, double* x, std::size_t n);

namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double sumsq_scalar(const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
void scale_scalar(double a, double* x, std::size_t n);

#if defined(__x86_64__)
bool cpu_has_avx2();
double dot_avx2(const double* x, const double* y, std::size_t n);
double sumsq_avx2(const double* x, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void scale_avx2(double a, double* x, std::size_t n);
#endif

}  // namespace detail

}  // namespace phrasevec::simd
