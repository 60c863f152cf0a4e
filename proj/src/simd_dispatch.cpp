#include "phrasevec/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace phrasevec::simd {

namespace {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale)(double, double*, std::size_t);
};

constexpr KernelTable kScalarTable{
    detail::dot_scalar, detail::sumsq_scalar, detail::axpy_scalar, detail::scale_scalar};

#if defined(__x86_64__)
constexpr KernelTable kAvx2Table{
    detail::dot_avx2, detail::sumsq_avx2, detail::axpy_avx2, detail::scale_avx2};
#endif

Level detect_level() {
    if (const char* env = std::getenv("PHRASEVEC_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Level::scalar;
        if (std::strcmp(env, "avx2") == 0) {
#if defined(__x86_64__)
            if (detail::cpu_has_avx2()) return Level::avx2;
#endif
            return Level::scalar;
        }
        // Unknown value falls through to autodetection.
    }
#if defined(__x86_64__)
    if (detail::cpu_has_avx2()) return Level::avx2;
#endif
    return Level::scalar;
}

std::atomic<Level> g_level{detect_level()};

const KernelTable& table_for(Level level) {
#if defined(__x86_64__)
    if (level == Level::avx2) return kAvx2Table;
#else
    (void)level;
#endif
    return kScalarTable;
}

}  // namespace

const char* level_name(Level level) {
    switch (level) {
        case Level::scalar: return "scalar";
        case Level::avx2: return "avx2";
    }
    return "?";
}

Level active_level() { return g_level.load(std::memory_order_relaxed); }

void force_level(Level level) { g_level.store(level, std::memory_order_relaxed); }

double dot(const double* x, const double* y, std::size_t n) {
    return table_for(active_level()).dot(x, y, n);
}

double sumsq(const double* x, std::size_t n) {
    return table_for(active_level()).sumsq(x, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    table_for(active_level()).axpy(a, x, y, n);
}

void scale(double a, double* x, std::size_t n) {
    table_for(active_level()).scale(a, x, n);
}

}  // namespace phrasevec::simd
