#include <atomic>
#include <cstdlib>
#include <cstring>

#include "droplab/simd/kernels.hpp"

namespace droplab::simd {

namespace {

Backend detect() {
    if (const char* env = std::getenv("DROPLAB_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::Avx2;
    }
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<int>& forced() {
    static std::atomic<int> value{-1};
    return value;
}

}  // namespace

const char* backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(DROPLAB_HAVE_AVX2)
    static const bool ok = __builtin_cpu_supports("avx2");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() {
    const int f = forced().load(std::memory_order_relaxed);
    if (f >= 0) return static_cast<Backend>(f);
    static const Backend detected = detect();
    return detected;
}

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
    forced().store(static_cast<int>(b), std::memory_order_relaxed);
}

#if !defined(DROPLAB_HAVE_AVX2)
double psor_row_avx2(const PsorRow& row) { return psor_row_scalar(row); }
void dot_accumulate_avx2(const double* a, const double* x, std::size_t n, double acc[4]) {
    dot_accumulate_scalar(a, x, n, acc);
}
void weighted_cdot_avx2(const double* w, const double* fr, const double* fi, const double* gr,
                        const double* gi, std::size_t n, double& re, double& im) {
    weighted_cdot_scalar(w, fr, fi, gr, gi, n, re, im);
}
#endif

double psor_row(Backend b, const PsorRow& row) {
    return b == Backend::Avx2 ? psor_row_avx2(row) : psor_row_scalar(row);
}

void dot_accumulate(Backend b, const double* a, const double* x, std::size_t n, double acc[4]) {
    if (b == Backend::Avx2)
        dot_accumulate_avx2(a, x, n, acc);
    else
        dot_accumulate_scalar(a, x, n, acc);
}

void weighted_cdot(Backend b, const double* w, const double* fr, const double* fi, const double* gr,
                   const double* gi, std::size_t n, double& re, double& im) {
    if (b == Backend::Avx2)
        weighted_cdot_avx2(w, fr, fi, gr, gi, n, re, im);
    else
        weighted_cdot_scalar(w, fr, fi, gr, gi, n, re, im);
}

}  // namespace droplab::simd
