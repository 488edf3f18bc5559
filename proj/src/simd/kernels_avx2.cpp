#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "droplab/simd/kernels.hpp"

namespace droplab::simd {

namespace {

inline double hmax(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    double m = lanes[0];
    for (int k = 1; k < 4; ++k)
        if (lanes[k] > m) m = lanes[k];
    return m;
}

inline __m256d load_byte_mask(const std::uint8_t* p) {
    std::int32_t bytes;
    std::memcpy(&bytes, p, 4);
    const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(bytes));
    const __m256i on = _mm256_cmpgt_epi64(wide, _mm256_setzero_si256());
    return _mm256_castsi256_pd(on);
}

inline __m256i tail_mask(std::size_t rem) {
    alignas(32) long long m[4];
    for (std::size_t k = 0; k < 4; ++k) m[k] = k < rem ? -1 : 0;
    return _mm256_load_si256(reinterpret_cast<const __m256i*>(m));
}

}  // namespace

double psor_row_avx2(const PsorRow& r) {
    const __m256d quarter = _mm256_set1_pd(0.25);
    const __m256d omega = _mm256_set1_pd(r.omega);
    const __m256d sign = _mm256_set1_pd(-0.0);
    // Lane k of a chunk starting at i holds node i + k.
    const __m256d even_lanes = _mm256_castsi256_pd(_mm256_setr_epi64x(-1, 0, -1, 0));
    const __m256d odd_lanes = _mm256_castsi256_pd(_mm256_setr_epi64x(0, -1, 0, -1));
    __m256d vmax = _mm256_setzero_pd();

    int i = r.i_begin;
    for (; i + 4 <= r.i_end; i += 4) {
        const __m256d old = _mm256_loadu_pd(r.u + i);
        const __m256d east = _mm256_loadu_pd(r.u + i + 1);
        const __m256d west = _mm256_loadu_pd(r.u + i - 1);
        const __m256d north = _mm256_loadu_pd(r.up + i);
        const __m256d south = _mm256_loadu_pd(r.down + i);
        const __m256d avg =
            _mm256_mul_pd(quarter, _mm256_add_pd(_mm256_add_pd(east, west), _mm256_add_pd(north, south)));
        __m256d cand = _mm256_add_pd(old, _mm256_mul_pd(omega, _mm256_sub_pd(avg, old)));
        const __m256d obst = _mm256_loadu_pd(r.obstacle + i);
        const __m256d projected = _mm256_min_pd(cand, obst);
        cand = _mm256_blendv_pd(cand, projected, load_byte_mask(r.constrained + i));
        const __m256d select = ((i & 1) == r.parity) ? even_lanes : odd_lanes;
        const __m256d next = _mm256_blendv_pd(old, cand, select);
        vmax = _mm256_max_pd(vmax, _mm256_andnot_pd(sign, _mm256_sub_pd(next, old)));
        _mm256_storeu_pd(r.u + i, next);
    }
    double max_update = hmax(vmax);
    if (i < r.i_end) {
        PsorRow tail = r;
        tail.i_begin = i;
        const double t = psor_row_scalar(tail);
        if (t > max_update) max_update = t;
    }
    return max_update;
}

void dot_accumulate_avx2(const double* a, const double* x, std::size_t n, double acc[4]) {
    __m256d vacc = _mm256_loadu_pd(acc);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(_mm256_loadu_pd(a + k), _mm256_loadu_pd(x + k)));
    if (k < n) {
        const __m256i m = tail_mask(n - k);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(_mm256_maskload_pd(a + k, m), _mm256_maskload_pd(x + k, m)));
    }
    _mm256_storeu_pd(acc, vacc);
}

void weighted_cdot_avx2(const double* w, const double* fr, const double* fi, const double* gr,
                        const double* gi, std::size_t n, double& re, double& im) {
    __m256d ar = _mm256_setzero_pd();
    __m256d ai = _mm256_setzero_pd();
    auto step = [&](__m256d vw, __m256d vfr, __m256d vfi, __m256d vgr, __m256d vgi) {
        ar = _mm256_add_pd(ar, _mm256_mul_pd(vw, _mm256_add_pd(_mm256_mul_pd(vfr, vgr), _mm256_mul_pd(vfi, vgi))));
        ai = _mm256_add_pd(ai, _mm256_mul_pd(vw, _mm256_sub_pd(_mm256_mul_pd(vfi, vgr), _mm256_mul_pd(vfr, vgi))));
    };
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4)
        step(_mm256_loadu_pd(w + k), _mm256_loadu_pd(fr + k), _mm256_loadu_pd(fi + k), _mm256_loadu_pd(gr + k),
             _mm256_loadu_pd(gi + k));
    if (k < n) {
        // Masked-off lanes keep their previous partial sums.
        const __m256i m = tail_mask(n - k);
        const __m256d keep = _mm256_castsi256_pd(m);
        __m256d sr = ar, si = ai;
        step(_mm256_maskload_pd(w + k, m), _mm256_maskload_pd(fr + k, m), _mm256_maskload_pd(fi + k, m),
             _mm256_maskload_pd(gr + k, m), _mm256_maskload_pd(gi + k, m));
        ar = _mm256_blendv_pd(sr, ar, keep);
        ai = _mm256_blendv_pd(si, ai, keep);
    }
    alignas(32) double lr[4], li[4];
    _mm256_store_pd(lr, ar);
    _mm256_store_pd(li, ai);
    re = lane_sum(lr);
    im = lane_sum(li);
}

}  // namespace droplab::simd
