#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant.
//
// Every variant follows the same floating-point evaluation order: no fused
// multiply-add, and reductions accumulate into four interleaved lanes that
// are combined as (l0 + l1) + (l2 + l3). The variants are therefore
// bit-identical, which the equivalence tests check.

#include <cstddef>
#include <cstdint>

namespace droplab::simd {

enum class Backend { Scalar, Avx2 };

const char* backend_name(Backend b);
bool avx2_available();

/// Backend used by the library. Defaults to the best one the CPU supports;
/// the environment variable DROPLAB_SIMD=scalar|avx2 overrides.
Backend active_backend();
/// Test hook: pin the backend for the rest of the process.
void force_backend(Backend b);

/// One colour of a red-black projected SOR sweep over a single grid row.
///
/// Updates u[i] for i in [i_begin, i_end) with (i & 1) == parity:
///   avg  = 0.25 * ((u[i+1] + u[i-1]) + (up[i] + down[i]))
///   cand = u[i] + omega * (avg - u[i])
///   u[i] = constrained[i] ? min(cand, obstacle[i]) : cand
/// Returns the largest |update| in the row.
struct PsorRow {
    double* u;
    const double* up;
    const double* down;
    const double* obstacle;
    const std::uint8_t* constrained;
    int i_begin;
    int i_end;
    int parity;
    double omega;
};

double psor_row(Backend b, const PsorRow& row);
double psor_row_scalar(const PsorRow& row);
double psor_row_avx2(const PsorRow& row);

/// Lane-striped dot product accumulation: acc[k] += a[4c+k] * b[4c+k].
/// A trailing partial chunk fills the low lanes.
void dot_accumulate(Backend b, const double* a, const double* x, std::size_t n, double acc[4]);
void dot_accumulate_scalar(const double* a, const double* x, std::size_t n, double acc[4]);
void dot_accumulate_avx2(const double* a, const double* x, std::size_t n, double acc[4]);

inline double lane_sum(const double acc[4]) { return (acc[0] + acc[1]) + (acc[2] + acc[3]); }

/// Weighted complex inner product sum_k w[k] * f[k] * conj(g[k]) with split
/// real/imaginary storage. Result written to (re, im).
void weighted_cdot(Backend b, const double* w, const double* fr, const double* fi, const double* gr,
                   const double* gi, std::size_t n, double& re, double& im);
void weighted_cdot_scalar(const double* w, const double* fr, const double* fi, const double* gr,
                          const double* gi, std::size_t n, double& re, double& im);
void weighted_cdot_avx2(const double* w, const double* fr, const double* fi, const double* gr,
                        const double* gi, std::size_t n, double& re, double& im);

}  // namespace droplab::simd
