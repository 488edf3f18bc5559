#include <cmath>

#include "droplab/simd/kernels.hpp"

namespace droplab::simd {

double psor_row_scalar(const PsorRow& r) {
    double max_update = 0.0;
    int i = r.i_begin;
    if ((i & 1) != r.parity) ++i;
    for (; i < r.i_end; i += 2) {
        const double old = r.u[i];
        const double avg = 0.25 * ((r.u[i + 1] + r.u[i - 1]) + (r.up[i] + r.down[i]));
        double cand = old + r.omega * (avg - old);
        if (r.constrained[i] && !(cand < r.obstacle[i])) cand = r.obstacle[i];
        const double d = std::fabs(cand - old);
        if (d > max_update) max_update = d;
        r.u[i] = cand;
    }
    return max_update;
}

void dot_accumulate_scalar(const double* a, const double* x, std::size_t n, double acc[4]) {
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        acc[0] += a[k] * x[k];
        acc[1] += a[k + 1] * x[k + 1];
        acc[2] += a[k + 2] * x[k + 2];
        acc[3] += a[k + 3] * x[k + 3];
    }
    for (std::size_t lane = 0; k < n; ++k, ++lane) acc[lane] += a[k] * x[k];
}

void weighted_cdot_scalar(const double* w, const double* fr, const double* fi, const double* gr,
                          const double* gi, std::size_t n, double& re, double& im) {
    double ar[4] = {0, 0, 0, 0};
    double ai[4] = {0, 0, 0, 0};
    std::size_t k = 0;
    auto step = [&](std::size_t idx, int lane) {
        ar[lane] += w[idx] * (fr[idx] * gr[idx] + fi[idx] * gi[idx]);
        ai[lane] += w[idx] * (fi[idx] * gr[idx] - fr[idx] * gi[idx]);
    };
    for (; k + 4 <= n; k += 4)
        for (int lane = 0; lane < 4; ++lane) step(k + lane, lane);
    for (int lane = 0; k < n; ++k, ++lane) step(k, lane);
    re = lane_sum(ar);
    im = lane_sum(ai);
}

}  // namespace droplab::simd
