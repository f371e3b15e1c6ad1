// AVX2 + FMA variants. Compiled with -mavx2 -mfma; only reached through the
// dispatcher after a CPUID check.
#include "sonn/kernels/kernels.hpp"

#include <immintrin.h>

namespace sonn::kernels::avx2 {
namespace {

constexpr int kLanes = 4;

inline double hsum(__m256d v) noexcept {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    const __m128d high = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, high));
}

// OB output rows x NV vectors of output positions, accumulated in registers
// across every (channel, tap) pair.
template <int OB, int NV>
inline void correlate_tile(const CorrelateProblem& p, std::size_t o0, std::size_t m0) {
    __m256d acc[OB][NV];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int v = 0; v < NV; ++v)
            acc[j][v] = _mm256_loadu_pd(p.output + (o0 + j) * p.out_stride + m0 + kLanes * v);

    for (std::size_t c = 0; c < p.in_channels; ++c) {
        const double* x = p.input + c * p.in_stride + m0;
        const double* w[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) w[j] = p.weights + ((o0 + j) * p.in_channels + c) * p.taps;
        for (std::size_t r = 0; r < p.taps; ++r) {
            __m256d xv[NV];
            #pragma GCC unroll 16
            for (int v = 0; v < NV; ++v) xv[v] = _mm256_loadu_pd(x + r + kLanes * v);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) {
                const __m256d wv = _mm256_broadcast_sd(w[j] + r);
                #pragma GCC unroll 16
                for (int v = 0; v < NV; ++v) acc[j][v] = _mm256_fmadd_pd(wv, xv[v], acc[j][v]);
            }
        }
    }

    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int v = 0; v < NV; ++v)
            _mm256_storeu_pd(p.output + (o0 + j) * p.out_stride + m0 + kLanes * v, acc[j][v]);
}

inline void correlate_tail(const CorrelateProblem& p, std::size_t o0, int rows, std::size_t m0) {
    #pragma GCC unroll 16
    for (int j = 0; j < rows; ++j) {
        double* out = p.output + (o0 + j) * p.out_stride;
        for (std::size_t m = m0; m < p.length; ++m) {
            double acc = out[m];
            for (std::size_t c = 0; c < p.in_channels; ++c) {
                const double* x = p.input + c * p.in_stride + m;
                const double* w = p.weights + ((o0 + j) * p.in_channels + c) * p.taps;
                for (std::size_t r = 0; r < p.taps; ++r) acc += w[r] * x[r];
            }
            out[m] = acc;
        }
    }
}

template <int OB>
void correlate_rows(const CorrelateProblem& p, std::size_t o0) {
    std::size_t m = 0;
    for (; m + 3 * kLanes <= p.length; m += 3 * kLanes) correlate_tile<OB, 3>(p, o0, m);
    for (; m + kLanes <= p.length; m += kLanes) correlate_tile<OB, 1>(p, o0, m);
    if (m < p.length) correlate_tail(p, o0, OB, m);
}

template <int OB, int RB>
inline void weight_grad_tile(const WeightGradProblem& p, std::size_t o0, std::size_t c, std::size_t r0) {
    __m256d acc[OB][RB];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) acc[j][k] = _mm256_setzero_pd();

    const double* x = p.input + c * p.in_stride + r0;
    const double* g[OB];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) g[j] = p.grad + (o0 + j) * p.grad_stride;

    std::size_t m = 0;
    for (; m + kLanes <= p.length; m += kLanes) {
        __m256d gv[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) gv[j] = _mm256_loadu_pd(g[j] + m);
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) {
            const __m256d xv = _mm256_loadu_pd(x + m + k);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) acc[j][k] = _mm256_fmadd_pd(gv[j], xv, acc[j][k]);
        }
    }
    double tail[OB][RB] = {};
    for (; m < p.length; ++m)
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j)
            #pragma GCC unroll 16
            for (int k = 0; k < RB; ++k) tail[j][k] += g[j][m] * x[m + k];

    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) {
        double* dw = p.weight_grad + ((o0 + j) * p.in_channels + c) * p.taps + r0;
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) dw[k] += hsum(acc[j][k]) + tail[j][k];
    }
}

template <int OB>
void weight_grad_rows(const WeightGradProblem& p, std::size_t o0) {
    for (std::size_t c = 0; c < p.in_channels; ++c) {
        std::size_t r = 0;
        for (; r + 4 <= p.taps; r += 4) weight_grad_tile<OB, 4>(p, o0, c, r);
        for (; r < p.taps; ++r) weight_grad_tile<OB, 1>(p, o0, c, r);
    }
}

}  // namespace

void correlate(const CorrelateProblem& p) {
    std::size_t o = 0;
    for (; o + 4 <= p.out_channels; o += 4) correlate_rows<4>(p, o);
    switch (p.out_channels - o) {
        case 3: correlate_rows<3>(p, o); break;
        case 2: correlate_rows<2>(p, o); break;
        case 1: correlate_rows<1>(p, o); break;
        default: break;
    }
}

void weight_grad(const WeightGradProblem& p) {
    std::size_t o = 0;
    for (; o + 2 <= p.out_channels; o += 2) weight_grad_rows<2>(p, o);
    if (o < p.out_channels) weight_grad_rows<1>(p, o);
}

}  // namespace sonn::kernels::avx2
