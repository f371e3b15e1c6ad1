// AVX-512F variants. Same tiling as the AVX2 file with twice the lanes; the
// ragged end of each row uses masked loads instead of a scalar loop.
#include "sonn/kernels/kernels.hpp"

#include <immintrin.h>

namespace sonn::kernels::avx512 {
namespace {

constexpr int kLanes = 8;

inline __mmask8 tail_mask(std::size_t n) noexcept {
    return static_cast<__mmask8>((1u << n) - 1u);
}

template <int OB, int NV>
inline void correlate_tile(const CorrelateProblem& p, std::size_t o0, std::size_t m0) {
    __m512d acc[OB][NV];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int v = 0; v < NV; ++v)
            acc[j][v] = _mm512_loadu_pd(p.output + (o0 + j) * p.out_stride + m0 + kLanes * v);

    for (std::size_t c = 0; c < p.in_channels; ++c) {
        const double* x = p.input + c * p.in_stride + m0;
        const double* w[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) w[j] = p.weights + ((o0 + j) * p.in_channels + c) * p.taps;
        for (std::size_t r = 0; r < p.taps; ++r) {
            __m512d xv[NV];
            #pragma GCC unroll 16
            for (int v = 0; v < NV; ++v) xv[v] = _mm512_loadu_pd(x + r + kLanes * v);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) {
                const __m512d wv = _mm512_set1_pd(w[j][r]);
                #pragma GCC unroll 16
                for (int v = 0; v < NV; ++v) acc[j][v] = _mm512_fmadd_pd(wv, xv[v], acc[j][v]);
            }
        }
    }

    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int v = 0; v < NV; ++v)
            _mm512_storeu_pd(p.output + (o0 + j) * p.out_stride + m0 + kLanes * v, acc[j][v]);
}

template <int OB>
inline void correlate_masked(const CorrelateProblem& p, std::size_t o0, std::size_t m0, __mmask8 mask) {
    __m512d acc[OB];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) acc[j] = _mm512_maskz_loadu_pd(mask, p.output + (o0 + j) * p.out_stride + m0);

    for (std::size_t c = 0; c < p.in_channels; ++c) {
        const double* x = p.input + c * p.in_stride + m0;
        const double* w[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) w[j] = p.weights + ((o0 + j) * p.in_channels + c) * p.taps;
        for (std::size_t r = 0; r < p.taps; ++r) {
            const __m512d xv = _mm512_maskz_loadu_pd(mask, x + r);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) acc[j] = _mm512_fmadd_pd(_mm512_set1_pd(w[j][r]), xv, acc[j]);
        }
    }
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) _mm512_mask_storeu_pd(p.output + (o0 + j) * p.out_stride + m0, mask, acc[j]);
}

template <int OB>
void correlate_rows(const CorrelateProblem& p, std::size_t o0) {
    std::size_t m = 0;
    for (; m + 6 * kLanes <= p.length; m += 6 * kLanes) correlate_tile<OB, 6>(p, o0, m);
    for (; m + 3 * kLanes <= p.length; m += 3 * kLanes) correlate_tile<OB, 3>(p, o0, m);
    for (; m + kLanes <= p.length; m += kLanes) correlate_tile<OB, 1>(p, o0, m);
    if (m < p.length) correlate_masked<OB>(p, o0, m, tail_mask(p.length - m));
}

template <int OB, int RB>
inline void weight_grad_tile(const WeightGradProblem& p, std::size_t o0, std::size_t c, std::size_t r0) {
    __m512d acc[OB][RB];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j)
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) acc[j][k] = _mm512_setzero_pd();

    const double* x = p.input + c * p.in_stride + r0;
    const double* g[OB];
    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) g[j] = p.grad + (o0 + j) * p.grad_stride;

    std::size_t m = 0;
    for (; m + kLanes <= p.length; m += kLanes) {
        __m512d gv[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) gv[j] = _mm512_loadu_pd(g[j] + m);
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) {
            const __m512d xv = _mm512_loadu_pd(x + m + k);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) acc[j][k] = _mm512_fmadd_pd(gv[j], xv, acc[j][k]);
        }
    }
    if (m < p.length) {
        const __mmask8 mask = tail_mask(p.length - m);
        __m512d gv[OB];
        #pragma GCC unroll 16
        for (int j = 0; j < OB; ++j) gv[j] = _mm512_maskz_loadu_pd(mask, g[j] + m);
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) {
            const __m512d xv = _mm512_maskz_loadu_pd(mask, x + m + k);
            #pragma GCC unroll 16
            for (int j = 0; j < OB; ++j) acc[j][k] = _mm512_fmadd_pd(gv[j], xv, acc[j][k]);
        }
    }

    #pragma GCC unroll 16
    for (int j = 0; j < OB; ++j) {
        double* dw = p.weight_grad + ((o0 + j) * p.in_channels + c) * p.taps + r0;
        #pragma GCC unroll 16
        for (int k = 0; k < RB; ++k) dw[k] += _mm512_reduce_add_pd(acc[j][k]);
    }
}

template <int OB>
void weight_grad_rows(const WeightGradProblem& p, std::size_t o0) {
    for (std::size_t c = 0; c < p.in_channels; ++c) {
        std::size_t r = 0;
        for (; r + 8 <= p.taps; r += 8) weight_grad_tile<OB, 8>(p, o0, c, r);
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

}  // namespace sonn::kernels::avx512
