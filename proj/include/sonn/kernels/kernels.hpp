#pragma once

// Multi-channel 1D correlation kernels used by the generative convolution.
//
// Every trainable inner loop of the network reduces to one of two shapes:
//
//   correlate:    out[o][m]    += sum_c sum_r w[o][c][r] * in[c][m + r]
//   weight_grad:  dw[o][c][r]  += sum_m g[o][m] * in[c][m + r]
//
// The scalar variant is the reference. SIMD variants must agree with it to
// rounding (they reorder the summation) and are selected once at runtime.

#include <cstddef>
#include <string_view>

namespace sonn::kernels {

enum class Isa { Scalar, Avx2, Avx512 };

std::string_view isa_name(Isa isa) noexcept;

struct CorrelateProblem {
    const double* input = nullptr;  ///< in_channels rows, each readable for length + taps - 1
    std::size_t in_channels = 0;
    std::size_t in_stride = 0;
    const double* weights = nullptr;  ///< [out_channels][in_channels][taps]
    std::size_t out_channels = 0;
    std::size_t taps = 0;
    double* output = nullptr;  ///< accumulated into, not overwritten
    std::size_t out_stride = 0;
    std::size_t length = 0;
};

struct WeightGradProblem {
    const double* input = nullptr;  ///< [in_channels][in_stride], readable for length + taps - 1
    std::size_t in_channels = 0;
    std::size_t in_stride = 0;
    const double* grad = nullptr;  ///< [out_channels][grad_stride]
    std::size_t out_channels = 0;
    std::size_t grad_stride = 0;
    double* weight_grad = nullptr;  ///< [out_channels][in_channels][taps], accumulated into
    std::size_t taps = 0;
    std::size_t length = 0;
};

using CorrelateFn = void (*)(const CorrelateProblem&);
using WeightGradFn = void (*)(const WeightGradProblem&);

struct KernelTable {
    Isa isa;
    CorrelateFn correlate;
    WeightGradFn weight_grad;
};

/// True when both the build and the running CPU support `isa`.
bool supported(Isa isa) noexcept;

/// Table for a specific ISA. Throws std::invalid_argument when unsupported.
const KernelTable& table(Isa isa);

/// Best supported table, picked on first use. The SONN_SIMD environment
/// variable (scalar, avx2, avx512) forces a lower level.
const KernelTable& active();

namespace scalar {
void correlate(const CorrelateProblem& p);
void weight_grad(const WeightGradProblem& p);
}  // namespace scalar

namespace avx2 {
void correlate(const CorrelateProblem& p);
void weight_grad(const WeightGradProblem& p);
}  // namespace avx2

namespace avx512 {
void correlate(const CorrelateProblem& p);
void weight_grad(const WeightGradProblem& p);
}  // namespace avx512

}  // namespace sonn::kernels
