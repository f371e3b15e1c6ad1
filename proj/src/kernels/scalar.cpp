#include "sonn/kernels/kernels.hpp"

namespace sonn::kernels::scalar {

void correlate(const CorrelateProblem& p) {
    for (std::size_t o = 0; o < p.out_channels; ++o) {
        double* out = p.output + o * p.out_stride;
        for (std::size_t c = 0; c < p.in_channels; ++c) {
            const double* x = p.input + c * p.in_stride;
            const double* w = p.weights + (o * p.in_channels + c) * p.taps;
            for (std::size_t m = 0; m < p.length; ++m) {
                double acc = 0.0;
                for (std::size_t r = 0; r < p.taps; ++r) acc += w[r] * x[m + r];
                out[m] += acc;
            }
        }
    }
}

void weight_grad(const WeightGradProblem& p) {
    for (std::size_t o = 0; o < p.out_channels; ++o) {
        const double* g = p.grad + o * p.grad_stride;
        for (std::size_t c = 0; c < p.in_channels; ++c) {
            const double* x = p.input + c * p.in_stride;
            double* dw = p.weight_grad + (o * p.in_channels + c) * p.taps;
            for (std::size_t r = 0; r < p.taps; ++r) {
                double acc = 0.0;
                for (std::size_t m = 0; m < p.length; ++m) acc += g[m] * x[m + r];
                dw[r] += acc;
            }
        }
    }
}

}  // namespace sonn::kernels::scalar
