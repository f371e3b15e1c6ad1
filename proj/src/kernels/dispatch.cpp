#include "sonn/kernels/kernels.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace sonn::kernels {
namespace {

constexpr KernelTable kScalar{Isa::Scalar, &scalar::correlate, &scalar::weight_grad};
#if defined(SONN_HAVE_X86_KERNELS)
constexpr KernelTable kAvx2{Isa::Avx2, &avx2::correlate, &avx2::weight_grad};
constexpr KernelTable kAvx512{Isa::Avx512, &avx512::correlate, &avx512::weight_grad};
#endif

const KernelTable& pick() {
    Isa best = Isa::Scalar;
    if (supported(Isa::Avx512)) {
        best = Isa::Avx512;
    } else if (supported(Isa::Avx2)) {
        best = Isa::Avx2;
    }
    if (const char* forced = std::getenv("SONN_SIMD")) {
        const std::string want(forced);
        if (want == "scalar") {
            best = Isa::Scalar;
        } else if (want == "avx2" && supported(Isa::Avx2)) {
            best = Isa::Avx2;
        }
    }
    return table(best);
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Avx512: return "avx512";
    }
    return "unknown";
}

bool supported(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar: return true;
#if defined(SONN_HAVE_X86_KERNELS)
        case Isa::Avx2: return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
        case Isa::Avx512: return __builtin_cpu_supports("avx512f") && __builtin_cpu_supports("avx2") &&
                                 __builtin_cpu_supports("fma");
#else
        default: return false;
#endif
    }
    return false;
}

const KernelTable& table(Isa isa) {
    if (!supported(isa)) {
        throw std::invalid_argument("kernel ISA not supported on this machine: " + std::string(isa_name(isa)));
    }
    switch (isa) {
#if defined(SONN_HAVE_X86_KERNELS)
        case Isa::Avx2: return kAvx2;
        case Isa::Avx512: return kAvx512;
#endif
        default: return kScalar;
    }
}

const KernelTable& active() {
    static const KernelTable& chosen = pick();
    return chosen;
}

}  // namespace sonn::kernels
