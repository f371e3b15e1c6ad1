#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sonn/kernels/kernels.hpp"
#include "test_support.hpp"

#include <cmath>
#include <vector>

using namespace sonn::kernels;

namespace {

struct Shape {
    std::size_t in, out, taps, length;
};

const Shape kShapes[] = {
    {1, 1, 1, 1},   {1, 1, 3, 5},    {2, 16, 41, 1000}, {16, 12, 41, 125}, {12, 8, 9, 15}, {3, 5, 7, 17},
    {1, 7, 2, 33},  {5, 3, 41, 9},   {4, 9, 11, 64},    {2, 1, 5, 7},      {9, 2, 1, 31},  {6, 13, 4, 250},
};

// Reference sums without reassociation, accumulated in long double.
void naive_correlate(const CorrelateProblem& p) {
    for (std::size_t o = 0; o < p.out_channels; ++o)
        for (std::size_t m = 0; m < p.length; ++m) {
            long double s = 0;
            for (std::size_t c = 0; c < p.in_channels; ++c)
                for (std::size_t r = 0; r < p.taps; ++r)
                    s += static_cast<long double>(p.weights[(o * p.in_channels + c) * p.taps + r]) *
                         p.input[c * p.in_stride + m + r];
            p.output[o * p.out_stride + m] += static_cast<double>(s);
        }
}

double tolerance(double magnitude) { return 1e-12 * std::max(1.0, magnitude); }

}  // namespace

TEST_CASE("correlate agrees with a direct sum for every supported isa") {
    oracle::Rng rng(11);
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512}) {
        if (!supported(isa)) continue;
        CAPTURE(isa_name(isa));
        for (const Shape& s : kShapes) {
            const std::size_t stride = s.length + s.taps - 1 + 3;
            auto in = oracle::random_vector(rng, s.in * stride);
            auto w = oracle::random_vector(rng, s.out * s.in * s.taps);
            auto base = oracle::random_vector(rng, s.out * (s.length + 2));
            auto expect = base;
            auto got = base;
            CorrelateProblem p{in.data(), s.in, stride, w.data(), s.out, s.taps, expect.data(), s.length + 2,
                               s.length};
            naive_correlate(p);
            p.output = got.data();
            table(isa).correlate(p);
            const double scale = static_cast<double>(s.in * s.taps);
            CHECK(oracle::max_abs_diff(expect, got) <= tolerance(scale));
        }
    }
}

TEST_CASE("weight_grad agrees with the scalar reference for every supported isa") {
    oracle::Rng rng(12);
    for (Isa isa : {Isa::Avx2, Isa::Avx512}) {
        if (!supported(isa)) continue;
        CAPTURE(isa_name(isa));
        for (const Shape& s : kShapes) {
            const std::size_t stride = s.length + s.taps - 1 + 1;
            auto in = oracle::random_vector(rng, s.in * stride);
            auto g = oracle::random_vector(rng, s.out * (s.length + 5));
            auto base = oracle::random_vector(rng, s.out * s.in * s.taps);
            auto expect = base;
            auto got = base;
            WeightGradProblem p{in.data(), s.in, stride, g.data(), s.out, s.length + 5, expect.data(), s.taps,
                                s.length};
            table(Isa::Scalar).weight_grad(p);
            p.weight_grad = got.data();
            table(isa).weight_grad(p);
            CHECK(oracle::max_abs_diff(expect, got) <= tolerance(static_cast<double>(s.length)));
        }
    }
}

TEST_CASE("kernels accumulate instead of overwriting") {
    for (Isa isa : {Isa::Scalar, Isa::Avx2, Isa::Avx512}) {
        if (!supported(isa)) continue;
        std::vector<double> in(10, 0.0);
        std::vector<double> w(3, 1.0);
        std::vector<double> out(8, 2.5);
        table(isa).correlate({in.data(), 1, 10, w.data(), 1, 3, out.data(), 8, 8});
        for (double v : out) CHECK(v == 2.5);
    }
}

TEST_CASE("scalar is always available and active picks a supported table") {
    CHECK(supported(Isa::Scalar));
    CHECK(supported(active().isa));
    CHECK(table(Isa::Scalar).isa == Isa::Scalar);
}
