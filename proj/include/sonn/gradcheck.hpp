#pragma once

// Central finite-difference check of every layer's backward pass on small
// random instances. Backs the `gradcheck` command.

#include <cstdint>
#include <string>
#include <vector>

namespace sonn {

struct GradCheckResult {
    std::string layer;
    std::size_t instances = 0;
    double max_rel_error = 0.0;
};

/// |a - n| / max(|a|, |n|, 1e-4). The floor keeps near-zero gradients from
/// turning rounding noise into large ratios.
double gradient_relative_error(double analytic, double numeric);

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed, std::size_t instances, double step = 1e-5);

}  // namespace sonn
