#include "sonn/gradcheck.hpp"

#include "sonn/nn.hpp"
#include "sonn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>

namespace sonn {
namespace {

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

void fill_uniform(Rng& rng, std::span<double> v, double lo, double hi) {
    for (double& x : v) x = uniform(rng, lo, hi);
}

// Values on a jittered grid so no two differ by less than the probe step;
// keeps max-pool argmax stable under the finite-difference perturbation.
void fill_distinct(Rng& rng, std::span<double> v) {
    std::vector<std::size_t> perm(v.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 2.0 * (static_cast<double>(perm[i]) + 0.25 + 0.5 * uniform01(rng)) / n - 1.0;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Max relative error between `analytic` and central differences of `loss`
// with respect to every entry of `params`.
double compare(std::span<double> params, std::span<const double> analytic, const std::function<double()>& loss,
               double step) {
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double up = loss();
        params[i] = saved - step;
        const double down = loss();
        params[i] = saved;
        worst = std::max(worst, gradient_relative_error(analytic[i], (up - down) / (2.0 * step)));
    }
    return worst;
}

double check_gen_conv(Rng& rng, double step) {
    const std::size_t in = pick(rng, 1, 3), out = pick(rng, 1, 3), k = pick(rng, 1, 5), q = pick(rng, 1, 4);
    const std::size_t m = pick(rng, 1, 16);
    GenerativeConvLayer layer(in, out, k, q);
    fill_uniform(rng, layer.weights(), -0.5, 0.5);
    fill_uniform(rng, layer.biases(), -0.5, 0.5);
    FeatureMaps x(in, m);
    fill_uniform(rng, x.values, -1.0, 1.0);
    std::vector<double> proj(out * m);
    fill_uniform(rng, proj, -1.0, 1.0);
    auto loss = [&] { return dot(gen_conv_forward(layer, x).values, proj); };

    FeatureMaps g(out, m);
    g.values = proj;
    const ConvGradients grads = gen_conv_backward(layer, x, g);
    double worst = compare(layer.weights(), grads.weights, loss, step);
    worst = std::max(worst, compare(layer.biases(), grads.biases, loss, step));
    return std::max(worst, compare(x.values, grads.input.values, loss, step));
}

double check_maxpool(Rng& rng, double step) {
    const std::size_t n = pick(rng, 1, 3), factor = pick(rng, 1, 8);
    const std::size_t m = factor * pick(rng, 1, 4) + pick(rng, 0, factor - 1);
    FeatureMaps x(n, m);
    fill_distinct(rng, x.values);
    const std::size_t out_len = m / factor;
    std::vector<double> proj(n * out_len);
    fill_uniform(rng, proj, -1.0, 1.0);
    auto loss = [&] { return dot(maxpool_forward(x, factor).maps.values, proj); };
    const PoolResult fwd = maxpool_forward(x, factor);
    FeatureMaps g(n, out_len);
    g.values = proj;
    return compare(x.values, maxpool_backward(fwd.indices, g).values, loss, step);
}

double check_global_pool(Rng& rng, double step) {
    FeatureMaps x(pick(rng, 1, 4), pick(rng, 1, 16));
    fill_distinct(rng, x.values);
    std::vector<double> proj(x.neurons);
    fill_uniform(rng, proj, -1.0, 1.0);
    auto loss = [&] { return dot(global_pool(x).maps.values, proj); };
    const PoolResult fwd = global_pool(x);
    return compare(x.values, global_pool_backward(fwd.indices, proj).values, loss, step);
}

double check_tanh(Rng& rng, double step) {
    std::vector<double> x(pick(rng, 1, 32));
    fill_uniform(rng, x, -3.0, 3.0);
    std::vector<double> proj(x.size());
    fill_uniform(rng, proj, -1.0, 1.0);
    auto loss = [&] {
        std::vector<double> y = x;
        tanh_forward(y);
        return dot(y, proj);
    };
    std::vector<double> y = x;
    tanh_forward(y);
    std::vector<double> g = proj;
    tanh_backward(y, g);
    return compare(x, g, loss, step);
}

double check_dense(Rng& rng, double step) {
    DenseLayer layer(pick(rng, 1, 8), pick(rng, 1, 8));
    fill_uniform(rng, layer.weights(), -1.0, 1.0);
    fill_uniform(rng, layer.biases(), -1.0, 1.0);
    std::vector<double> x(layer.in_size());
    fill_uniform(rng, x, -1.0, 1.0);
    std::vector<double> proj(layer.out_size());
    fill_uniform(rng, proj, -1.0, 1.0);
    auto loss = [&] { return dot(dense_forward(layer, x), proj); };
    const DenseGradients g = dense_backward(layer, x, proj);
    double worst = compare(layer.weights(), g.weights, loss, step);
    worst = std::max(worst, compare(layer.biases(), g.biases, loss, step));
    return std::max(worst, compare(x, g.input, loss, step));
}

}  // namespace

double gradient_relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    return std::abs(analytic - numeric) / scale;
}

std::vector<GradCheckResult> run_gradient_checks(std::uint64_t seed, std::size_t instances, double step) {
    using Check = double (*)(Rng&, double);
    const std::pair<const char*, Check> checks[] = {{"gen_conv", &check_gen_conv},
                                                    {"maxpool", &check_maxpool},
                                                    {"global_pool", &check_global_pool},
                                                    {"tanh", &check_tanh},
                                                    {"dense", &check_dense}};
    std::vector<GradCheckResult> results;
    std::uint64_t salt = 0;
    for (const auto& [name, fn] : checks) {
        GradCheckResult r{name, instances, 0.0};
        for (std::size_t i = 0; i < instances; ++i) {
            Rng rng(derive_seed({seed, salt, i}));
            r.max_rel_error = std::max(r.max_rel_error, fn(rng, step));
        }
        results.push_back(r);
        ++salt;
    }
    return results;
}

}  // namespace sonn
