#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace oracle {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

std::vector<double> conv_forward(const std::vector<double>& in, std::size_t n_in, std::size_t m,
                                 const std::vector<double>& w, const std::vector<double>& b, std::size_t n_out,
                                 std::size_t k) {
    const long pad = static_cast<long>(k / 2);
    std::vector<double> out(n_out * m);
    for (std::size_t o = 0; o < n_out; ++o) {
        for (std::size_t t = 0; t < m; ++t) {
            double s = b[o];
            for (std::size_t i = 0; i < n_in; ++i) {
                for (std::size_t r = 0; r < k; ++r) {
                    const long src = static_cast<long>(t + r) - pad;
                    if (src < 0 || src >= static_cast<long>(m)) continue;
                    s += w[(i * n_out + o) * k + r] * in[i * m + static_cast<std::size_t>(src)];
                }
            }
            out[o * m + t] = s;
        }
    }
    return out;
}

ConvGrads conv_backward(const std::vector<double>& in, std::size_t n_in, std::size_t m,
                        const std::vector<double>& w, std::size_t n_out, std::size_t k,
                        const std::vector<double>& dout) {
    const long pad = static_cast<long>(k / 2);
    ConvGrads g{std::vector<double>(w.size()), std::vector<double>(n_out), std::vector<double>(n_in * m)};
    for (std::size_t o = 0; o < n_out; ++o) {
        for (std::size_t t = 0; t < m; ++t) {
            const double d = dout[o * m + t];
            g.db[o] += d;
            for (std::size_t i = 0; i < n_in; ++i) {
                for (std::size_t r = 0; r < k; ++r) {
                    const long src = static_cast<long>(t + r) - pad;
                    if (src < 0 || src >= static_cast<long>(m)) continue;
                    const auto s = static_cast<std::size_t>(src);
                    g.dw[(i * n_out + o) * k + r] += d * in[i * m + s];
                    g.dx[i * m + s] += d * w[(i * n_out + o) * k + r];
                }
            }
        }
    }
    return g;
}

std::vector<double> gen_conv_forward(const std::vector<double>& in, std::size_t n_in, std::size_t m,
                                     const std::vector<double>& w, const std::vector<double>& b,
                                     std::size_t n_out, std::size_t k, std::size_t q) {
    const long pad = static_cast<long>(k / 2);
    std::vector<double> out(n_out * m);
    for (std::size_t o = 0; o < n_out; ++o) {
        for (std::size_t t = 0; t < m; ++t) {
            double s = b[o];
            for (std::size_t i = 0; i < n_in; ++i) {
                for (std::size_t r = 0; r < k; ++r) {
                    const long src = static_cast<long>(t + r) - pad;
                    if (src < 0 || src >= static_cast<long>(m)) continue;
                    const double y = in[i * m + static_cast<std::size_t>(src)];
                    for (std::size_t p = 1; p <= q; ++p)
                        s += w[((i * n_out + o) * k + r) * q + (p - 1)] * std::pow(y, static_cast<double>(p));
                }
            }
            out[o * m + t] = s;
        }
    }
    return out;
}

std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double step) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + step;
        const double up = f(x);
        x[i] = keep - step;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

double max_rel_error(const std::vector<double>& a, const std::vector<double>& b, double floor) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double den = std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / den);
    }
    return worst;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

namespace {

void fft(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = a[i + j];
                const auto v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace

std::vector<double> spectrum(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("length must be a power of two");
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                 static_cast<double>(n - 1));
        a[i] = x[i] * hann;
    }
    fft(a);
    std::vector<double> mag(n / 2 + 1);
    for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(a[i]);
    return mag;
}

std::size_t bin_of(double hz, double rate, std::size_t n) {
    return static_cast<std::size_t>(std::lround(hz * static_cast<double>(n) / rate));
}

double median(std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
    return v[v.size() / 2];
}

double peak_near(const std::vector<double>& mag, double hz, double rate, std::size_t n, std::size_t radius) {
    const std::size_t c = bin_of(hz, rate, n);
    double best = 0.0;
    for (std::size_t b = c > radius ? c - radius : 0; b <= c + radius && b < mag.size(); ++b)
        best = std::max(best, mag[b]);
    return best;
}

}  // namespace oracle
