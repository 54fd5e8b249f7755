#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "ssmlab/complex_seq.hpp"

// Discrete Fourier transform and the squared-error losses in both domains.
// Conventions: zero-based indices, unnormalized forward transform
//   X_k = sum_t x_t e^{-j 2 pi k t / L},
// 1/L on the inverse. loss_freq = L * loss_time after transforming.

namespace ssmlab {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, in place, sign = -1 for the forward transform.
inline void fft_pow2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cplx wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            cplx w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct summation for lengths that are not a power of two.
inline std::vector<cplx> dft_naive(const std::vector<cplx>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{0.0, 0.0};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sign * 2.0 * std::numbers::pi *
                               static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            acc += x[t] * cplx{std::cos(ang), std::sin(ang)};
        }
        out[k] = acc;
    }
    return out;
}

inline std::vector<cplx> transform(const std::vector<cplx>& x, int sign) {
    if (is_power_of_two(x.size())) {
        std::vector<cplx> a = x;
        fft_pow2(a, sign);
        return a;
    }
    return dft_naive(x, sign);
}

} // namespace detail

inline ComplexSequence dft(const ComplexSequence& x) {
    return ComplexSequence(detail::transform(x.values(), -1));
}

inline ComplexSequence idft(const ComplexSequence& X) {
    std::vector<cplx> a = detail::transform(X.values(), +1);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (cplx& v : a) v *= inv;
    return ComplexSequence(std::move(a));
}

/// Sum of squared moduli of the residual, time domain.
inline double loss_time(const ComplexSequence& y, const ComplexSequence& y_hat) {
    require_same_length(y, y_hat, "loss_time");
    double acc = 0.0;
    for (std::size_t t = 0; t < y.size(); ++t) acc += std::norm(y[t] - y_hat[t]);
    return acc;
}

/// Sum of squared moduli of the residual, frequency domain.
inline double loss_freq(const ComplexSequence& Y, const ComplexSequence& Y_hat) {
    require_same_length(Y, Y_hat, "loss_freq");
    double acc = 0.0;
    for (std::size_t k = 0; k < Y.size(); ++k) acc += std::norm(Y_hat[k] - Y[k]);
    return acc;
}

} // namespace ssmlab
