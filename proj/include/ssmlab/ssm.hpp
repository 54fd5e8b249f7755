#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssmlab/complex_seq.hpp"
#include "ssmlab/errors.hpp"
#include "ssmlab/spectrum.hpp"

// Diagonal single-input single-output linear state space model
//   x_t = A x_{t-1} + B u_t,  y_t = C x_t,  A = diag(a_1..a_N),
// simulated either by the unrolled recurrence or per frequency bin through
// the frequency response H_k = sum_i c_i g_ki b_i.

namespace ssmlab {

class DiagonalSSM {
public:
    DiagonalSSM(std::vector<double> a, std::vector<double> b, std::vector<double> c)
        : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {
        if (a_.empty() || a_.size() != b_.size() || a_.size() != c_.size())
            throw std::invalid_argument("DiagonalSSM: a, b, c must share a positive length");
        for (double ai : a_)
            if (!(std::abs(ai) < 1.0))
                throw stability_error("DiagonalSSM: |a_i| >= 1");
    }

    // Symmetric initialization A = aI, B = b1, C = c1.
    static DiagonalSSM symmetric(std::size_t n, double a, double b, double c) {
        return DiagonalSSM(std::vector<double>(n, a), std::vector<double>(n, b),
                           std::vector<double>(n, c));
    }

    std::size_t dim() const { return a_.size(); }
    const std::vector<double>& a() const { return a_; }
    const std::vector<double>& b() const { return b_; }
    const std::vector<double>& c() const { return c_; }

    double spectral_radius() const {
        double r = 0.0;
        for (double ai : a_) r = std::max(r, std::abs(ai));
        return r;
    }

private:
    std::vector<double> a_, b_, c_;
};

struct StackedSSM {
    std::vector<DiagonalSSM> layers;

    explicit StackedSSM(std::vector<DiagonalSSM> ls) : layers(std::move(ls)) {
        if (layers.empty())
            throw std::invalid_argument("StackedSSM: needs at least one layer");
    }
    explicit StackedSSM(DiagonalSSM single) : layers{std::move(single)} {}

    std::size_t depth() const { return layers.size(); }
    double spectral_radius() const {
        double r = 0.0;
        for (const auto& l : layers) r = std::max(r, l.spectral_radius());
        return r;
    }
};

/// Diagonal entry of G_k: (1 - e^{-j 2 pi k / L} a_i)^{-1}.
inline cplx g_factor(double a_i, std::size_t k, std::size_t L) {
    if (!(std::abs(a_i) < 1.0)) throw stability_error("g_factor: |a_i| >= 1");
    if (L == 0 || k >= L) throw std::invalid_argument("g_factor: bin index out of range");
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(L);
    const cplx w{std::cos(ang), std::sin(ang)};
    return 1.0 / (1.0 - w * a_i);
}

/// H_k = sum_i c_i g_ki b_i.
inline cplx frequency_response(const DiagonalSSM& m, std::size_t k, std::size_t L) {
    cplx acc{0.0, 0.0};
    for (std::size_t i = 0; i < m.dim(); ++i)
        acc += m.c()[i] * g_factor(m.a()[i], k, L) * m.b()[i];
    return acc;
}

/// Product of per-layer responses at bin k.
inline cplx composite_response(const StackedSSM& m, std::size_t k, std::size_t L) {
    cplx acc{1.0, 0.0};
    for (const auto& layer : m.layers) acc *= frequency_response(layer, k, L);
    return acc;
}

/// Exact unrolled recurrence from zero initial state; output length = input length.
inline ComplexSequence simulate_time(const DiagonalSSM& m, const ComplexSequence& u) {
    const std::size_t n = m.dim();
    std::vector<cplx> state(n, cplx{0.0, 0.0});
    std::vector<cplx> y(u.size());
    for (std::size_t t = 0; t < u.size(); ++t) {
        cplx out{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = m.a()[i] * state[i] + m.b()[i] * u[t];
            out += m.c()[i] * state[i];
        }
        y[t] = out;
    }
    return ComplexSequence(std::move(y));
}

/// Per-bin multiplication Y_k = H_k U_k.
inline ComplexSequence simulate_freq(const DiagonalSSM& m, const ComplexSequence& U) {
    const std::size_t L = U.size();
    std::vector<cplx> Y(L);
    for (std::size_t k = 0; k < L; ++k) Y[k] = frequency_response(m, k, L) * U[k];
    return ComplexSequence(std::move(Y));
}

inline ComplexSequence simulate_freq(const StackedSSM& m, const ComplexSequence& U) {
    const std::size_t L = U.size();
    std::vector<cplx> Y(L);
    for (std::size_t k = 0; k < L; ++k) Y[k] = composite_response(m, k, L) * U[k];
    return ComplexSequence(std::move(Y));
}

} // namespace ssmlab
