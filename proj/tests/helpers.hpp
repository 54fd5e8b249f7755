#pragma once

// Test-only oracles and generators. Everything here must stay independent of
// the library's computation paths it is used to check.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "ssmlab/complex_seq.hpp"
#include "ssmlab/lab/rng.hpp"
#include "ssmlab/ssm.hpp"

namespace testutil {

using ssmlab::cplx;
using ssmlab::ComplexSequence;

// Quadratic-time DFT straight from the defining sum.
inline std::vector<cplx> naive_dft(const std::vector<cplx>& x) {
    const std::size_t L = x.size();
    std::vector<cplx> X(L, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < L; ++k)
        for (std::size_t t = 0; t < L; ++t) {
            const double ang = -2.0 * std::numbers::pi * double(k) * double(t) / double(L);
            X[k] += x[t] * std::exp(cplx{0.0, ang});
        }
    return X;
}

// Classic fixed-step RK4 for dy/dt = f(t, y), scalar state.
inline double rk4(const std::function<double(double, double)>& f, double y0, double t0,
                  double t1, long steps) {
    double y = y0;
    double t = t0;
    const double h = (t1 - t0) / double(steps);
    for (long i = 0; i < steps; ++i) {
        const double k1 = f(t, y);
        const double k2 = f(t + h / 2, y + h / 2 * k1);
        const double k3 = f(t + h / 2, y + h / 2 * k2);
        const double k4 = f(t + h, y + h * k3);
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += h;
    }
    return y;
}

// RK4 with event detection: integrates until y crosses `target`, returns the
// crossing time (linear interpolation inside the step).
inline double rk4_time_to(const std::function<double(double)>& f, double y0, double target,
                          double h, long max_steps) {
    double y = y0;
    double t = 0.0;
    for (long i = 0; i < max_steps; ++i) {
        const double k1 = f(y);
        const double k2 = f(y + h / 2 * k1);
        const double k3 = f(y + h / 2 * k2);
        const double k4 = f(y + h * k3);
        const double ynext = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        if ((y - target) * (ynext - target) <= 0.0 && y != ynext) {
            const double frac = (target - y) / (ynext - y);
            return t + frac * h;
        }
        y = ynext;
        t += h;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

struct Rng {
    std::mt19937_64 g;
    explicit Rng(std::uint64_t seed) : g(ssmlab::rng::engine(seed, ssmlab::rng::kStreamTest)) {}
    double uniform(double lo, double hi) { return ssmlab::rng::uniform(g, lo, hi); }
    double gaussian() { return ssmlab::rng::gaussian(g); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(g() % n); }
};

inline ComplexSequence random_complex_seq(Rng& r, std::size_t L, double scale = 1.0) {
    std::vector<cplx> v(L);
    for (auto& z : v) z = cplx{scale * r.gaussian(), scale * r.gaussian()};
    return ComplexSequence(std::move(v));
}

inline ComplexSequence random_real_seq(Rng& r, std::size_t L, double scale = 1.0) {
    std::vector<cplx> v(L);
    for (auto& z : v) z = cplx{scale * r.gaussian(), 0.0};
    return ComplexSequence(std::move(v));
}

inline ssmlab::DiagonalSSM random_stable_model(Rng& r, std::size_t n, double a_max = 0.9) {
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = r.uniform(-a_max, a_max);
        b[i] = r.uniform(-1.5, 1.5);
        c[i] = r.uniform(-1.5, 1.5);
    }
    return ssmlab::DiagonalSSM(std::move(a), std::move(b), std::move(c));
}

} // namespace testutil
