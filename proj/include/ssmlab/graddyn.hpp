#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ssmlab/complex_seq.hpp"
#include "ssmlab/errors.hpp"
#include "ssmlab/spectrum.hpp"
#include "ssmlab/ssm.hpp"
#include "ssmlab/suffstats.hpp"

// Explicit gradients of the frequency-domain squared loss for all SSM
// parameters, a finite-difference oracle, and gradient-flow integration.
//
// Gradient convention: all gradient functions return the descent direction
// -dL/dtheta = 2 Re[ sum_k (sigma_k - H_k eta_k) (dH_k/dtheta)* ] per real
// parameter, which is what central finite differences of loss_freq recover.
// The time constant tau enters only in integrate (theta += (dt/tau) * descent).
//
// Parameter flattening: per layer, a_0..a_{N-1}, b_0..b_{N-1}, c_0..c_{N-1},
// layers concatenated in order.

namespace ssmlab {

enum class Param { a, b, c };

struct LayerMask {
    bool learn_a = true;
    bool learn_b = true;
    bool learn_c = true;
};

struct FreezeMask {
    std::vector<LayerMask> layers;

    static FreezeMask all(std::size_t depth) {
        return FreezeMask{std::vector<LayerMask>(depth, LayerMask{})};
    }
    static FreezeMask uniform(std::size_t depth, LayerMask m) {
        return FreezeMask{std::vector<LayerMask>(depth, m)};
    }

    bool any() const {
        for (const auto& l : layers)
            if (l.learn_a || l.learn_b || l.learn_c) return true;
        return false;
    }
};

/// dH_k/dtheta for a single layer. For a_i the chain rule on g_ki gives
/// c_i b_i e^{-j 2 pi k / L} g_ki^2.
inline cplx partial_response(const DiagonalSSM& m, Param which, std::size_t i,
                             std::size_t k, std::size_t L) {
    if (i >= m.dim()) throw std::invalid_argument("partial_response: index out of range");
    const cplx g = g_factor(m.a()[i], k, L);
    switch (which) {
        case Param::b: return m.c()[i] * g;
        case Param::c: return g * m.b()[i];
        case Param::a: {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(k) /
                               static_cast<double>(L);
            const cplx w{std::cos(ang), std::sin(ang)};
            return m.c()[i] * m.b()[i] * w * g * g;
        }
    }
    throw std::invalid_argument("partial_response: unknown parameter");
}

namespace detail {

inline std::size_t param_count(const StackedSSM& m) {
    std::size_t n = 0;
    for (const auto& l : m.layers) n += 3 * l.dim();
    return n;
}

inline void check_mask(const StackedSSM& m, const FreezeMask& mask) {
    if (mask.layers.size() != m.depth())
        throw std::invalid_argument("FreezeMask: layer count mismatch");
}

} // namespace detail

inline std::vector<double> flatten(const StackedSSM& m) {
    std::vector<double> p;
    p.reserve(detail::param_count(m));
    for (const auto& l : m.layers) {
        p.insert(p.end(), l.a().begin(), l.a().end());
        p.insert(p.end(), l.b().begin(), l.b().end());
        p.insert(p.end(), l.c().begin(), l.c().end());
    }
    return p;
}

/// Rebuilds a stack with the same shape as `shape` from a flat parameter
/// vector. Throws stability_error if any |a_i| >= 1.
inline StackedSSM unflatten(const StackedSSM& shape, const std::vector<double>& p) {
    if (p.size() != detail::param_count(shape))
        throw std::invalid_argument("unflatten: parameter count mismatch");
    std::vector<DiagonalSSM> layers;
    layers.reserve(shape.depth());
    std::size_t off = 0;
    for (const auto& l : shape.layers) {
        const std::size_t n = l.dim();
        std::vector<double> a(p.begin() + off, p.begin() + off + n);
        std::vector<double> b(p.begin() + off + n, p.begin() + off + 2 * n);
        std::vector<double> c(p.begin() + off + 2 * n, p.begin() + off + 3 * n);
        layers.emplace_back(std::move(a), std::move(b), std::move(c));
        off += 3 * n;
    }
    return StackedSSM(std::move(layers));
}

/// Pre-Re complex accumulations, one per flattened real parameter:
///   sum_k (sigma_k - H_k eta_k) * cofactor_k* * (dH^(m)_k/dtheta)*
/// with cofactor_k = prod_{l != m} H^(l)_k. The descent direction is twice
/// the real part. Frozen parameters get exact zeros.
inline std::vector<cplx> grad_accumulate(const StackedSSM& model, const ComplexSequence& U,
                                         const ComplexSequence& Y, const FreezeMask& mask) {
    require_same_length(U, Y, "grad");
    detail::check_mask(model, mask);
    const std::size_t L = U.size();
    const std::size_t K = model.depth();

    // Per-layer responses and the composite, per bin.
    std::vector<std::vector<cplx>> H(K, std::vector<cplx>(L));
    std::vector<cplx> Htot(L, cplx{1.0, 0.0});
    for (std::size_t l = 0; l < K; ++l)
        for (std::size_t k = 0; k < L; ++k) {
            H[l][k] = frequency_response(model.layers[l], k, L);
            Htot[k] *= H[l][k];
        }

    std::vector<cplx> residual(L);
    for (std::size_t k = 0; k < L; ++k) {
        const cplx sigma_k = Y[k] * std::conj(U[k]);
        const cplx eta_k = U[k] * std::conj(U[k]);
        residual[k] = sigma_k - Htot[k] * eta_k;
    }

    std::vector<cplx> acc(detail::param_count(model), cplx{0.0, 0.0});
    std::size_t off = 0;
    for (std::size_t l = 0; l < K; ++l) {
        const DiagonalSSM& layer = model.layers[l];
        const std::size_t n = layer.dim();
        const LayerMask& lm = mask.layers[l];
        for (std::size_t k = 0; k < L; ++k) {
            // cofactor = prod over the other layers
            cplx cof{1.0, 0.0};
            for (std::size_t m = 0; m < K; ++m)
                if (m != l) cof *= H[m][k];
            const cplx lead = residual[k] * std::conj(cof);
            for (std::size_t i = 0; i < n; ++i) {
                if (lm.learn_a)
                    acc[off + i] += lead * std::conj(partial_response(layer, Param::a, i, k, L));
                if (lm.learn_b)
                    acc[off + n + i] += lead * std::conj(partial_response(layer, Param::b, i, k, L));
                if (lm.learn_c)
                    acc[off + 2 * n + i] += lead * std::conj(partial_response(layer, Param::c, i, k, L));
            }
        }
        off += 3 * n;
    }
    return acc;
}

inline std::vector<double> grad_stacked(const StackedSSM& model, const ComplexSequence& U,
                                        const ComplexSequence& Y, const FreezeMask& mask) {
    const std::vector<cplx> acc = grad_accumulate(model, U, Y, mask);
    std::vector<double> g(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) g[i] = 2.0 * acc[i].real();
    return g;
}

inline std::vector<double> grad(const DiagonalSSM& model, const ComplexSequence& U,
                                const ComplexSequence& Y, const FreezeMask& mask) {
    return grad_stacked(StackedSSM(model), U, Y, mask);
}

inline std::vector<double> grad(const DiagonalSSM& model, const ComplexSequence& U,
                                const ComplexSequence& Y, LayerMask mask = LayerMask{}) {
    return grad_stacked(StackedSSM(model), U, Y, FreezeMask::uniform(1, mask));
}

/// Central-difference oracle: descent direction per parameter from
/// -(loss(p+h) - loss(p-h)) / (2h). Frozen parameters get zeros.
inline std::vector<double> finite_diff_grad(const StackedSSM& model, const ComplexSequence& U,
                                            const ComplexSequence& Y, const FreezeMask& mask,
                                            double h = 1e-6) {
    if (!(h > 0.0)) throw std::invalid_argument("finite_diff_grad: h must be positive");
    detail::check_mask(model, mask);
    const std::vector<double> p0 = flatten(model);
    std::vector<double> g(p0.size(), 0.0);
    std::size_t off = 0;
    for (std::size_t l = 0; l < model.depth(); ++l) {
        const std::size_t n = model.layers[l].dim();
        const LayerMask& lm = mask.layers[l];
        for (std::size_t i = 0; i < 3 * n; ++i) {
            const bool learned = (i < n) ? lm.learn_a : (i < 2 * n) ? lm.learn_b : lm.learn_c;
            if (!learned) continue;
            std::vector<double> p = p0;
            p[off + i] = p0[off + i] + h;
            const double lp = loss_freq(Y, simulate_freq(unflatten(model, p), U));
            p[off + i] = p0[off + i] - h;
            const double lm2 = loss_freq(Y, simulate_freq(unflatten(model, p), U));
            g[off + i] = -(lp - lm2) / (2.0 * h);
        }
        off += 3 * n;
    }
    return g;
}

inline std::vector<double> finite_diff_grad(const DiagonalSSM& model, const ComplexSequence& U,
                                            const ComplexSequence& Y, LayerMask mask = LayerMask{},
                                            double h = 1e-6) {
    return finite_diff_grad(StackedSSM(model), U, Y, FreezeMask::uniform(1, mask), h);
}

enum class Integrator { euler, rk4 };

struct TrainSchedule {
    double tau = 1.0;
    double dt = 1e-3;
    long steps = 0;
    long record_every = 1;
    Integrator integrator = Integrator::euler;

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("TrainSchedule: tau must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("TrainSchedule: dt must be > 0");
        if (steps < 0) throw std::invalid_argument("TrainSchedule: steps must be >= 0");
        if (record_every < 1) throw std::invalid_argument("TrainSchedule: record_every must be >= 1");
        if (!(dt / tau < 1.0)) throw std::invalid_argument("TrainSchedule: dt/tau must be < 1");
    }
};

enum class RunStatus { completed, diverged };

struct TrajectoryRecord {
    long step = 0;
    double t = 0.0;                 // step * dt
    std::vector<double> params;     // flattened snapshot
    double loss_freq = 0.0;
    double lambda = 0.0;            // sum_i c_i b_i of the first layer
    std::optional<std::vector<cplx>> response; // H snapshot, when requested
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    RunStatus status = RunStatus::completed;
    long diverged_at_step = -1;
};

namespace detail {

inline double lambda_of(const StackedSSM& m) {
    const DiagonalSSM& l0 = m.layers.front();
    double acc = 0.0;
    for (std::size_t i = 0; i < l0.dim(); ++i) acc += l0.c()[i] * l0.b()[i];
    return acc;
}

inline bool params_stable(const StackedSSM& shape, const std::vector<double>& p) {
    std::size_t off = 0;
    for (const auto& l : shape.layers) {
        const std::size_t n = l.dim();
        for (std::size_t i = 0; i < n; ++i)
            if (!(std::abs(p[off + i]) < 1.0)) return false;
        off += 3 * n;
    }
    return true;
}

} // namespace detail

/// Explicit-Euler (or fixed-step RK4) integration of the gradient flow
/// tau dtheta/dt = descent(theta). Divergence (loss above 1e12 or a step that
/// leaves the stable region) is recorded in the trajectory status, not thrown.
inline Trajectory integrate(const StackedSSM& model0, const ComplexSequence& U,
                            const ComplexSequence& Y, const FreezeMask& mask,
                            const TrainSchedule& sched, bool record_response = false) {
    sched.validate();
    detail::check_mask(model0, mask);
    if (!mask.any())
        throw std::invalid_argument("integrate: mask freezes every parameter");

    constexpr double kLossCeiling = 1e12;
    Trajectory traj;
    std::vector<double> p = flatten(model0);
    StackedSSM model = model0;

    auto record = [&](long step) {
        TrajectoryRecord r;
        r.step = step;
        r.t = static_cast<double>(step) * sched.dt;
        r.params = p;
        r.loss_freq = loss_freq(Y, simulate_freq(model, U));
        r.lambda = detail::lambda_of(model);
        if (record_response) {
            std::vector<cplx> h(U.size());
            for (std::size_t k = 0; k < U.size(); ++k) h[k] = composite_response(model, k, U.size());
            r.response = std::move(h);
        }
        traj.records.push_back(std::move(r));
        return traj.records.back().loss_freq;
    };

    double loss0 = record(0);
    if (loss0 > kLossCeiling) {
        traj.status = RunStatus::diverged;
        traj.diverged_at_step = 0;
        return traj;
    }

    const double lam = sched.dt / sched.tau;
    for (long step = 1; step <= sched.steps; ++step) {
        std::vector<double> pnext = p;
        bool stable = true;
        if (sched.integrator == Integrator::euler) {
            const std::vector<double> g = grad_stacked(model, U, Y, mask);
            for (std::size_t i = 0; i < p.size(); ++i) pnext[i] = p[i] + lam * g[i];
            stable = detail::params_stable(model0, pnext);
        } else {
            // Classic RK4 on f(p) = descent(p)/tau.
            auto f = [&](const std::vector<double>& q) {
                return grad_stacked(unflatten(model0, q), U, Y, mask);
            };
            auto axpy = [&](const std::vector<double>& base, double s,
                            const std::vector<double>& d) {
                std::vector<double> out = base;
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += s * d[i];
                return out;
            };
            const double half = lam / 2.0;
            std::vector<double> k1, k2, k3, k4;
            k1 = grad_stacked(model, U, Y, mask);
            std::vector<double> q2 = axpy(p, half, k1);
            if (!detail::params_stable(model0, q2)) { stable = false; }
            if (stable) {
                k2 = f(q2);
                std::vector<double> q3 = axpy(p, half, k2);
                if (!detail::params_stable(model0, q3)) stable = false;
                if (stable) {
                    k3 = f(q3);
                    std::vector<double> q4 = axpy(p, lam, k3);
                    if (!detail::params_stable(model0, q4)) stable = false;
                    if (stable) {
                        k4 = f(q4);
                        for (std::size_t i = 0; i < p.size(); ++i)
                            pnext[i] = p[i] + (lam / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                        stable = detail::params_stable(model0, pnext);
                    }
                }
            }
        }

        if (!stable) {
            traj.status = RunStatus::diverged;
            traj.diverged_at_step = step;
            return traj;
        }

        p = std::move(pnext);
        model = unflatten(model0, p);

        const bool due = (step % sched.record_every == 0) || step == sched.steps;
        const double loss = due ? record(step)
                                : loss_freq(Y, simulate_freq(model, U));
        if (loss > kLossCeiling || !std::isfinite(loss)) {
            traj.status = RunStatus::diverged;
            traj.diverged_at_step = step;
            return traj;
        }
    }
    return traj;
}

inline Trajectory integrate(const DiagonalSSM& model, const ComplexSequence& U,
                            const ComplexSequence& Y, LayerMask mask,
                            const TrainSchedule& sched, bool record_response = false) {
    return integrate(StackedSSM(model), U, Y, FreezeMask::uniform(1, mask), sched,
                     record_response);
}

} // namespace ssmlab
