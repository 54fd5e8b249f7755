#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "ssmlab/errors.hpp"

// Closed-form trajectories of the reduced learning dynamics and the matching
// ODE right-hand sides for independent numerical verification.
//
// Weighting conventions differ by family: the product dynamics
// (lambda_scalar, lambda_ndim, eq4 ODEs) consume G-weighted sigma/eta, the
// fixed-A,B family (c_of_t, time_to_c, time_to_a, appB ODEs) consumes the
// plain sums. Callers pick the convention when they aggregate statistics.

namespace ssmlab {

struct ReducedScalarSetup {
    double sigma = 1.0;   // aggregate input-output covariance (G-weighted)
    double eta = 1.0;     // aggregate input covariance (G-weighted)
    double tau = 1.0;
    double lambda0 = 0.1; // initial product C*B
    long n_dim = 1;

    void validate() const {
        if (!(eta > 0.0)) throw std::domain_error("ReducedScalarSetup: eta must be > 0");
        if (!(tau > 0.0)) throw std::domain_error("ReducedScalarSetup: tau must be > 0");
        if (lambda0 == 0.0)
            throw std::domain_error(
                "ReducedScalarSetup: lambda0 = 0 is a stationary point; closed form undefined");
        if (n_dim < 1) throw std::domain_error("ReducedScalarSetup: n_dim must be >= 1");
    }
};

struct FixedABSetup {
    double a = 0.0;        // fixed state-transition entry, |a| < 1
    double b_fixed = 1.0;  // fixed input weight
    double c0 = 0.0;       // initial output weight
    double sigma = 1.0;    // plain-weighted aggregate
    double eta = 1.0;      // plain-weighted aggregate, > 0
    double tau = 1.0;
    long n_dim = 1;

    void validate() const {
        if (!(std::abs(a) < 1.0)) throw stability_error("FixedABSetup: |a| >= 1");
        if (!(eta > 0.0)) throw std::domain_error("FixedABSetup: eta must be > 0");
        if (!(tau > 0.0)) throw std::domain_error("FixedABSetup: tau must be > 0");
        if (n_dim < 1) throw std::domain_error("FixedABSetup: n_dim must be >= 1");
    }

    double c_fixed_point() const { return (1.0 - a) * sigma / (static_cast<double>(n_dim) * eta); }
};

namespace detail {

// Shared core of the product closed form:
//   Lambda(t) = r * e^x / (e^x - offset + r / lambda0),  x = 2 N sigma t / tau,
// evaluated as r / (1 + e^{-x} (r/lambda0 - offset)) so large t cannot overflow.
inline double lambda_closed_form(double t, const ReducedScalarSetup& s, double n_factor,
                                 double offset) {
    s.validate();
    if (!(s.sigma > 0.0))
        throw std::domain_error("lambda closed form: sigma must be > 0 (growth regime only)");
    const double r = s.sigma / s.eta;
    const double x = 2.0 * n_factor * s.sigma * t / s.tau;
    const double denom = 1.0 + std::exp(-x) * (r / s.lambda0 - offset);
    if (!(denom > 0.0))
        throw std::domain_error(
            "lambda closed form: denominator not positive (lambda0 outside the analyzed "
            "regime 0 < lambda0 or target basin)");
    return r / denom;
}

} // namespace detail

/// Product trajectory for the one-dimensional balanced case.
inline double lambda_scalar(double t, const ReducedScalarSetup& s) {
    return detail::lambda_closed_form(t, s, 1.0, 1.0);
}

/// N-dimensional symmetric-initialization product trajectory:
/// Lambda(t) = r e^x / (e^x - N + r/lambda0) with x = 2 N sigma t / tau.
/// Note its t=0 value equals lambda0 only for N = 1; comparisons against
/// empirical curves should normalize by the limiting value.
inline double lambda_ndim(double t, const ReducedScalarSetup& s) {
    const double n = static_cast<double>(s.n_dim);
    return detail::lambda_closed_form(t, s, n, n);
}

/// Characteristic rise time tau / (2 sigma) of the scalar product dynamics.
inline double time_constant_scalar(const ReducedScalarSetup& s) {
    if (!(s.tau > 0.0)) throw std::domain_error("time_constant_scalar: tau must be > 0");
    if (!(s.sigma > 0.0)) throw std::domain_error("time_constant_scalar: sigma must be > 0");
    return s.tau / (2.0 * s.sigma);
}

/// Output weight trajectory with A and B fixed (plain-weighted statistics):
/// c(t) = [e^{-t N^2 eta / (tau (1-a)^2)} ((a-1) sigma + N c0 eta) - (a-1) sigma] / (N eta).
inline double c_of_t(double t, const FixedABSetup& s) {
    s.validate();
    const double n = static_cast<double>(s.n_dim);
    const double decay = std::exp(-t * n * n * s.eta / (s.tau * (1.0 - s.a) * (1.0 - s.a)));
    return (decay * ((s.a - 1.0) * s.sigma + n * s.c0 * s.eta) - (s.a - 1.0) * s.sigma) /
           (n * s.eta);
}

/// Inverse of c_of_t: time at which c(t) = c_f. c_f must lie between c0 and
/// the fixed point (1-a) sigma / (N eta), exclusive of the fixed point.
inline double time_to_c(double c_f, const FixedABSetup& s) {
    s.validate();
    const double n = static_cast<double>(s.n_dim);
    const double num = (s.a - 1.0) * s.sigma + n * c_f * s.eta;
    const double den = (s.a - 1.0) * s.sigma + n * s.c0 * s.eta;
    if (den == 0.0)
        throw std::domain_error("time_to_c: c0 is already the fixed point");
    const double arg = num / den;
    if (!(arg > 0.0))
        throw std::domain_error("time_to_c: target c_f is beyond the fixed point " +
                                std::to_string(s.c_fixed_point()) +
                                "; admissible targets lie strictly between c0 and it");
    const double t = -s.tau * (1.0 - s.a) * (1.0 - s.a) / (n * n * s.eta) * std::log(arg);
    if (t < 0.0)
        throw std::domain_error("time_to_c: c_f lies on the wrong side of c0 "
                                "(flow moves from c0 toward " +
                                std::to_string(s.c_fixed_point()) + ")");
    return t;
}

/// Implicit time course of the state-transition entry with B and C fixed
/// (c taken from c0). Evaluates the closed-form antiderivative difference.
inline double time_to_a(double a_f, const FixedABSetup& s) {
    s.validate();
    if (!(std::abs(a_f) < 1.0)) throw stability_error("time_to_a: |a_f| >= 1");
    if (s.sigma == 0.0) throw std::domain_error("time_to_a: sigma must be nonzero");
    if (s.c0 == 0.0) throw std::domain_error("time_to_a: c = 0 freezes the dynamics");
    const double n = static_cast<double>(s.n_dim);
    const double c = s.c0;
    const double a0 = s.a;
    const double beta = n * c * s.eta;

    const double num = (a0 - 1.0) * s.sigma + beta;
    const double den = (a_f - 1.0) * s.sigma + beta;
    if (!(num / den > 0.0))
        throw std::domain_error("time_to_a: path from a0 to a_f crosses the fixed point of "
                                "the dynamics; the implicit form only covers the monotone region");

    auto poly = [&](double a) {
        const double w = a - 1.0;
        return w * (-3.0 * w * beta * s.sigma + 2.0 * w * w * s.sigma * s.sigma +
                    6.0 * beta * beta);
    };
    const double bracket =
        6.0 * beta * beta * beta * std::log(num / den) + s.sigma * (poly(a_f) - poly(a0));
    const double t = s.tau / (6.0 * n * c * std::pow(s.sigma, 4)) * bracket;
    if (t < 0.0)
        throw std::domain_error("time_to_a: a_f lies against the flow direction from a0");
    return t;
}

enum class ReducedOde { eq4_b, eq4_c, appB_dc, appB_da, lambda_product };

/// tau * d(state)/dt of the selected reduced ODE (integrators divide by tau).
/// eq4 kinds take state = {b, c}; the others take state = {x}.
inline double reduced_ode_rhs(ReducedOde kind, std::span<const double> state,
                              const ReducedScalarSetup& s) {
    s.validate();
    switch (kind) {
        case ReducedOde::eq4_b: {
            if (state.size() != 2) throw std::invalid_argument("eq4_b: state must be {b, c}");
            const double b = state[0], c = state[1];
            return (s.sigma - c * b * s.eta) * c;
        }
        case ReducedOde::eq4_c: {
            if (state.size() != 2) throw std::invalid_argument("eq4_c: state must be {b, c}");
            const double b = state[0], c = state[1];
            return (s.sigma - c * b * s.eta) * b;
        }
        case ReducedOde::lambda_product: {
            if (state.size() != 1) throw std::invalid_argument("lambda: state must be {lambda}");
            const double lam = state[0];
            return 2.0 * lam * (s.sigma - lam * s.eta);
        }
        default:
            throw std::invalid_argument("reduced_ode_rhs: kind requires a FixedABSetup");
    }
}

inline double reduced_ode_rhs(ReducedOde kind, std::span<const double> state,
                              const FixedABSetup& s) {
    s.validate();
    const double n = static_cast<double>(s.n_dim);
    switch (kind) {
        case ReducedOde::appB_dc: {
            if (state.size() != 1) throw std::invalid_argument("appB_dc: state must be {c}");
            const double c = state[0];
            const double w = 1.0 - s.a;
            return n / w * (s.sigma - n * c * s.eta / w);
        }
        case ReducedOde::appB_da: {
            if (state.size() != 1) throw std::invalid_argument("appB_da: state must be {a}");
            const double a = state[0];
            const double w = 1.0 - a;
            return n * s.c0 / (w * w) * (s.sigma - n * s.c0 * s.eta / w);
        }
        default:
            throw std::invalid_argument("reduced_ode_rhs: kind requires a ReducedScalarSetup");
    }
}

} // namespace ssmlab
