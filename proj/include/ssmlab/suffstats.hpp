#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ssmlab/complex_seq.hpp"
#include "ssmlab/errors.hpp"
#include "ssmlab/ssm.hpp"

// Input/output covariance summaries in the frequency domain. Two weighting
// conventions are first class and must be selected explicitly:
//   Plain:        sigma = sum_k Y_k U_k*,            eta = sum_k U_k U_k*
//   GWeighted(a): sigma = sum_k Y_k G_k* U_k*,       eta = sum_k |U_k|^2 |G_k|^2
// with G_k = g_factor(a, k, L).

namespace ssmlab {

struct Weighting {
    enum class Kind { plain, g_weighted };
    Kind kind = Kind::plain;
    double a = 0.0; // only meaningful for g_weighted

    static Weighting plain() { return Weighting{Kind::plain, 0.0}; }
    static Weighting g_weighted(double a) {
        if (!(std::abs(a) < 1.0)) throw stability_error("Weighting: |a| >= 1");
        return Weighting{Kind::g_weighted, a};
    }
};

struct SufficientStats {
    cplx sigma{0.0, 0.0};
    cplx eta{0.0, 0.0};
    std::vector<cplx> sigma_k; // Y_k U_k*
    std::vector<cplx> eta_k;   // U_k U_k*
    Weighting weighting = Weighting::plain();

    // Aggregates are kept complex; analytic formulas consume the real part,
    // which must dominate for conjugate-symmetric (real time-domain) data.
    double sigma_real() const { return real_part_checked(sigma, "sigma"); }
    double eta_real() const { return real_part_checked(eta, "eta"); }

private:
    static double real_part_checked(cplx z, const char* name) {
        const double mag = std::abs(z);
        if (mag > 1e-12 && std::abs(z.imag()) > 1e-8 * mag)
            throw std::domain_error(std::string("SufficientStats: ") + name +
                                    " has a non-negligible imaginary part");
        return z.real();
    }
};

/// Per-bin statistics sigma_k = Y_k conj(U_k), eta_k = |U_k|^2.
inline SufficientStats per_bin_stats(const ComplexSequence& U, const ComplexSequence& Y) {
    require_same_length(U, Y, "per_bin_stats");
    SufficientStats s;
    s.sigma_k.resize(U.size());
    s.eta_k.resize(U.size());
    for (std::size_t k = 0; k < U.size(); ++k) {
        s.sigma_k[k] = Y[k] * std::conj(U[k]);
        s.eta_k[k] = U[k] * std::conj(U[k]);
        s.sigma += s.sigma_k[k];
        s.eta += s.eta_k[k];
    }
    return s;
}

inline SufficientStats aggregate(const ComplexSequence& U, const ComplexSequence& Y,
                                 Weighting w) {
    require_same_length(U, Y, "aggregate");
    SufficientStats s = per_bin_stats(U, Y);
    s.weighting = w;
    if (w.kind == Weighting::Kind::g_weighted) {
        const std::size_t L = U.size();
        s.sigma = cplx{0.0, 0.0};
        s.eta = cplx{0.0, 0.0};
        for (std::size_t k = 0; k < L; ++k) {
            const cplx G = g_factor(w.a, k, L);
            s.sigma += Y[k] * std::conj(G) * std::conj(U[k]);
            s.eta += std::norm(U[k]) * std::norm(G);
        }
    }
    return s;
}

} // namespace ssmlab
