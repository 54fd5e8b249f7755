#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "ssmlab/complex_seq.hpp"
#include "ssmlab/lab/config.hpp"
#include "ssmlab/lab/rng.hpp"
#include "ssmlab/spectrum.hpp"
#include "ssmlab/ssm.hpp"
#include "ssmlab/suffstats.hpp"

namespace ssmlab::lab {

// Synthetic (U, Y) spectra. The time-domain signal is always real, so spectra
// are conjugate-symmetric. Without a teacher the target is the identity map
// (Y = U); with one, Y = simulate_freq(teacher, U).
inline std::pair<ComplexSequence, ComplexSequence> generate_data(const DataConfig& d) {
    std::vector<double> u(d.L, 0.0);

    const bool use_noise = d.kind == DataKind::noise ||
                           (d.kind == DataKind::teacher && d.sinusoids.empty());
    if (use_noise) {
        auto g = rng::engine(d.seed, rng::kStreamNoise);
        for (double& v : u) v = d.noise_scale * rng::gaussian(g);
    } else {
        for (std::size_t t = 0; t < d.L; ++t) {
            double acc = 0.0;
            for (const SinusoidSpec& s : d.sinusoids)
                acc += s.amplitude *
                       std::cos(2.0 * std::numbers::pi * static_cast<double>(s.bin) *
                                    static_cast<double>(t) / static_cast<double>(d.L) +
                                s.phase);
            u[t] = acc;
        }
    }

    ComplexSequence U = dft(ComplexSequence::from_real(u));
    ComplexSequence Y = [&] {
        if (d.teacher) {
            DiagonalSSM teacher(d.teacher->a, d.teacher->b, d.teacher->c);
            return simulate_freq(teacher, U);
        }
        return U;
    }();

    if (d.normalize_eta) {
        const double eta = aggregate(U, Y, Weighting::plain()).eta_real();
        if (eta > 0.0) {
            const double s = 1.0 / std::sqrt(eta);
            std::vector<cplx> su(U.size()), sy(Y.size());
            for (std::size_t k = 0; k < U.size(); ++k) {
                su[k] = s * U[k];
                sy[k] = s * Y[k];
            }
            U = ComplexSequence(std::move(su));
            Y = ComplexSequence(std::move(sy));
        }
    }
    return {std::move(U), std::move(Y)};
}

} // namespace ssmlab::lab
