#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "ssmlab/spectrum.hpp"
#include "ssmlab/ssm.hpp"

using namespace ssmlab;
using testutil::Rng;

TEST_CASE("g_factor closed values") {
    CHECK(std::abs(g_factor(0.5, 0, 4) - cplx{2.0, 0.0}) < 1e-15);
    CHECK(std::abs(g_factor(0.5, 0, 7) - cplx{2.0, 0.0}) < 1e-15);
    CHECK(std::abs(g_factor(0.0, 3, 8) - cplx{1.0, 0.0}) < 1e-15);
    // 1 / (1 + 0.5j) = 0.8 - 0.4j
    CHECK(std::abs(g_factor(0.5, 1, 4) - cplx{0.8, -0.4}) < 1e-14);
}

TEST_CASE("g_factor rejects unstable and out-of-range arguments") {
    CHECK_THROWS_AS(g_factor(1.0, 0, 4), stability_error);
    CHECK_THROWS_AS(g_factor(-1.2, 0, 4), stability_error);
    CHECK_THROWS_AS(g_factor(0.5, 4, 4), std::invalid_argument);
}

TEST_CASE("frequency_response simple cases") {
    const DiagonalSSM m({0.0}, {2.0}, {3.0});
    for (std::size_t k = 0; k < 8; ++k)
        CHECK(std::abs(frequency_response(m, k, 8) - cplx{6.0, 0.0}) < 1e-14);

    const DiagonalSSM m2({0.5}, {1.0}, {1.0});
    CHECK(std::abs(frequency_response(m2, 0, 4) - cplx{2.0, 0.0}) < 1e-14);

    const DiagonalSSM m3({0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0});
    for (std::size_t k = 0; k < 4; ++k)
        CHECK(std::abs(frequency_response(m3, k, 4) - cplx{2.0, 0.0}) < 1e-14);
}

TEST_CASE("composite_response equals the manual per-layer product") {
    Rng r(201);
    const DiagonalSSM l1 = testutil::random_stable_model(r, 2);
    const DiagonalSSM l2 = testutil::random_stable_model(r, 3);
    const StackedSSM stack({l1, l2});
    const std::size_t L = 8;
    for (std::size_t k = 0; k < L; ++k) {
        const cplx manual = frequency_response(l1, k, L) * frequency_response(l2, k, L);
        CHECK(std::abs(composite_response(stack, k, L) - manual) < 1e-12);
    }

    const StackedSSM single(l1);
    for (std::size_t k = 0; k < L; ++k)
        CHECK(std::abs(composite_response(single, k, L) - frequency_response(l1, k, L)) == 0.0);

    // constant-response layers multiply
    const DiagonalSSM flat({0.0}, {2.0}, {1.0});
    const StackedSSM two({flat, flat});
    CHECK(std::abs(composite_response(two, 1, 4) - cplx{4.0, 0.0}) < 1e-14);
}

TEST_CASE("composite_response is invariant under layer permutation") {
    Rng r(202);
    std::vector<DiagonalSSM> layers{testutil::random_stable_model(r, 2),
                                    testutil::random_stable_model(r, 1),
                                    testutil::random_stable_model(r, 3)};
    const StackedSSM fwd(layers);
    std::reverse(layers.begin(), layers.end());
    const StackedSSM rev(layers);
    for (std::size_t k = 0; k < 16; ++k)
        CHECK(std::abs(composite_response(fwd, k, 16) - composite_response(rev, k, 16)) < 1e-12);
}

TEST_CASE("simulate_time: impulse response is powers of a") {
    const DiagonalSSM m({0.5}, {1.0}, {1.0});
    const ComplexSequence y = simulate_time(m, ComplexSequence{1.0, 0.0, 0.0});
    CHECK(std::abs(y[0] - cplx{1.0, 0.0}) < 1e-15);
    CHECK(std::abs(y[1] - cplx{0.5, 0.0}) < 1e-15);
    CHECK(std::abs(y[2] - cplx{0.25, 0.0}) < 1e-15);
}

TEST_CASE("simulate_time: a = 0 is memoryless") {
    Rng r(203);
    const DiagonalSSM m({0.0, 0.0}, {1.0, 0.5}, {2.0, 1.0});
    const double gain = 1.0 * 2.0 + 0.5 * 1.0;
    const ComplexSequence u = testutil::random_complex_seq(r, 10);
    const ComplexSequence y = simulate_time(m, u);
    for (std::size_t t = 0; t < u.size(); ++t) CHECK(std::abs(y[t] - gain * u[t]) < 1e-14);
}

TEST_CASE("simulate_time matches explicit kernel convolution") {
    Rng r(204);
    const std::size_t L = 32;
    const DiagonalSSM m = testutil::random_stable_model(r, 3);
    const ComplexSequence u = testutil::random_complex_seq(r, L);
    const ComplexSequence y = simulate_time(m, u);

    // kernel h_m = sum_i c_i a_i^m b_i, linear convolution
    std::vector<double> h(L, 0.0);
    for (std::size_t s = 0; s < L; ++s)
        for (std::size_t i = 0; i < m.dim(); ++i)
            h[s] += m.c()[i] * std::pow(m.a()[i], double(s)) * m.b()[i];
    for (std::size_t t = 0; t < L; ++t) {
        cplx conv{0.0, 0.0};
        for (std::size_t s = 0; s <= t; ++s) conv += h[t - s] * u[s];
        CHECK(std::abs(y[t] - conv) < 1e-10);
    }
}

TEST_CASE("simulate_freq simple cases") {
    Rng r(205);
    const ComplexSequence zeros = ComplexSequence::zeros(8);
    const DiagonalSSM m = testutil::random_stable_model(r, 2);
    const ComplexSequence Y0 = simulate_freq(m, zeros);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(Y0[k]) == 0.0);

    const DiagonalSSM ident({0.0}, {1.0}, {1.0});
    const ComplexSequence U = testutil::random_complex_seq(r, 8);
    const ComplexSequence Y = simulate_freq(ident, U);
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(Y[k] - U[k]) < 1e-14);
}

TEST_CASE("time/frequency equivalence on padded input") {
    Rng r(206);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t L = 16;
        const DiagonalSSM m = testutil::random_stable_model(r, 3, 0.9);
        const double rho = std::max(m.spectral_radius(), 0.1);
        std::size_t P = 64;
        while (std::pow(rho, double(P)) > 1e-12) P *= 2;

        const ComplexSequence u = testutil::random_real_seq(r, L);
        std::vector<cplx> padded(P, cplx{0.0, 0.0});
        std::copy(u.begin(), u.end(), padded.begin());
        const ComplexSequence up(padded);

        const ComplexSequence y_time = simulate_time(m, up);
        const ComplexSequence y_freq = idft(simulate_freq(m, dft(up)));
        for (std::size_t t = 0; t < L; ++t)
            CHECK(std::abs(y_time[t] - y_freq[t]) < 1e-8);
    }
}

TEST_CASE("constructors enforce invariants") {
    CHECK_THROWS_AS(DiagonalSSM({1.0}, {1.0}, {1.0}), stability_error);
    CHECK_THROWS_AS(DiagonalSSM({0.5, 0.2}, {1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(StackedSSM(std::vector<DiagonalSSM>{}), std::invalid_argument);
}
