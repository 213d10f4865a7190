#include <doctest.h>

#include <cmath>

#include "greens.hpp"
#include "radial.hpp"
#include "support.hpp"

using namespace tf;

TEST_CASE("radial transform of a Gaussian matches the closed form")
{
    // The inverse transform of exp(-k^2/2) is (2 pi)^(-3/2) exp(-r^2/2), and
    // the Riesz-vector amplitude of k exp(-k^2/2) is its radial derivative.
    auto gauss = [](double k) { return std::exp(-0.5 * k * k); };
    auto kgauss = [](double k) { return k * std::exp(-0.5 * k * k); };
    for (double r : {0.0, 0.5, 1.5, 3.0}) {
        const double g = std::pow(2 * kPi, -1.5) * std::exp(-0.5 * r * r);
        const RadialResult s = radial_transform(gauss, r, TensorFactor::scalar, 12.0, r, 1e-12);
        CHECK(s.amp.a == doctest::Approx(g).epsilon(1e-9));
        if (r > 0) {
            const RadialResult v = radial_transform(kgauss, r, TensorFactor::riesz_vector, 12.0, r, 1e-12);
            CHECK(v.amp.a == doctest::Approx(-r * g).epsilon(1e-8));
        }
    }
}

TEST_CASE("smooth cutoff is one below the cut and zero well above it")
{
    CHECK(smooth_cutoff(0.0, 1.0) == doctest::Approx(1.0));
    CHECK(smooth_cutoff(0.5, 1.0) == doctest::Approx(1.0));
    CHECK(smooth_cutoff(3.0, 1.0) == doctest::Approx(0.0));
    double prev = 1.0;
    for (double k = 0; k < 3; k += 0.05) {
        const double v = smooth_cutoff(k, 1.0);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("envelope shapes")
{
    const Envelope d = env_D(1.5, 1.5);
    const Envelope h = env_H(2, 1, 2, 2.0);
    const Envelope r4 = env_R4();
    CHECK(d.value(0, 0) == doctest::Approx(1.0));
    CHECK(d.value(0, 3) == doctest::Approx(std::pow(4.0, -1.5)));
    CHECK(d.value(4, 3) < d.value(1, 3));
    // H peaks on the sound cone r = c t.
    CHECK(h.value(20, 10) == doctest::Approx(std::pow(11.0, -2.0)));
    CHECK(h.value(20, 10) > h.value(15, 10));
    CHECK(h.value(20, 10) > h.value(25, 10));
    CHECK(r4.value(0, 1) == doctest::Approx(0.5));
    CHECK(d.label() == "D(1.5,1.5)");
}

TEST_CASE("wave split reconstructs its input")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    for (double k : {0.01, 0.05, 0.09})
        for (double t : {1.0, 10.0, 50.0})
            for (bool plus : {true, false}) {
                const WaveSplit w = wave_split(k, t, e, plus);
                CHECK(w.w_part + w.wt_part + w.remainder == doctest::Approx(w.input).epsilon(1e-10));
            }
}

TEST_CASE("entry symbols: only the momentum-density coupling is singular at k = 0")
{
    const EquilibriumState e = solve_equilibrium(ModelParams{});
    bool any11 = false;
    for (const auto& s : entry_symbol(1, 1, e)) any11 = any11 || s.singular;
    CHECK_FALSE(any11);
    CHECK(entry_factor(1, 1) == TensorFactor::scalar);
    CHECK(single_entry(1, 2).terms.size() == 1);
}

TEST_CASE("weighted cancellation kills the leading symbol; swapped weights do not")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    CHECK(symbol_cancellation_residual(e, 1e-4, false) <= 1e-6);
    CHECK(symbol_cancellation_residual(e, 1e-4, true) > 1e-3);
}

TEST_CASE("FFT oracle reproduces the Gaussian transform")
{
    auto gauss = [](double k) { return std::exp(-0.5 * k * k); };
    const std::vector<double> r = {0.0, 1.0, 2.0};
    const auto v = fft_oracle(gauss, TensorFactor::scalar, 64, 32.0, r);
    REQUIRE(v.size() == r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        CHECK(v[i] == doctest::Approx(std::pow(2 * kPi, -1.5) * std::exp(-0.5 * r[i] * r[i])).epsilon(1e-6));
}

TEST_CASE("log time grid spans its end points")
{
    const auto t = log_time_grid(1, 100, 5);
    REQUIRE(t.size() == 5);
    CHECK(t.front() == doctest::Approx(1));
    CHECK(t[2] == doctest::Approx(10));
    CHECK(t.back() == doctest::Approx(100));
}
