#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "waveconv.hpp"

using namespace tf;

TEST_CASE("angular reduction convolves two Gaussians exactly")
{
    // exp(-|x|^2) * exp(-|x|^2) = (pi/2)^(3/2) exp(-|x|^2 / 2)
    auto g = [](double u) { return std::exp(-u * u); };
    for (double r : {0.0, 0.4, 1.3, 3.0}) {
        const double exact = std::pow(kPi / 2, 1.5) * std::exp(-0.5 * r * r);
        CHECK(angular_reduce(r, g, g, 1e-12) == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("property: pattern moments equal the quadrature of r times the pattern")
{
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const std::vector<WavePattern> pats = {pat_D(1.5, 2.0), pat_H(2.0, 1.5, 2.0), pat_alg(2.5), pat_D(0.5, 3.0)};
    for (const auto& p : pats)
        for (double T : {0.0, 3.0, 20.0})
            for (auto [lo, hi] : {std::pair{0.0, 1.0}, std::pair{0.5, 7.0}, std::pair{2.0, 60.0}}) {
                const double ref = GK::integrate([&](double s) { return s * p.value(s, T); }, lo, hi, 20, 1e-13);
                CAPTURE(p.label());
                CAPTURE(T);
                CHECK(p.moment(lo, hi, T) == doctest::Approx(ref).epsilon(1e-8));
            }
}

TEST_CASE("regions cover the sample radii")
{
    const double c = 2.0;
    for (double t : {1.0, 4.0, 16.0, 64.0}) {
        const auto r = sample_radii(t, c);
        if (c * t > std::sqrt(1 + t)) CHECK(r.size() == 8);
        for (double x : r) {
            CHECK(x >= 0);
            const int reg = region_of(x, t, c);
            CHECK(reg >= 0);
            CHECK(reg <= 5);
        }
    }
    CHECK(region_of(0.0, 9.0, 2.0) == 1);
    CHECK(region_of(18.0, 9.0, 2.0) == 2);
    CHECK(region_of(40.0, 9.0, 2.0) == 3);
    CHECK(region_of(8.0, 9.0, 2.0) == 4);
    CHECK(region_of(13.0, 9.0, 2.0) == 5);
}

TEST_CASE("named cases exist and a bad name is rejected")
{
    const auto names = conv_case_names();
    for (const char* n : {"I1", "I2", "I3", "K1", "K4", "K7", "N12_log", "N1", "K4_false"})
        CHECK(std::find(names.begin(), names.end(), n) != names.end());
    CHECK_THROWS_AS(conv_case("K99", 2.0), Error);
}

TEST_CASE("convolution values are positive and bounded by their envelope")
{
    const ConvCase cc = conv_case("K4", 2.0);
    for (double r : {0.0, 8.0, 16.0}) {
        const double lhs = eval_spacetime_conv(cc, r, 8.0);
        const double bound = eval_bound(cc, r, 8.0);
        CHECK(lhs > 0);
        CHECK(bound > 0);
        CHECK(lhs / bound < 100);
    }
}

TEST_CASE("Newton gradient of the Gaussian potential")
{
    // Mass of a unit Gaussian inside radius r, divided by 4 pi r^2.
    auto f = [](double u) { return std::exp(-u * u) / std::pow(kPi, 1.5); };
    for (double r : {0.5, 1.0, 3.0}) {
        const double enclosed = std::erf(r) - 2 * r * std::exp(-r * r) / std::sqrt(kPi);
        const double expected = enclosed / (4 * kPi * r * r);
        CHECK(std::fabs(newton_gradient(f, r)) == doctest::Approx(expected).epsilon(1e-7));
    }
}
