#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "spectral.hpp"
#include "support.hpp"

using namespace tf;

namespace {

double max_abs(const Mat4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("quartic roots are the eigenvalues of the symbol")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    for (double k : {0.01, 0.3, 2.0, 15.0}) {
        const auto roots = quartic_roots(char_poly_coeffs(k, e));
        const Eigen::Vector4cd ev = symbol_at(k, e).cast<cd>().eigenvalues();
        for (const cd& r : roots) {
            double best = 1e300;
            for (int i = 0; i < 4; ++i) best = std::min(best, std::abs(ev[i] - r));
            CAPTURE(k);
            CHECK(best <= 1e-8 * std::max(1.0, std::abs(r)));
        }
    }
}

TEST_CASE("property: spectral projectors resolve the identity and are orthogonal")
{
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> logk(-2.5, 1.5);
    const Mat4 I = Mat4::Identity();
    for (int trial = 0; trial < 60; ++trial) {
        const EquilibriumState e = solve_equilibrium(testing_support::random_params(rng));
        const double k = std::pow(10.0, logk(rng));
        const SpectralPoint sp = spectral_point_raw(k, e);
        if (sp.degenerate) continue;
        Mat4 sum = Mat4::Zero();
        for (const auto& P : sp.P) sum += P;
        CAPTURE(k);
        CHECK(max_abs(sum - I) <= 1e-8);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const Mat4 prod = sp.P[a] * sp.P[b];
                const double scale = max_abs(sp.P[a]) * max_abs(sp.P[b]);
                if (a == b) CHECK(max_abs(prod - sp.P[a]) <= 1e-7 * scale);
                else CHECK(max_abs(prod) <= 1e-7 * scale);
            }
    }
}

TEST_CASE("property: the symbol is dissipative for every k > 0")
{
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 40; ++trial) {
        const EquilibriumState e = solve_equilibrium(testing_support::random_params(rng));
        for (double k = 1e-3; k < 200; k *= 1.7) {
            CAPTURE(k);
            CHECK(max_real_part(k, e) < 0);
        }
    }
}

TEST_CASE("property: non-real eigenvalues come in conjugate pairs")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    for (double k : {1e-3, 0.05, 0.7, 4.0}) {
        const SpectralPoint sp = spectral_point_raw(k, e);
        for (const cd& l : sp.lambdas) {
            if (std::abs(l.imag()) < 1e-12) continue;
            double best = 1e300;
            for (const cd& m : sp.lambdas) best = std::min(best, std::abs(m - std::conj(l)));
            CHECK(best <= 1e-10 * std::abs(l));
        }
    }
}

TEST_CASE("semigroup agrees with the matrix exponential and composes")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    for (double k : {0.02, 0.5, 3.0}) {
        for (double t : {0.5, 4.0}) {
            const Mat4 S = semigroup(k, t, e);
            const Mat4 X = (symbol_at(k, e) * t).exp().cast<cd>();
            CAPTURE(k);
            CAPTURE(t);
            CHECK(max_abs(S - X) <= 1e-9 * std::max(1.0, max_abs(X)));
            CHECK(max_abs(semigroup_expm(k, t, e) - X) <= 1e-9 * std::max(1.0, max_abs(X)));
            const Mat4 half = semigroup(k, t / 2, e);
            CHECK(max_abs(half * half - S) <= 1e-9 * std::max(1.0, max_abs(S)));
        }
    }
    CHECK(max_abs(semigroup(0.7, 0.0, e) - Mat4::Identity()) <= 1e-12);
}

TEST_CASE("low-frequency expansion error shrinks with k")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    auto err = [&](double k) {
        const SpectralPoint sp = eigen_branches(k, e);
        const Expansion x = low_freq_expansion(k, e);
        double m = 0;
        for (int b = 0; b < 4; ++b) m = std::max(m, std::abs(sp.lambdas[b] - x.lambdas[b]) / std::abs(sp.lambdas[b]));
        return m;
    };
    const double e1 = err(1e-2), e2 = err(1e-3);
    CHECK(e2 < e1);
    CHECK(e2 < 1e-4);
}

TEST_CASE("branch sweep assigns bands by the partition")
{
    const EquilibriumState e = solve_equilibrium(ModelParams{});
    const BandPartition part;
    const std::vector<double> ks = {0.01, 0.05, 1.0, 5.0, 20.0, 80.0};
    const auto sweep = spectral_sweep(ks, e, part);
    REQUIRE(sweep.size() == ks.size());
    CHECK(sweep.front().band == Band::low);
    CHECK(sweep[2].band == Band::middle);
    CHECK(sweep.back().band == Band::high);
    CHECK(std::string(band_name(Band::high)) == "high");
    CHECK(mid_band_gap(e, part, 200) > 0);
}
