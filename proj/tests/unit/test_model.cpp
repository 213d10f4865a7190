#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "model.hpp"
#include "support.hpp"

using namespace tf;

TEST_CASE("symmetric equilibrium matches the hand computation")
{
    // Equal phases at unit fraction densities: alpha = 1/2, rho = 2,
    // s^2 = gamma a rho^(gamma-1) = 4, C^2 = 2, c = sqrt(beta1 + beta4) = 2.
    const EquilibriumState e = solve_equilibrium(ModelParams{});
    CHECK(e.rho_bar_plus == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.rho_bar_minus == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.alpha_bar_plus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.s2_plus == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(e.C2 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.c == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(e.nu1_plus == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(e.nu_plus == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("property: fraction map satisfies its defining equations")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> R(0.55, 1.45);
    for (int trial = 0; trial < 200; ++trial) {
        const ModelParams p = testing_support::random_params(rng);
        const double Rp = R(rng), Rm = R(rng);
        const FractionState f = solve_fraction_map(Rp, Rm, p);
        CAPTURE(trial);
        CHECK(f.alpha_plus > 0);
        CHECK(f.alpha_plus < 1);
        CHECK(f.alpha_plus * f.rho_plus == doctest::Approx(Rp).epsilon(1e-10));
        CHECK((1 - f.alpha_plus) * f.rho_minus == doctest::Approx(Rm).epsilon(1e-10));
        CHECK(pressure_plus(p, f.rho_plus) == doctest::Approx(pressure_minus(p, f.rho_minus)).epsilon(1e-10));
    }
}

TEST_CASE("property: equilibrium constants are consistent for random parameters")
{
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const ModelParams p = testing_support::random_params(rng);
        const EquilibriumState e = solve_equilibrium(p);
        CAPTURE(trial);
        CHECK(e.alpha_bar_plus + e.alpha_bar_minus == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(e.beta1 * e.beta4 == doctest::Approx(e.beta2 * e.beta3).epsilon(1e-12));
        CHECK(e.c == doctest::Approx(e.c_formula).epsilon(1e-10));
        CHECK(e.c > 0);
        CHECK(e.nu_plus == doctest::Approx(e.nu1_plus + e.nu2_plus));
    }
}

TEST_CASE("parameter validation names the offending field")
{
    ModelParams p;
    p.mu_minus = 0;
    try {
        validate_params(p);
        FAIL("expected a constraint error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::constraint);
        CHECK(std::string(e.what()).find("mu_minus") != std::string::npos);
    }
    p = ModelParams{};
    p.lambda_plus = -1.0;  // 2 mu + 3 lambda < 0
    CHECK_THROWS_AS(validate_params(p), Error);
    p = ModelParams{};
    p.gamma_minus = 1.0;
    CHECK_THROWS_AS(solve_equilibrium(p), Error);
}

TEST_CASE("config parsing")
{
    std::istringstream good("# comment\nmu_plus = 1.5\n\n a_minus=2 # trailing\n");
    const ModelParams p = parse_params(good);
    CHECK(p.mu_plus == 1.5);
    CHECK(p.a_minus == 2.0);
    CHECK(p.sigma_plus == ModelParams{}.sigma_plus);

    std::istringstream unknown("viscosity = 1\n");
    CHECK_THROWS_AS(parse_params(unknown), Error);
    std::istringstream bad("mu_plus = 1.0x\n");
    CHECK_THROWS_AS(parse_params(bad), Error);
    std::istringstream noeq("mu_plus 1\n");
    CHECK_THROWS_AS(parse_params(noeq), Error);
    try {
        load_params("/nonexistent/params.cfg");
        FAIL("expected an io error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::io);
    }
}

TEST_CASE("equilibrium JSON carries the derived constants")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    const auto j = nlohmann::json::parse(equilibrium_json(e));
    CHECK(j.at("c").get<double>() == doctest::Approx(e.c));
    CHECK(j.at("rho_bar_minus").get<double>() == doctest::Approx(e.rho_bar_minus));
    CHECK(j.contains("beta4"));
}

TEST_CASE("fraction map rejects states far from equilibrium")
{
    try {
        solve_fraction_map(2.0, 1.0, ModelParams{});
        FAIL("expected an admissibility error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::admissibility);
    }
}
