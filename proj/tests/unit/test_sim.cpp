#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "sim.hpp"
#include "support.hpp"

using namespace tf;

namespace {

double max_diff(const std::vector<double>& a, const std::vector<double>& b)
{
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a)
{
    double m = 0;
    for (double v : a) m = std::max(m, std::fabs(v));
    return m;
}

}  // namespace

TEST_CASE("radial linear evolution is a semigroup")
{
    const EquilibriumState e = solve_equilibrium(testing_support::asymmetric_params());
    const auto init = gaussian_momentum_data(e, log_k_grid(1e-3, 20, 200), 0.25);
    const auto a = linear_evolve(linear_evolve(init, 1.5), 2.5);
    const auto b = linear_evolve(init, 4.0);
    CHECK(a.t == doctest::Approx(4.0));
    for (std::size_t i = 0; i < init.k.size(); ++i) {
        for (int c = 0; c < 4; ++c) CHECK(std::abs(a.U[i][c] - b.U[i][c]) <= 1e-12);
        CHECK(std::abs(a.inc_plus[i] - b.inc_plus[i]) <= 1e-12);
    }
    CHECK_THROWS_AS(linear_evolve(init, -1.0), Error);
}

TEST_CASE("Gaussian data has the closed-form L2 norm")
{
    // 4 pi int k^2 exp(-k^2 s0^2) dk = pi^{3/2} / s0^3
    const double s0 = 0.25;
    const EquilibriumState e = solve_equilibrium(ModelParams{});
    const auto s = gaussian_momentum_data(e, uniform_k_grid(40.0, 20000), s0);
    const RadialNorms n = l2_norms(s);
    CHECK(n.m_plus == doctest::Approx(std::sqrt(std::pow(kPi, 1.5) / std::pow(s0, 3))).epsilon(1e-7));
    CHECK(n.n_plus == 0);
    CHECK(n.m_minus == 0);
}

TEST_CASE("property: decay slope fit recovers a synthetic power law")
{
    for (double p : {-0.25, -0.75, -1.25}) {
        std::vector<double> t, v;
        for (int i = 0; i <= 12; ++i) {
            t.push_back(std::pow(10.0, 0.25 * i));
            v.push_back(3.0 * std::pow(1.0 + t.back(), p));
        }
        const SlopeFit f = fit_decay_slope(t, v);
        CHECK(f.slope == doctest::Approx(p).epsilon(1e-12));
        CHECK(f.stderr_slope <= 1e-10);
    }
    CHECK_THROWS_AS(fit_decay_slope({1, 2, 3}, {1, 1, 1}), Error);
    std::vector<double> narrow(10), ones(10, 1.0);
    std::iota(narrow.begin(), narrow.end(), 1.0);
    CHECK_THROWS_AS(fit_decay_slope(narrow, ones), Error);
}

TEST_CASE("zero state is a fixed point")
{
    const SimState z = zero_state(ModelParams{}, 32, 16.0);
    const auto r = nonlinear_rhs(z);
    for (const auto& f : r) CHECK(max_abs(f) == 0);
    const SimState s = step(z, 0.5, true);
    for (const auto& f : s.f) CHECK(max_abs(f) == 0);
    CHECK_THROWS_AS(zero_state(ModelParams{}, 40, 16.0), Error);
}

TEST_CASE("factored pressure terms equal the direct evaluation")
{
    const SimState s = blob_state(testing_support::asymmetric_params(), 32, 16.0, 0.05, 3.0);
    const SimState moved = step(s, 0.5, true);  // gives n a nonzero profile
    const QTerms q = q_terms(moved);
    const auto d = q_direct(moved);
    double scale = 0;
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 3; ++c) scale = std::max(scale, max_abs(d[a][c]));
    REQUIRE(scale > 0);
    for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 3; ++c) {
            CHECK(max_diff(q.Q[a][c], d[a][c]) <= 1e-10 * scale);
            std::vector<double> sum(q.Q[a][c].size(), 0.0);
            for (int piece = 0; piece < 7; ++piece)
                for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += q.S[a][piece][c][i];
            CHECK(max_diff(sum, q.Q[a][c]) <= 1e-12 * scale);
        }
}

TEST_CASE("nonlinear steps conserve mass and momentum")
{
    const SimState s0 = blob_state(testing_support::asymmetric_params(), 32, 16.0, 0.05, 3.0);
    Solver solver(s0, true);
    const Diagnostics d0 = solver.diagnostics();
    for (int i = 0; i < 4; ++i) solver.step(0.25);
    const Diagnostics d1 = solver.diagnostics();
    CHECK(solver.time() == doctest::Approx(1.0));
    CHECK(std::fabs(d1.mass_plus - d0.mass_plus) <= 1e-12);
    CHECK(std::fabs(d1.mass_minus - d0.mass_minus) <= 1e-12);
    for (int c = 0; c < 3; ++c) CHECK(std::fabs(d1.momentum[c] - d0.momentum[c]) <= 1e-10 * d0.momentum_scale);
    CHECK(d1.l2_np > 0);
    CHECK_THROWS_AS(solver.step(0.0), Error);
}

TEST_CASE("linear grid evolution of a single mode follows the symbol semigroup")
{
    const ModelParams p = testing_support::asymmetric_params();
    const double eps = 1e-3, L = 16.0, t = 3.0;
    const SimState s = single_mode_state(p, 32, L, eps);
    const SimState out = linear_grid_evolve(s, t);
    const Mat4 S = semigroup(2 * kPi / L, t, s.eq);
    const int n = s.n;
    const double dx = 2 * L / n;
    double proj_p = 0, proj_m = 0, norm = 0;
    for (int ix = 0; ix < n; ++ix) {
        const double c = std::cos(2 * kPi * ix * dx / L);
        proj_p += c * out.f[NP][std::size_t(ix) * n * n];
        proj_m += c * out.f[NM][std::size_t(ix) * n * n];
        norm += c * c;
    }
    CHECK(proj_p / norm == doctest::Approx(eps * S(0, 0).real()).epsilon(1e-9));
    CHECK(proj_m / norm == doctest::Approx(eps * S(2, 0).real()).epsilon(1e-9));
}

TEST_CASE("linear solver steps agree with the exact linear flow")
{
    const SimState s = blob_state(ModelParams{}, 32, 16.0, 1e-3, 3.0);
    Solver solver(s, false);
    solver.step(0.5);
    solver.step(0.5);
    const SimState a = solver.state();
    const SimState b = linear_grid_evolve(s, 1.0);
    for (int f = 0; f < 8; ++f) CHECK(max_diff(a.f[f], b.f[f]) <= 1e-14 + 1e-10 * max_abs(b.f[f]));
}

TEST_CASE("state dump round trip")
{
    const SimState s = step(blob_state(ModelParams{}, 32, 16.0, 1e-2, 3.0), 0.5, true);
    const auto path = std::filesystem::temp_directory_path() / "twofluid_dump_test.bin";
    write_state_dump(s, path.string());
    CHECK(std::filesystem::file_size(path) == 8 * (3 + 8 * std::size_t(32) * 32 * 32));
    const SimState r = read_state_dump(path.string(), ModelParams{});
    std::filesystem::remove(path);
    CHECK(r.n == s.n);
    CHECK(r.L == s.L);
    CHECK(r.t == s.t);
    for (int f = 0; f < 8; ++f) CHECK(r.f[f] == s.f[f]);
    CHECK_THROWS_AS(read_state_dump("/nonexistent/dump.bin", ModelParams{}), Error);
}

TEST_CASE("diagnostics CSV row matches the header width")
{
    Solver solver(blob_state(ModelParams{}, 32, 16.0, 1e-3, 3.0), false);
    const std::string h = diagnostics_csv_header();
    const std::string r = diagnostics_csv_row(solver.diagnostics());
    CHECK(std::count(h.begin(), h.end(), ',') == std::count(r.begin(), r.end(), ','));
    CHECK(h.rfind("t,", 0) == 0);
}

TEST_CASE("simulation refuses to run past the wrap horizon")
{
    SimConfig cfg;
    cfg.n = 32;
    cfg.L = 16;
    cfg.width = 3;
    cfg.t_final = 100;
    CHECK_THROWS_AS(run_simulation(ModelParams{}, cfg), Error);
}
