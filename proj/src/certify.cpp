#include "certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "greens.hpp"
#include "sim.hpp"
#include "spectral.hpp"
#include "waveconv.hpp"

namespace tf {

namespace {

struct Ctx {
    int id;
    const CertifyOptions& opt;
    std::vector<CheckResult> out;

    double tol(double base) const { return base * opt.tol_scale; }

    void add(const std::string& name, double metric, double tolerance, const std::string& rule,
             const std::string& detail = "")
    {
        CheckResult c;
        c.name = name;
        c.criterion = id;
        c.metric = metric;
        c.tolerance = tolerance;
        c.rule = rule;
        c.detail = detail;
        if (!std::isfinite(metric)) c.pass = false;
        else if (rule == "<=") c.pass = metric <= tolerance;
        else if (rule == "<") c.pass = metric < tolerance;
        else if (rule == ">=") c.pass = metric >= tolerance;
        else if (rule == ">") c.pass = metric > tolerance;
        else throw Error(ErrorCode::invalid_argument, "unknown rule " + rule);
        out.push_back(std::move(c));
    }
    void fail(const std::string& name, const std::string& why)
    {
        CheckResult c;
        c.name = name;
        c.criterion = id;
        c.metric = std::nan("");
        c.rule = "error";
        c.detail = why;
        out.push_back(std::move(c));
    }
};

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

ModelParams symmetric_params() { return ModelParams{}; }
ModelParams asymmetric_params()
{
    ModelParams p;
    p.a_minus = 2.0;
    return p;
}

double ls_slope_xy(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t m = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < m; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------

void crit1(Ctx& c)
{
    const EquilibriumState s = solve_equilibrium(symmetric_params());
    const double e1 = std::max({std::fabs(s.rho_bar_plus - 2), std::fabs(s.rho_bar_minus - 2), std::fabs(s.c - 2)});
    c.add("equilibrium.symmetric_values", e1, c.tol(1e-10), "<=", "max |rho_bar-2|, |c-2|");

    const EquilibriumState a = solve_equilibrium(asymmetric_params());
    c.add("equilibrium.asymmetric_rho_plus", std::fabs(a.rho_bar_plus - (1 + std::sqrt(2.0))), c.tol(1e-10), "<=",
          "|rho_bar_plus - (1+sqrt 2)| with a_minus = 2");

    std::mt19937_64 rng(c.opt.seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0, worst_c = 0, worst_deg = 0;
    for (int draw = 0; draw < 100; ++draw) {
        ModelParams p;
        p.mu_plus = 0.1 + 4.9 * U(rng);
        p.mu_minus = 0.1 + 4.9 * U(rng);
        p.lambda_plus = -2.0 / 3.0 * p.mu_plus + 3.0 * U(rng);
        p.lambda_minus = -2.0 / 3.0 * p.mu_minus + 3.0 * U(rng);
        p.sigma_plus = 1e-3 + U(rng);
        p.sigma_minus = 1e-3 + U(rng);
        p.a_plus = 0.2 + 4.8 * U(rng);
        p.a_minus = 0.2 + 4.8 * U(rng);
        p.gamma_plus = 1.1 + 1.9 * U(rng);
        p.gamma_minus = 1.1 + 1.9 * U(rng);
        const EquilibriumState e = solve_equilibrium(p);
        const double scale = std::max(e.beta1 * e.beta4, e.beta2 * e.beta2);
        worst = std::max(worst, std::fabs(e.beta1 * e.beta4 - e.beta2 * e.beta2) / scale);
        worst_c = std::max(worst_c, std::fabs(e.c - e.c_formula) / e.c);
        const DegeneracyReport d = check_combination_degeneracy(e);
        if (d.applicable) worst_deg = std::max(worst_deg, d.abs_err / std::max(1.0, std::fabs(d.ratio)));
    }
    c.add("equilibrium.beta_identity_random", worst, c.tol(1e-13), "<=", "100 seeded draws, relative");
    c.add("equilibrium.speed_formulas_random", worst_c, c.tol(1e-12), "<=", "sqrt(beta1+beta4) vs radical");
    c.add("equilibrium.combination_degeneracy_random", worst_deg, c.tol(1e-12), "<=", "|a2 - beta1/beta2|");
}

void low_freq_orders(Ctx& c, const EquilibriumState& e, const std::string& tag)
{
    const std::vector<double> ks = log_k_grid(1e-3, 1e-1, 25);
    const auto sweep = spectral_sweep(ks, e);
    std::array<std::vector<double>, 4> y;
    std::array<double, 4> rel{};
    std::vector<double> x;
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const Expansion ex = low_freq_expansion(ks[i], e);
        x.push_back(std::log(ks[i]));
        for (int b = 0; b < 4; ++b) {
            const double res = std::abs(sweep[i].lambdas[b] - ex.lambdas[b]);
            rel[b] = std::max(rel[b], res / std::abs(sweep[i].lambdas[b]));
            y[b].push_back(std::log(res));
        }
    }
    const double target[4] = {3, 3, 4, 4}, band[4] = {0.2, 0.2, 0.3, 0.3};
    for (int b = 0; b < 4; ++b) {
        const std::string name = "spectral.low_freq_order_lambda" + std::to_string(b + 1) + tag;
        // With decoupled phases the diffusive pair is exactly quadratic in k and
        // the residual is rounding noise; there is no slope to fit then.
        if (rel[b] < 1e-12) {
            c.add(name + "_exact", rel[b], c.tol(1e-12), "<=", "expansion exact to rounding, relative residual");
            continue;
        }
        const double s = ls_slope_xy(x, y[b]);
        c.add(name, std::fabs(s - target[b]), c.tol(band[b]), "<=",
              "fitted residual slope " + fmt(s) + ", expected " + fmt(target[b]));
    }
}

void crit2(Ctx& c)
{
    low_freq_orders(c, solve_equilibrium(c.opt.params), "");
    low_freq_orders(c, solve_equilibrium(asymmetric_params()), "_asymmetric");
}

void crit3(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    const BandPartition part;
    const std::vector<double> ks = log_k_grid(1e-3, 100.0, 200);
    const auto sweep = spectral_sweep(ks, e, part);
    double sum_err = 0, idem_err = 0, rec_err = 0, conj_err = 0;
    int skipped = 0, bands[3] = {0, 0, 0};
    for (std::size_t i = 0; i < ks.size(); ++i) {
        const SpectralPoint& sp = sweep[i];
        if (sp.degenerate) {
            ++skipped;
            continue;
        }
        ++bands[int(sp.band)];
        Mat4 S = Mat4::Zero(), R = Mat4::Zero();
        for (int a = 0; a < 4; ++a) {
            S += sp.P[a];
            R += sp.lambdas[a] * sp.P[a];
            for (int b = 0; b < 4; ++b) {
                const Mat4 prod = sp.P[a] * sp.P[b];
                const Mat4 want = a == b ? sp.P[a] : Mat4::Zero();
                idem_err = std::max(idem_err, (prod - want).cwiseAbs().maxCoeff());
            }
        }
        sum_err = std::max(sum_err, (S - Mat4::Identity()).cwiseAbs().maxCoeff());
        rec_err = std::max(rec_err, (R - symbol_at(ks[i], e).cast<cd>()).cwiseAbs().maxCoeff());
        if (sp.band == Band::low) conj_err = std::max(conj_err, (sp.P[0] - sp.P[1].conjugate()).cwiseAbs().maxCoeff());
    }
    const std::string where = "200 k in [1e-3,100]: low " + std::to_string(bands[0]) + ", middle " +
                              std::to_string(bands[1]) + ", high " + std::to_string(bands[2]) + ", degenerate " +
                              std::to_string(skipped);
    c.add("spectral.projector_sum", sum_err, c.tol(1e-8), "<=", where);
    c.add("spectral.projector_orthogonality", idem_err, c.tol(1e-8), "<=", where);
    c.add("spectral.eigen_reconstruction", rec_err, c.tol(1e-8), "<=", where);
    c.add("spectral.low_band_conjugacy", conj_err, c.tol(1e-8), "<=", "P1 against conj(P2)");
}

void crit4(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    const BandPartition part;
    const double b1 = mid_band_gap(e, part, 2000);
    const double b2 = mid_band_gap(e, part, 4000);
    c.add("spectral.mid_band_gap_positive", b1, 0.0, ">", "b_mid on [eta1, K]");
    c.add("spectral.mid_band_gap_stability", std::fabs(b2 - b1) / std::fabs(b1), c.tol(0.01), "<=",
          "2000 vs 4000 samples: " + fmt(b1) + " / " + fmt(b2));
    for (double k : {50.0, 100.0}) {
        const auto exact = quartic_roots(char_poly_coeffs(k, e));
        const auto errs = matched_relative_errors(exact, high_freq_expansion(k, e));
        const double worst = *std::max_element(errs.begin(), errs.end());
        c.add("spectral.high_freq_roots_k" + std::to_string(int(k)), worst, c.tol(0.05), "<=",
              "largest relative error over the four roots");
        if (k == 50.0) {
            double max_re = -1e300;
            for (const cd& l : exact) max_re = std::max(max_re, l.real());
            c.add("spectral.high_freq_stable_k50", max_re, 0.0, "<", "max Re lambda at k = 50");
        }
    }
}

void crit5(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    std::mt19937_64 rng(c.opt.seed + 5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0;
    int degenerate = 0;
    for (int i = 0; i < 50; ++i) {
        const double k = 20.0 * (1.0 - U(rng));  // (0, 20]
        const double t = 10.0 * (1.0 - U(rng));
        const SpectralPoint sp = spectral_point_raw(k, e);
        const Mat4 ex = semigroup_expm(k, t, e);
        Mat4 sg;
        if (sp.degenerate) {
            ++degenerate;
            sg = semigroup_from(sp, t, e);
        } else {
            sg = semigroup_spectral(sp, t);
        }
        worst = std::max(worst, (sg - ex).cwiseAbs().maxCoeff());
    }
    c.add("spectral.semigroup_dual_path", worst, c.tol(1e-8), "<=",
          "50 seeded (k,t), degenerate points " + std::to_string(degenerate));
    const SpectralPoint sp = spectral_point_raw(0.5, e);
    const double d = (semigroup_spectral(sp, 3.0) - semigroup_expm(0.5, 3.0, e)).cwiseAbs().maxCoeff();
    c.add("spectral.semigroup_k05_t3", d, c.tol(1e-8), "<=", "fixed point (0.5, 3)");
}

void crit6(Ctx& c)
{
    double worst = 0;
    for (double t : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double kmax = std::sqrt(60.0 / t);
        for (int i = 0; i <= 20; ++i) {
            const double r = 0.5 * i;
            const RadialResult res = radial_transform([t](double k) { return std::exp(-k * k * t); }, r,
                                                      TensorFactor::scalar, kmax, r + 1.0, 1e-12);
            const double exact = std::pow(4 * kPi * t, -1.5) * std::exp(-r * r / (4 * t));
            worst = std::max(worst, std::fabs(res.amp.a - exact));
        }
    }
    c.add("greens.heat_kernel_regression", worst, c.tol(1e-6), "<=", "r in [0,10], t in {0.5,1,2,5,10}");

    // Direct 3D FFT of the same band-limited entries on a 128^3 box.
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    const int n = 128;
    const double K = 10.0, Lbox = n * kPi / K, t = 2.0;
    for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 2}}) {
        const TensorFactor f = entry_factor(i, j);
        const double sgn = f == TensorFactor::riesz_vector ? -1.0 : 1.0;
        auto prof = [&, i = i, j = j](double k) {
            if (k == 0) return i == j ? 1.0 : 0.0;
            return sgn * semigroup(k, t, e)(i - 1, j - 1).real() * smooth_cutoff(k, K);
        };
        std::vector<double> r;
        for (int m = 0; m < 24; ++m) r.push_back(m * Lbox / n);
        const std::vector<double> fo = fft_oracle(prof, f, n, Lbox, r);
        std::vector<double> rad;
        for (double rr : r) {
            const RadialResult res = radial_transform(prof, rr, f, K, rr + 4 * t * e.c + 1.0, 1e-12);
            rad.push_back(res.amp.a);
        }
        std::size_t peak = 0;
        for (std::size_t m = 0; m < r.size(); ++m)
            if (std::fabs(rad[m]) > std::fabs(rad[peak])) peak = m;
        const double rel = std::fabs(fo[peak] - rad[peak]) / std::fabs(rad[peak]);
        c.add("greens.fft_oracle_G" + std::to_string(i) + std::to_string(j), rel, c.tol(0.01), "<=",
              "relative difference at the kernel maximum r = " + fmt(r[peak]) + ", t = 2");
    }
}

void crit7(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    const std::vector<double> ts = log_time_grid(1.0, 100.0, 16);
    const double limit = 2.0 * c.opt.tol_scale;
    {
        const EnvelopeReport r = verify_entry_envelope(e, 1, 2, {env_R4(), env_H(2, 1, 2, e.c)}, ts);
        c.add("greens.G12_R4_H", r.trend_ratio, limit, "<=", "C_est " + fmt(r.c_est));
    }
    {
        const EnvelopeReport r = verify_entry_envelope(e, 2, 2, {env_D(1.5, 1.5), env_H(2, 1, 2, e.c)}, ts);
        c.add("greens.G22_D32_H", r.trend_ratio, limit, "<=", "C_est " + fmt(r.c_est));
    }
    {
        const EnvelopeReport r = verify_entry_envelope(e, 1, 2, {env_D(1.5, 1.5), env_H(2, 1, 2, e.c)}, ts);
        // Must fail: the threshold stays at 2 so that a larger tol_scale cannot hide the growth.
        c.add("greens.G12_D32_H_fails", r.trend_ratio, 2.0, ">", "trend ratio of the too-strong bound");
        c.add("greens.G12_D32_H_growth", std::fabs(r.growth_exponent - 0.5), c.tol(0.15), "<=",
              "growth exponent " + fmt(r.growth_exponent));
    }
    // H-wave location of the wave-operator factor.
    double worst = 0;
    for (double t : {10.0, 25.0, 50.0}) {
        const KernelSlice ks = wave_component_kernel(e, t, 2.0, 801, 2.0 * e.c * t);
        std::size_t best = 0;
        for (std::size_t m = 0; m < ks.r.size(); ++m)
            if (std::fabs(ks.amp[m].a) > std::fabs(ks.amp[best].a)) best = m;
        worst = std::max(worst, std::fabs(ks.r[best] - e.c * t) / std::sqrt(1 + t));
    }
    c.add("greens.h_wave_location", worst, c.tol(1.0), "<=", "|argmax r - ct| / sqrt(1+t) at t = 10, 25, 50");

    // High-band L2 mass decays at least as fast as the slowest high-frequency root.
    const double K = 10.0;
    std::vector<double> x, y;
    for (double t : {1.0, 2.0, 3.0, 4.0}) {
        x.push_back(t);
        y.push_back(std::log(high_band_mass(e, 1, 1, t, K)));
    }
    const double amp_rate = -0.5 * ls_slope_xy(x, y);
    double b = 1e300;
    for (const cd& l : quartic_roots(char_poly_coeffs(K, e))) b = std::min(b, std::fabs(l.real()));
    c.add("greens.high_band_decay_rate", amp_rate, b, ">=", "amplitude rate of G11 mass above K = 10");

    double split = 0;
    for (bool plus : {true, false}) {
        const WaveSplit w = wave_split(0.05, 10.0, e, plus);
        split = std::max(split, std::fabs(w.w_part + w.wt_part + w.remainder - w.input));
    }
    c.add("greens.wave_split_identity", split, c.tol(1e-10), "<=", "k = 0.05, t = 10");
}

void crit8(Ctx& c)
{
    const std::vector<double> ts = log_time_grid(1.0, 100.0, 16);
    const double limit = 2.0 * c.opt.tol_scale;
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    {
        const EnvelopeReport r = verify_cancellation(e, ts, false);
        c.add("greens.cancellation", r.trend_ratio, limit, "<=", "C_est " + fmt(r.c_est));
    }
    c.add("greens.symbol_cancellation", symbol_cancellation_residual(e, 1e-4, false), c.tol(1e-6), "<=", "k = 1e-4");

    const EquilibriumState a = solve_equilibrium(asymmetric_params());
    {
        const EnvelopeReport r = verify_cancellation(a, ts, false);
        c.add("greens.cancellation_asymmetric", r.trend_ratio, limit, "<=", "a_minus = 2, C_est " + fmt(r.c_est));
    }
    {
        const EnvelopeReport r = verify_cancellation(a, ts, true);
        c.add("greens.cancellation_swapped_fails", r.trend_ratio, 2.0, ">", "weights swapped, a_minus = 2");
    }
    c.add("greens.symbol_cancellation_asymmetric", symbol_cancellation_residual(a, 1e-4, false), c.tol(1e-6), "<=",
          "a_minus = 2, k = 1e-4");
    c.add("greens.symbol_cancellation_swapped_fails", symbol_cancellation_residual(a, 1e-4, true), 1e-3, ">",
          "a_minus = 2, swapped weights");
}

void crit9(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    const double limit = 2.0 * c.opt.tol_scale;
    for (const char* name : {"I1", "I2", "I3", "K1", "K2", "K3", "K4", "K5", "K6", "K7"}) {
        const ConvReport r = verify_case(conv_case(name, e.c), {4.0, 16.0, 64.0}, e.c);
        bool finite = std::isfinite(r.c_est);
        std::string regions;
        for (const auto& [reg, v] : r.c_est_by_region) {
            finite = finite && std::isfinite(v);
            regions += " D" + std::to_string(reg) + "=" + fmt(v);
        }
        c.add(std::string("waveconv.") + name, finite ? r.trend_ratio : std::nan(""), limit, "<=",
              "C_est" + regions + ", end ratio " + fmt(r.end_ratio));
    }
    {
        const ConvReport r = verify_case(conv_case("K4_false", e.c), {1024.0, 4096.0, 16384.0}, e.c);
        c.add("waveconv.K4_false_fails", r.trend_ratio, 2.0, ">", "bound without the Riesz term");
        c.add("waveconv.K4_false_growth", std::fabs(r.growth_exponent_d1 - 0.5), c.tol(0.15), "<=",
              "near-field growth exponent " + fmt(r.growth_exponent_d1));
    }
    std::vector<double> ts;
    for (int k = 0; k <= 16; ++k) ts.push_back(4.0 * std::pow(2.0, k));
    const LogObstruction lo = log_obstruction(ts, e.c);
    c.add("waveconv.log_obstruction_correlation", lo.correlation, 1.0 - c.tol(0.01), ">",
          "(1+t) N12 against ln(1+t), slope " + fmt(lo.slope));
    c.add("waveconv.N12_log_growth_persists", lo.n12_slope_decay, 1.0 - c.tol(0.2), ">=",
          "last local log-slope over its maximum");
    c.add("waveconv.N1_no_log_growth", lo.n1_slope_decay, c.tol(0.5), "<=", "last local log-slope over its maximum");
}

void crit10(Ctx& c)
{
    const RieszReport p = riesz_potential_check(2.0, {0, 1, 3, 10, 30, 100});
    c.add("riesz.gaussian_closed_form", p.closed_form_err, c.tol(1e-8), "<=", "Newton gradient of a Gaussian");
    c.add("riesz.scaling_slope", std::fabs(p.slope - 0.5), c.tol(0.05), "<=", "slope " + fmt(p.slope));
    c.add("riesz.far_field_exponent", std::fabs(p.profile_exponent - 2.0), c.tol(0.1), "<=",
          "exponent " + fmt(p.profile_exponent));
    c.add("riesz.potential_constant_ratio", p.c_max / p.c_min, c.tol(2.0), "<=", "C across t");
    const RieszReport d = double_riesz_check({1, 3, 10, 30, 100});
    c.add("riesz.double_profile_exponent", std::fabs(d.profile_exponent - 1.5), c.tol(0.1), "<=",
          "exponent " + fmt(d.profile_exponent));
    c.add("riesz.double_hessian_match", d.closed_form_err, c.tol(1e-6), "<=", "spectral vs Newton Hessian");
    c.add("riesz.double_constant_ratio", d.c_max / d.c_min, c.tol(2.0), "<=", "C across t");
}

void crit11(Ctx& c)
{
    const EquilibriumState e = solve_equilibrium(c.opt.params);
    std::vector<double> ts;
    for (int i = 0; i < 10; ++i) ts.push_back(100.0 * std::pow(100.0, i / 9.0));
    const DecayTable tab = linear_decay_table(e, ts, 0.25);
    auto add = [&](const std::string& n, const SlopeFit& f, double target) {
        c.add("sim.decay_" + n, std::fabs(f.slope - target), c.tol(0.05), "<=",
              "slope " + fmt(f.slope) + " +- " + fmt(f.stderr_slope));
    };
    add("n_plus", tab.n_plus, -0.25);
    add("n_minus", tab.n_minus, -0.25);
    add("m_plus", tab.m_plus, -0.75);
    add("m_minus", tab.m_minus, -0.75);
    add("combination", tab.combo, -0.75);
}

double max_abs_diff(const SimState& a, const SimState& b)
{
    double d = 0;
    for (int f = 0; f < 8; ++f)
        for (std::size_t i = 0; i < a.f[f].size(); ++i) d = std::max(d, std::fabs(a.f[f][i] - b.f[f][i]));
    return d;
}

void crit12(Ctx& c)
{
    const ModelParams& p = c.opt.params;
    const EquilibriumState e = solve_equilibrium(p);
    SimConfig cfg;
    cfg.checkpoints = {cfg.L / (4 * e.c), cfg.L / (2 * e.c)};
    const SimRun nl = run_simulation(p, cfg);
    cfg.nonlinear = false;
    const SimRun lin = run_simulation(p, cfg);

    const double vol = std::pow(2 * cfg.L, 3);
    const Diagnostics& d0 = nl.rows.front();
    double mass = 0, mom = 0;
    for (const Diagnostics& d : nl.rows) {
        mass = std::max(mass, std::fabs(d.mass_plus - d0.mass_plus) / (vol + d0.mass_plus));
        mass = std::max(mass, std::fabs(d.mass_minus - d0.mass_minus) / (vol + d0.mass_minus));
        double dm = 0;
        for (int k = 0; k < 3; ++k) dm += std::pow(d.momentum[k] - d0.momentum[k], 2);
        mom = std::max(mom, std::sqrt(dm) / d0.momentum_scale);
    }
    const std::string run = "48^3, eps 1e-3, t to " + fmt(nl.rows.back().t) + ", horizon " + fmt(nl.horizon) +
                            ", " + std::to_string(nl.rows.size() - 1) + " steps";
    c.add("sim.mass_conservation", mass, c.tol(1e-12), "<=", run + "; relative to phase mass");
    c.add("sim.momentum_conservation", mom, c.tol(1e-10), "<=", run + "; relative to the L1 norm of m");
    for (const Diagnostics& d : nl.at_checkpoints)
        c.add("sim.ring_radius_t" + fmt(d.t), std::fabs(d.ring_r - e.c * d.t) / std::sqrt(1 + d.t), c.tol(1.0), "<=",
              "ring " + fmt(d.ring_r) + " vs ct " + fmt(e.c * d.t));
    for (const Diagnostics& d : lin.at_checkpoints)
        c.add("sim.linear_ring_radius_t" + fmt(d.t), std::fabs(d.ring_r - e.c * d.t) / std::sqrt(1 + d.t), c.tol(1.0),
              "<=", "ring " + fmt(d.ring_r) + " vs ct " + fmt(e.c * d.t));
    double dev = 0;
    for (std::size_t k = 0; k < nl.rows.size() && k < lin.rows.size(); ++k) {
        const Diagnostics &a = nl.rows[k], &b = lin.rows[k];
        for (auto [x, y] : {std::pair{a.l2_np, b.l2_np}, {a.l2_nm, b.l2_nm}, {a.l2_mp, b.l2_mp}, {a.l2_mm, b.l2_mm}})
            if (y > 0) dev = std::max(dev, std::fabs(x - y) / y);
    }
    c.add("sim.nonlinear_tracks_linear", dev, c.tol(0.1), "<=", "largest relative deviation of the L2 norms");

    // Time-step convergence on a smooth eps = 1e-2 state over [0, 1].
    const SimState s0 = blob_state(p, 32, 64.0, 1e-2, 5.0);
    std::vector<SimState> sols;
    for (int lev = 1; lev <= 4; ++lev) {
        Solver sol(s0, true);
        const int steps = 1 << lev;
        for (int k = 0; k < steps; ++k) sol.step(1.0 / steps);
        sols.push_back(sol.state());
    }
    std::vector<double> x, y;
    for (std::size_t l = 0; l + 1 < sols.size(); ++l) {
        x.push_back(std::log(std::pow(0.5, l + 1)));
        y.push_back(std::log(max_abs_diff(sols[l], sols[l + 1])));
    }
    const double order = ls_slope_xy(x, y);
    c.add("sim.rk_order", std::fabs(order - 4.0), c.tol(0.3), "<=", "fitted order " + fmt(order));

    // The integrating factor alone reproduces the exact linear evolution.
    {
        Solver sol(s0, false);
        for (int k = 0; k < 4; ++k) sol.step(0.75);
        const double d = max_abs_diff(sol.state(), linear_grid_evolve(s0, 3.0));
        c.add("sim.integrating_factor_exact", d / 1e-2, c.tol(1e-10), "<=", "4 steps of 0.75 vs one exact 3.0");
    }
    // Q is quadratic in the perturbation.
    {
        std::vector<double> ex, ey;
        for (double eps : {1e-2, 5e-3, 2.5e-3}) {
            const QTerms q = q_terms(single_mode_state(p, 32, 64.0, eps));
            double m = 0;
            for (int a = 0; a < 2; ++a)
                for (int d = 0; d < 3; ++d)
                    for (double v : q.Q[a][d]) m = std::max(m, std::fabs(v));
            ex.push_back(std::log(eps));
            ey.push_back(std::log(m));
        }
        const double ord = ls_slope_xy(ex, ey);
        c.add("sim.q_quadratic_order", std::fabs(ord - 2.0), c.tol(0.1), "<=", "fitted order " + fmt(ord));
    }
}

}  // namespace

bool CriterionResult::pass() const
{
    if (checks.empty()) return false;
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

std::string criterion_title(int id)
{
    static const char* titles[kCriterionCount] = {
        "equilibrium",
        "low-frequency expansion orders",
        "projector algebra",
        "mid-band gap and high-frequency roots",
        "semigroup dual path",
        "radial transform regression",
        "Green envelopes",
        "cancellation combination",
        "convolution suite",
        "Riesz-potential lemmas",
        "linear decay slopes",
        "nonlinear simulator",
    };
    if (id < 1 || id > kCriterionCount) throw Error(ErrorCode::invalid_argument, "criterion id out of range");
    return titles[id - 1];
}

CriterionResult certify_criterion(int id, const CertifyOptions& opt)
{
    static const double budgets[kCriterionCount] = {1, 5, 5, 10, 5, 120, 600, 600, 1800, 120, 60, 1200};
    CriterionResult res;
    res.id = id;
    res.title = criterion_title(id);
    res.budget_seconds = budgets[id - 1];
    Ctx ctx{id, opt, {}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        switch (id) {
            case 1: crit1(ctx); break;
            case 2: crit2(ctx); break;
            case 3: crit3(ctx); break;
            case 4: crit4(ctx); break;
            case 5: crit5(ctx); break;
            case 6: crit6(ctx); break;
            case 7: crit7(ctx); break;
            case 8: crit8(ctx); break;
            case 9: crit9(ctx); break;
            case 10: crit10(ctx); break;
            case 11: crit11(ctx); break;
            case 12: crit12(ctx); break;
        }
    } catch (const std::exception& ex) {
        ctx.fail("criterion" + std::to_string(id) + ".exception", ex.what());
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.checks = std::move(ctx.out);
    return res;
}

std::vector<CriterionResult> certify_all(const CertifyOptions& opt)
{
    std::vector<CriterionResult> out;
    for (int id = 1; id <= kCriterionCount; ++id) out.push_back(certify_criterion(id, opt));
    return out;
}

std::string certify_json(const std::vector<CriterionResult>& results)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["checks"] = nlohmann::ordered_json::array();
    int pass = 0, fail = 0;
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr); };
    for (const auto& r : results)
        for (const auto& c : r.checks) {
            nlohmann::ordered_json o;
            o["name"] = c.name;
            o["criterion"] = c.criterion;
            o["pass"] = c.pass;
            o["metric"] = num(c.metric);
            o["tolerance"] = num(c.tolerance);
            o["rule"] = c.rule;
            o["detail"] = c.detail;
            j["checks"].push_back(o);
            (c.pass ? pass : fail)++;
        }
    j["pass_count"] = pass;
    j["fail_count"] = fail;
    nlohmann::ordered_json crit = nlohmann::ordered_json::array();
    for (const auto& r : results)
        crit.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass()}});
    j["criteria"] = crit;
    return j.dump(2);
}

}  // namespace tf
