#include "model.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tf {

ModelParams validate_params(const ModelParams& p)
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw Error(ErrorCode::constraint, std::string(name) + " must be positive");
    };
    positive(p.mu_plus, "mu_plus");
    positive(p.mu_minus, "mu_minus");
    if (!std::isfinite(p.lambda_plus) || 2 * p.mu_plus + 3 * p.lambda_plus < 0)
        throw Error(ErrorCode::constraint, "lambda_plus: 2mu+3lambda < 0");
    if (!std::isfinite(p.lambda_minus) || 2 * p.mu_minus + 3 * p.lambda_minus < 0)
        throw Error(ErrorCode::constraint, "lambda_minus: 2mu+3lambda < 0");
    positive(p.sigma_plus, "sigma_plus");
    positive(p.sigma_minus, "sigma_minus");
    positive(p.a_plus, "a_plus");
    positive(p.a_minus, "a_minus");
    if (!(p.gamma_plus > 1.0) || !std::isfinite(p.gamma_plus))
        throw Error(ErrorCode::constraint, "gamma_plus must exceed 1");
    if (!(p.gamma_minus > 1.0) || !std::isfinite(p.gamma_minus))
        throw Error(ErrorCode::constraint, "gamma_minus must exceed 1");
    return p;
}

double pressure_plus(const ModelParams& p, double rho) { return p.a_plus * std::pow(rho, p.gamma_plus); }
double pressure_minus(const ModelParams& p, double rho) { return p.a_minus * std::pow(rho, p.gamma_minus); }
double sound2_plus(const ModelParams& p, double rho) { return p.gamma_plus * p.a_plus * std::pow(rho, p.gamma_plus - 1); }
double sound2_minus(const ModelParams& p, double rho) { return p.gamma_minus * p.a_minus * std::pow(rho, p.gamma_minus - 1); }

namespace {

double local_C2(const ModelParams& p, double rp, double rm, double ap)
{
    double sp = sound2_plus(p, rp), sm = sound2_minus(p, rm);
    double am = 1.0 - ap;
    return sp * sm / (am * rp * sp + ap * rm * sm);
}

// Root of phi(rho+) = P+(rho+) - P-(R- rho+ / (rho+ - R+)) on (R+, inf).
// phi increases monotonically from -inf, so a bracket always exists.
double solve_rho_plus(double Rp, double Rm, const ModelParams& p, double guess)
{
    auto rho_m = [&](double x) { return Rm * x / (x - Rp); };
    auto phi = [&](double x) { return pressure_plus(p, x) - pressure_minus(p, rho_m(x)); };
    auto dphi = [&](double x) {
        double d = x - Rp;
        return sound2_plus(p, x) + sound2_minus(p, rho_m(x)) * Rm * Rp / (d * d);
    };

    double lo = Rp * (1.0 + 1e-9);
    double hi = (guess > lo) ? std::max(guess, 2.0 * Rp) : 2.0 * Rp;
    int grow = 0;
    while (phi(hi) < 0.0) {
        hi = Rp + 2.0 * (hi - Rp);
        if (++grow > 200 || !std::isfinite(hi))
            throw Error(ErrorCode::convergence, "equilibrium bracket failure");
    }
    if (phi(lo) > 0.0)
        throw Error(ErrorCode::convergence, "equilibrium bracket failure at lower end");

    double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        double f = phi(x);
        double scale = std::max(pressure_plus(p, x), pressure_minus(p, rho_m(x)));
        if (std::fabs(f) <= 1e-13 * scale) return x;
        if (f < 0) lo = x; else hi = x;
        double xn = x - f / dphi(x);
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::fabs(xn - x) <= 4 * std::numeric_limits<double>::epsilon() * x) return xn;
        x = xn;
    }
    throw Error(ErrorCode::convergence, "equilibrium Newton iteration did not converge");
}

}  // namespace

FractionState solve_fraction_map(double R_plus, double R_minus, const ModelParams& p, double guess)
{
    if (!(R_plus > 0.0) || !(R_minus > 0.0))
        throw Error(ErrorCode::admissibility, "admissibility violated: fraction densities must be positive");
    if (std::fabs(R_plus - 1.0) > 0.5 || std::fabs(R_minus - 1.0) > 0.5)
        throw Error(ErrorCode::admissibility, "admissibility violated: |R-1| exceeds 0.5");
    double rp = solve_rho_plus(R_plus, R_minus, p, guess);
    if (!(rp > R_plus))
        throw Error(ErrorCode::admissibility, "admissibility violated: rho_plus <= R_plus");
    double rm = R_minus * rp / (rp - R_plus);
    double ap = R_plus / rp;
    return {rp, rm, ap, local_C2(p, rp, rm, ap)};
}

EquilibriumState solve_equilibrium(const ModelParams& p_in)
{
    const ModelParams p = validate_params(p_in);
    EquilibriumState e;
    e.params = p;
    FractionState f = solve_fraction_map(1.0, 1.0, p);
    e.rho_bar_plus = f.rho_plus;
    e.rho_bar_minus = f.rho_minus;
    e.alpha_bar_plus = 1.0 / e.rho_bar_plus;
    e.alpha_bar_minus = 1.0 / e.rho_bar_minus;
    e.s2_plus = sound2_plus(p, e.rho_bar_plus);
    e.s2_minus = sound2_minus(p, e.rho_bar_minus);
    e.C2 = e.s2_plus * e.s2_minus /
           (e.alpha_bar_minus * e.rho_bar_plus * e.s2_plus + e.alpha_bar_plus * e.rho_bar_minus * e.s2_minus);
    e.beta1 = e.C2 * e.rho_bar_minus / e.rho_bar_plus;
    e.beta2 = e.C2;
    e.beta3 = e.C2;
    e.beta4 = e.C2 * e.rho_bar_plus / e.rho_bar_minus;
    e.nu1_plus = p.mu_plus / e.rho_bar_plus;
    e.nu1_minus = p.mu_minus / e.rho_bar_minus;
    e.nu2_plus = (p.mu_plus + p.lambda_plus) / e.rho_bar_plus;
    e.nu2_minus = (p.mu_minus + p.lambda_minus) / e.rho_bar_minus;
    e.nu_plus = e.nu1_plus + e.nu2_plus;
    e.nu_minus = e.nu1_minus + e.nu2_minus;
    e.sigma_plus = p.sigma_plus;
    e.sigma_minus = p.sigma_minus;
    e.c = std::sqrt(e.beta1 + e.beta4);

    // Independent route through P'(rho) evaluated directly.
    {
        double dp = p.gamma_plus * pressure_plus(p, e.rho_bar_plus) / e.rho_bar_plus;
        double dm = p.gamma_minus * pressure_minus(p, e.rho_bar_minus) / e.rho_bar_minus;
        double amin = 1.0 - e.alpha_bar_plus, aplus = e.alpha_bar_plus;
        double q = dp * dm / (amin * e.rho_bar_plus * dp + aplus * e.rho_bar_minus * dm);
        e.c_formula = std::sqrt(q * (e.rho_bar_minus / e.rho_bar_plus + e.rho_bar_plus / e.rho_bar_minus));
    }

    e.beta_weight_plus = std::sqrt(e.rho_bar_minus / e.rho_bar_plus);
    e.beta_weight_minus = std::sqrt(e.rho_bar_plus / e.rho_bar_minus);

    const double B = e.beta1 + e.beta4;
    e.b1 = (e.beta1 * e.nu_plus + e.beta4 * e.nu_minus) / (2 * B);
    const double s = e.beta1 * e.nu_minus + e.beta4 * e.nu_plus;
    const double disc = s * s - 4 * B * (e.beta1 * e.sigma_minus + e.beta4 * e.sigma_plus);
    e.r_disc_real = disc >= 0;
    e.R_disc = std::sqrt(std::fabs(disc));
    if (e.r_disc_real) {
        e.lam3_tilde_re = (-s + e.R_disc) / (2 * B);
        e.lam4_tilde_re = (-s - e.R_disc) / (2 * B);
    } else {
        e.lam3_tilde_re = e.lam4_tilde_re = -s / (2 * B);
        e.lam3_tilde_im = e.R_disc / (2 * B);
        e.lam4_tilde_im = -e.R_disc / (2 * B);
    }
    return e;
}

DegeneracyReport check_combination_degeneracy(const EquilibriumState& eq)
{
    DegeneracyReport r;
    const double scale = std::max({std::fabs(eq.beta1), std::fabs(eq.beta2), std::fabs(eq.beta4)});
    if (std::fabs(eq.beta2 - eq.beta4) <= 1e-14 * scale) {
        r.note = "not applicable: beta2=beta4";
        return r;
    }
    if (std::fabs(eq.beta1 - eq.beta2) <= 1e-14 * scale) {
        r.note = "not applicable: beta1=beta2";
        return r;
    }
    r.applicable = true;
    r.a2 = (eq.beta1 - eq.beta2) / (eq.beta2 - eq.beta4);
    r.ratio = eq.beta1 / eq.beta2;
    r.abs_err = std::fabs(r.a2 - r.ratio);
    r.note = "a2 coincides with beta1/beta2";
    return r;
}

ModelParams parse_params(std::istream& in)
{
    ModelParams p;
    std::map<std::string, double*> slots = {
        {"mu_plus", &p.mu_plus},         {"mu_minus", &p.mu_minus},
        {"lambda_plus", &p.lambda_plus}, {"lambda_minus", &p.lambda_minus},
        {"sigma_plus", &p.sigma_plus},   {"sigma_minus", &p.sigma_minus},
        {"a_plus", &p.a_plus},           {"a_minus", &p.a_minus},
        {"gamma_plus", &p.gamma_plus},   {"gamma_minus", &p.gamma_minus},
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto eqpos = line.find('=');
        if (eqpos == std::string::npos)
            throw Error(ErrorCode::invalid_argument, "config line " + std::to_string(lineno) + ": expected key = value");
        auto trim = [](std::string s) {
            auto a = s.find_first_not_of(" \t\r");
            auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        std::string key = trim(line.substr(0, eqpos));
        std::string val = trim(line.substr(eqpos + 1));
        auto it = slots.find(key);
        if (it == slots.end())
            throw Error(ErrorCode::invalid_argument, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(val, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != val.size())
            throw Error(ErrorCode::invalid_argument, "config line " + std::to_string(lineno) + ": bad number for " + key);
        *it->second = v;
    }
    return p;
}

ModelParams load_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open params file " + path);
    return parse_params(in);
}

std::string equilibrium_json(const EquilibriumState& e)
{
    nlohmann::ordered_json j;
    j["rho_bar_plus"] = e.rho_bar_plus;
    j["rho_bar_minus"] = e.rho_bar_minus;
    j["alpha_bar_plus"] = e.alpha_bar_plus;
    j["alpha_bar_minus"] = e.alpha_bar_minus;
    j["s2_plus"] = e.s2_plus;
    j["s2_minus"] = e.s2_minus;
    j["C2"] = e.C2;
    j["beta1"] = e.beta1;
    j["beta2"] = e.beta2;
    j["beta3"] = e.beta3;
    j["beta4"] = e.beta4;
    j["nu1_plus"] = e.nu1_plus;
    j["nu1_minus"] = e.nu1_minus;
    j["nu2_plus"] = e.nu2_plus;
    j["nu2_minus"] = e.nu2_minus;
    j["nu_plus"] = e.nu_plus;
    j["nu_minus"] = e.nu_minus;
    j["c"] = e.c;
    j["c_formula"] = e.c_formula;
    j["beta_weight_plus"] = e.beta_weight_plus;
    j["beta_weight_minus"] = e.beta_weight_minus;
    j["b1"] = e.b1;
    j["R_disc"] = e.R_disc;
    j["R_disc_real"] = e.r_disc_real;
    j["lam3_tilde_re"] = e.lam3_tilde_re;
    j["lam3_tilde_im"] = e.lam3_tilde_im;
    j["lam4_tilde_re"] = e.lam4_tilde_re;
    j["lam4_tilde_im"] = e.lam4_tilde_im;
    return j.dump(2);
}

}  // namespace tf
