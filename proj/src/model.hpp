#pragma once

#include <iosfwd>
#include <string>

#include "common.hpp"

namespace tf {

// Raw physical constants of the two-phase model. The defaults are the
// symmetric reference set used throughout the test-suite.
struct ModelParams {
    double mu_plus = 1.0, mu_minus = 1.0;
    double lambda_plus = 0.0, lambda_minus = 0.0;
    double sigma_plus = 0.01, sigma_minus = 0.01;
    double a_plus = 1.0, a_minus = 1.0;
    double gamma_plus = 2.0, gamma_minus = 2.0;
};

struct EquilibriumState {
    ModelParams params;
    double rho_bar_plus = 0, rho_bar_minus = 0;
    double alpha_bar_plus = 0, alpha_bar_minus = 0;
    double s2_plus = 0, s2_minus = 0;
    double C2 = 0;
    double beta1 = 0, beta2 = 0, beta3 = 0, beta4 = 0;
    double nu1_plus = 0, nu1_minus = 0, nu2_plus = 0, nu2_minus = 0;
    double nu_plus = 0, nu_minus = 0;
    double sigma_plus = 0, sigma_minus = 0;
    double c = 0;          // sqrt(beta1 + beta4)
    double c_formula = 0;  // speed from the pressure-derivative formula, kept as a cross-check
    double beta_weight_plus = 0, beta_weight_minus = 0;
    double b1 = 0;
    // Discriminant of the diffusive pair. When it is negative the pair is
    // complex, R_disc is stored as sqrt(|disc|) and r_disc_real is false.
    double R_disc = 0;
    bool r_disc_real = true;
    double lam3_tilde_re = 0, lam3_tilde_im = 0;
    double lam4_tilde_re = 0, lam4_tilde_im = 0;
};

struct FractionState {
    double rho_plus, rho_minus, alpha_plus, C2;
};

struct DegeneracyReport {
    bool applicable = false;
    std::string note;
    double a2 = 0, ratio = 0, abs_err = 0;
};

// Throws Error(constraint) naming the failing field.
ModelParams validate_params(const ModelParams& p);

double pressure_plus(const ModelParams& p, double rho);
double pressure_minus(const ModelParams& p, double rho);
double sound2_plus(const ModelParams& p, double rho);
double sound2_minus(const ModelParams& p, double rho);

EquilibriumState solve_equilibrium(const ModelParams& p);

// Local densities from the fraction densities R±. `guess` seeds the Newton
// iteration for rho_plus; a non-positive guess selects the default seed.
FractionState solve_fraction_map(double R_plus, double R_minus, const ModelParams& p, double guess = 0.0);

DegeneracyReport check_combination_degeneracy(const EquilibriumState& eq);

ModelParams parse_params(std::istream& in);
ModelParams load_params(const std::string& path);
std::string equilibrium_json(const EquilibriumState& eq);

}  // namespace tf
