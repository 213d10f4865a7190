#pragma once

#include <random>

#include "model.hpp"

namespace testing_support {

// Admissible parameter sets drawn from a fixed-seed generator, so failures reproduce.
inline tf::ModelParams random_params(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };
    tf::ModelParams p;
    p.mu_plus = in(0.3, 2.0);
    p.mu_minus = in(0.3, 2.0);
    p.lambda_plus = in(-0.15, 1.0) * p.mu_plus;
    p.lambda_minus = in(-0.15, 1.0) * p.mu_minus;
    p.sigma_plus = in(0.005, 0.05);
    p.sigma_minus = in(0.005, 0.05);
    p.a_plus = in(0.5, 3.0);
    p.a_minus = in(0.5, 3.0);
    p.gamma_plus = in(1.2, 3.0);
    p.gamma_minus = in(1.2, 3.0);
    return p;
}

inline tf::ModelParams asymmetric_params()
{
    tf::ModelParams p;
    p.a_minus = 2.0;
    return p;
}

}  // namespace testing_support
