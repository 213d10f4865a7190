#pragma once

#include <functional>
#include <vector>

namespace tf {

enum class TensorFactor { scalar, riesz_vector, riesz_vector_t, riesz_matrix, complement };
const char* factor_name(TensorFactor f);

// C-infinity bump: 1 on [0, eta/2], 0 beyond eta. eta <= 0 disables it.
double smooth_cutoff(double k, double eta);

struct QuadNodes {
    std::vector<double> k, w;
};

// Gauss-Legendre panels on [0, kmax]; each panel advances the phase
// phase_rate*k by at most pi/4, halved `refine` times.
QuadNodes phase_panels(double kmax, double phase_rate, int refine = 0);

// Radial amplitudes of the 3D inverse transform of profile(|xi|) * factor.
// scalar / vector factors use `a` (vectors point along x/|x|);
// matrix factors use a = longitudinal, b = transverse.
struct RadialAmp {
    double a = 0, b = 0;
};
double amp_magnitude(const RadialAmp& v, TensorFactor f);

RadialAmp radial_reduce(const QuadNodes& q, const std::vector<double>& profile, double r, TensorFactor f);
std::vector<RadialAmp> radial_reduce_grid(const QuadNodes& q, const std::vector<double>& profile,
                                          const std::vector<double>& r, TensorFactor f);

struct RadialResult {
    RadialAmp amp;
    double err = 0;
    int levels = 0;
};

// Panel-halving until two successive resolutions agree to tol_abs.
RadialResult radial_transform(const std::function<double(double)>& profile, double r, TensorFactor f,
                              double kmax, double phase_rate, double tol_abs = 1e-9);

}  // namespace tf
