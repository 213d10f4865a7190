#pragma once

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"

namespace tf {

using cd = std::complex<double>;
using Mat4 = Eigen::Matrix<cd, 4, 4>;
using RMat4 = Eigen::Matrix4d;

enum class Band { low, middle, high };
const char* band_name(Band b);

struct BandPartition {
    double eta1 = 0.1;
    double K_cut = 10.0;
};

struct Quartic {
    double c3 = 0, c2 = 0, c1 = 0, c0 = 0;
};

struct SpectralPoint {
    double k = 0;
    std::array<cd, 4> lambdas{};
    std::array<Mat4, 4> P{};
    bool degenerate = true;
    Band band = Band::low;
};

// Real 4x4 symbol acting on (n+, phi+, n-, phi-).
RMat4 symbol_at(double k, const EquilibriumState& eq);
Quartic char_poly_coeffs(double k, const EquilibriumState& eq);

// Unordered roots of the quartic: companion eigenvalues plus one Newton polish.
std::array<cd, 4> quartic_roots(const Quartic& q);

SpectralPoint eigen_branches(double k, const EquilibriumState& eq, const SpectralPoint* prev = nullptr,
                             const BandPartition& part = {});

// Eigen-data without branch labels; enough for the semigroup.
SpectralPoint spectral_point_raw(double k, const EquilibriumState& eq, const BandPartition& part = {});

// Branch-labelled sweep over an increasing k grid, chained by continuity.
std::vector<SpectralPoint> spectral_sweep(const std::vector<double>& ks, const EquilibriumState& eq,
                                          const BandPartition& part = {});

struct Expansion {
    std::array<cd, 4> lambdas{};
    bool complex_diffusive_pair = false;
};
Expansion low_freq_expansion(double k, const EquilibriumState& eq);
std::array<cd, 4> high_freq_expansion(double k, const EquilibriumState& eq);

// Smallest relative error between exact roots and expansion roots over all pairings.
std::array<double, 4> matched_relative_errors(const std::array<cd, 4>& exact, const std::array<cd, 4>& approx);

double max_real_part(double k, const EquilibriumState& eq);
double mid_band_gap(const EquilibriumState& eq, const BandPartition& part, int samples = 2000);

Mat4 semigroup(double k, double t, const EquilibriumState& eq);
Mat4 semigroup_spectral(const SpectralPoint& sp, double t);
Mat4 semigroup_expm(double k, double t, const EquilibriumState& eq);
// Dispatches on the degeneracy flag.
Mat4 semigroup_from(const SpectralPoint& sp, double t, const EquilibriumState& eq);

}  // namespace tf
