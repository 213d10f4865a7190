#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "spectral.hpp"

namespace tf {

// ---------------------------------------------------------------------------
// Linear evolution on a radial wavenumber grid.
//
// A mode is carried by its compressible 4-vector (n+, phi+, n-, phi-) and the
// two incompressible amplitudes. Angular factors are absorbed into the radial
// amplitudes so that squared norms come out as 4 pi int k^2 |f|^2 dk.

struct LinearRadialState {
    EquilibriumState eq;
    std::vector<double> k;
    std::vector<std::array<cd, 4>> U;
    std::vector<cd> inc_plus, inc_minus;
    double t = 0;
};

std::vector<double> log_k_grid(double k_min, double k_max, int count);
std::vector<double> uniform_k_grid(double k_max, int count);  // k_max / count, ..., k_max

// Momentum data m+ = g(k) e_1 (m- = 0, n = 0) with g(k) = exp(-k^2 s0^2 / 2).
LinearRadialState gaussian_momentum_data(const EquilibriumState& eq, const std::vector<double>& k, double s0);

LinearRadialState linear_evolve(const LinearRadialState& init, double t);

struct RadialNorms {
    double n_plus = 0, n_minus = 0, m_plus = 0, m_minus = 0, combo = 0;
};
// Trapezoid rule in k on the state's grid; the value at k = 0 is taken as 0.
double radial_l2(const std::vector<double>& k, const std::vector<double>& abs2);
RadialNorms l2_norms(const LinearRadialState& s);

struct SlopeFit {
    double slope = 0, intercept = 0, stderr_slope = 0;
};
// Least squares of log(norm) against log(1+t). Needs at least 8 samples
// spanning two decades of 1+t; throws Error(numerical) otherwise.
SlopeFit fit_decay_slope(const std::vector<double>& times, const std::vector<double>& norms);

struct DecayTable {
    std::vector<double> t;
    std::vector<RadialNorms> norms;
    SlopeFit n_plus, n_minus, m_plus, m_minus, combo;
};
// Evolves the Gaussian momentum data to each t on a grid resolved for that
// time (oscillation period and diffusive cutoff), then fits the slopes.
DecayTable linear_decay_table(const EquilibriumState& eq, const std::vector<double>& t_list, double s0 = 0.25);

// ---------------------------------------------------------------------------
// Periodic box [-L, L)^3 with n^3 points.

struct SimState {
    ModelParams params;
    EquilibriumState eq;
    double L = 64;
    int n = 48;
    double t = 0;
    // n+, m+x, m+y, m+z, n-, m-x, m-y, m-z, each n^3 values stored with
    // index (ix * n + iy) * n + iz. Point i sits at i * 2L / n, wrapped to [-L, L).
    std::array<std::vector<double>, 8> f;
};

enum Field { NP = 0, MPX, MPY, MPZ, NM, MMX, MMY, MMZ };

SimState zero_state(const ModelParams& p, int n, double L);
// m+ = m- = eps grad psi with psi = w exp(-|x|^2 / (2 w^2)), projected onto the
// dealiased band; n = 0.
SimState blob_state(const ModelParams& p, int n, double L, double eps, double w);
// n+ = eps cos(2 pi x / L), everything else zero.
SimState single_mode_state(const ModelParams& p, int n, double L, double eps);
// Radius beyond which the blob data are below 1e-6 of their peak.
double blob_support_radius(double w);

struct Diagnostics {
    double t = 0;
    double mass_plus = 0, mass_minus = 0;
    std::array<double, 3> momentum{};
    double momentum_scale = 0;  // int |m+| + |m-| dx
    double l2_np = 0, l2_nm = 0, l2_mp = 0, l2_mm = 0, l2_combo = 0;
    double ring_r = 0;
    std::vector<double> shell_r, shell_avg;
};

// Pseudo-spectral engine. Holds FFT plans, the dealiasing mask and the
// semigroup cache; the state lives in Fourier space between steps.
class Solver {
public:
    Solver(const SimState& init, bool nonlinear = true);
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    void step(double dt);
    double time() const;
    SimState state() const;
    Diagnostics diagnostics() const;
    // Largest dt from the retained wavelength and the propagation speed.
    double dt_max() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Nonlinear increments of the momentum equations (continuity entries are
// zero), in physical space after dealiasing.
std::array<std::vector<double>, 8> nonlinear_rhs(const SimState& s);

// The seven factored pieces of the non-conservative pressure remainder for
// each phase (index 0 for +, 1 for -), three components per piece.
struct QTerms {
    std::array<std::array<std::array<std::vector<double>, 3>, 7>, 2> S;
    std::array<std::array<std::vector<double>, 3>, 2> Q;  // sums of the pieces
};
QTerms q_terms(const SimState& s);
// alpha grad P minus the linearized pressure terms, by the chain rule. Used
// as an algebraic cross-check of q_terms.
std::array<std::array<std::vector<double>, 3>, 2> q_direct(const SimState& s);

SimState step(const SimState& s, double dt, bool nonlinear = true);
// Applies the exact linear semigroup to the grid state for time t.
SimState linear_grid_evolve(const SimState& s, double t);

struct SimConfig {
    bool nonlinear = true;
    int n = 48;
    double L = 64;
    double eps = 1e-3;
    double width = 5.0;
    double t_final = -1;  // negative selects L / (2c)
    double dt = 0;        // 0 selects the largest stable step
    std::vector<double> checkpoints;  // times that must be hit exactly
};

struct SimRun {
    std::vector<Diagnostics> rows;
    std::vector<Diagnostics> at_checkpoints;
    double horizon = 0;  // (L - r_support) / c
    double dt = 0;
    SimState final_state;
};

// Throws Error(invalid_argument) when t_final exceeds the wrap horizon.
SimRun run_simulation(const ModelParams& p, const SimConfig& cfg,
                      const std::function<void(const Diagnostics&)>& on_step = {});

std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const Diagnostics& d);
// Little-endian float64: n, L, t, then the eight fields in Field order.
void write_state_dump(const SimState& s, const std::string& path);
SimState read_state_dump(const std::string& path, const ModelParams& p);

}  // namespace tf
