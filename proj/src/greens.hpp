#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "radial.hpp"
#include "spectral.hpp"

namespace tf {

struct Envelope {
    enum class Kind { D, H, R4 };
    Kind kind = Kind::D;
    double time_exp = 0, space_exp = 0;
    double N = 0;      // H: spatial exponent when positive, otherwise space_exp is used
    double speed = 0;  // H only
    double value(double r, double t) const;
    std::string label() const;
};
Envelope env_D(double a, double p);
Envelope env_R4();
Envelope env_H(double a, double p, double N, double c);

struct RadialSymbol {
    TensorFactor factor = TensorFactor::scalar;
    int branch = 0;         // 1..4 compressible branch, 0 for the incompressible heat part
    bool singular = false;  // profile ~ 1/k as k -> 0
    std::string label;
    std::function<double(double k, double t)> profile;
};

// Factor carried by block entry (i, j) of the 8x8 Green matrix in the
// (n+, m+, n-, m-) ordering, 1-based.
TensorFactor entry_factor(int i, int j);
std::vector<RadialSymbol> entry_symbol(int i, int j, const EquilibriumState& eq);

// 3D inverse transform of a symbol with the low-band cutoff chi(k; eta)
// (eta <= 0 removes it; kmax then bounds the integration range).
RadialAmp radial_inverse(const RadialSymbol& sym, double r, double t, double eta, double kmax = 0);

struct WaveSplit {
    double input = 0, w_part = 0, wt_part = 0, remainder = 0;
};
// plus_pair: (e^{l1 t}+e^{l2 t})/2; otherwise (e^{l1 t}-e^{l2 t})/(2i).
WaveSplit wave_split(double k, double t, const EquilibriumState& eq, bool plus_pair);

// Linear combination sum_w w * G_{ij}; all terms must share a tensor factor
// up to the complement heat part of diagonal momentum entries.
struct EntryCombo {
    std::string name;
    std::vector<std::tuple<int, int, double>> terms;
};
EntryCombo single_entry(int i, int j);

struct KernelOptions {
    double K_cut = 10.0;       // smooth cutoff removing the high band
    int nr = 256;
    double r_max_factor = 4.0; // r in [0, r_max_factor * c * t]
    int refine = 0;
};

struct KernelSlice {
    double t = 0;
    TensorFactor factor = TensorFactor::scalar;
    std::vector<double> r;
    std::vector<RadialAmp> amp;
    double richardson_err = 0;
};

KernelSlice entry_kernel(const EquilibriumState& eq, const EntryCombo& combo, double t, const KernelOptions& opt);

// Scalar kernel of the wave-operator factor inside G12's oscillatory pair:
// the profile (e^{l1 t}-e^{l2 t})/(2ik) with a smooth cutoff at k_cut.
KernelSlice wave_component_kernel(const EquilibriumState& eq, double t, double k_cut, int nr, double r_max);

struct EnvelopeReport {
    std::string entry;
    std::vector<std::string> envelopes;
    std::vector<double> t;
    std::vector<double> c_total, c_d1, c_cone, c_else;
    double c_est = 0, c_est_d1 = 0, c_est_cone = 0, c_est_else = 0;
    double trend_ratio = 0;
    double growth_exponent = 0, growth_exponent_d1 = 0;
    bool pass = false;
};

std::vector<double> log_time_grid(double t0, double t1, int n);

EnvelopeReport evaluate_envelopes(const std::string& entry, const std::vector<KernelSlice>& kernels,
                                  const std::vector<Envelope>& envs, double c, double trend_limit = 2.0);

std::vector<KernelSlice> combo_kernels(const EquilibriumState& eq, const EntryCombo& combo,
                                       const std::vector<double>& t, const KernelOptions& opt);

EnvelopeReport verify_entry_envelope(const EquilibriumState& eq, int i, int j, const std::vector<Envelope>& envs,
                                     const std::vector<double>& t, const KernelOptions& opt = {});

// rho_bar_minus*G12 + rho_bar_plus*G32 (weights swapped when `swapped`).
EntryCombo cancellation_combo(const EquilibriumState& eq, bool swapped);
EnvelopeReport verify_cancellation(const EquilibriumState& eq, const std::vector<double>& t, bool swapped = false,
                                   const KernelOptions& opt = {});

// Symbol-level check of the 1/k cancellation: returns
// |rho- S12 + rho+ S32| * k relative to |S12| * k at wavenumber k, for the
// diffusive branches at t = 0 (the projector combination).
double symbol_cancellation_residual(const EquilibriumState& eq, double k, bool swapped);

// L2 mass of the entry profile above K at time t.
double high_band_mass(const EquilibriumState& eq, int i, int j, double t, double K);

// Direct 3D FFT of profile(k)*factor on an n^3 periodic box of side Lbox,
// sampled along the positive x axis at the requested radii (x component
// for vectors, xx component for matrices).
std::vector<double> fft_oracle(const std::function<double(double)>& profile, TensorFactor f, int n, double Lbox,
                               const std::vector<double>& r);

}  // namespace tf
