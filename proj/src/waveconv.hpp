#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "common.hpp"

namespace tf {

// Radial space-time profile. D and H follow the envelope formulas with
// s = 1 + T; Alg is (1 + rho^2)^{-p} and ignores T.
struct WavePattern {
    enum class Kind { D, H, Alg };
    Kind kind = Kind::D;
    double a = 0, p = 1, c = 0;

    double value(double rho, double T) const;
    // Integral of z * value(z, T) over [lo, hi], 0 <= lo <= hi, in closed form.
    double moment(double lo, double hi, double T) const;
    std::string label() const;
};
WavePattern pat_D(double a, double p);
WavePattern pat_H(double a, double p, double c);
WavePattern pat_alg(double p);

// Generic convolution of two radial functions on R^3 at |x| = r, by nested
// adaptive quadrature over u = |y| and z = |x - y|.
double angular_reduce(double r, const std::function<double(double)>& F, const std::function<double(double)>& G,
                      double rel_tol = 1e-10);

// int_{R^3} green(|x-y|, Tg) source(|y|, Ts) dy at |x| = r, with the inner
// z-integral done by WavePattern::moment.
double spatial_conv(const WavePattern& green, double Tg, const WavePattern& source, double Ts, double r,
                    double rel_tol = 1e-8);

struct ConvCase {
    std::string name;
    WavePattern green, source;
    std::vector<WavePattern> bound;
    bool spatial = false;      // no time integral: green at T = t, source at T = 0
    double tau_fraction = 1.0; // time integral over [0, tau_fraction * t]
};

// Named cases: I1 I2 I3 K1..K7 N12_log N1 and K4_false (K4 against a bound
// without the slow diffusive term). c is the propagation speed.
ConvCase conv_case(const std::string& name, double c);
std::vector<std::string> conv_case_names();

double eval_spacetime_conv(const ConvCase& cc, double r, double t, double rel_tol = 1e-7);
double eval_bound(const ConvCase& cc, double r, double t);

// Space-time region tag 1..5; boundary points take the lowest matching tag.
int region_of(double r, double t, double c);
std::vector<double> sample_radii(double t, double c);

struct ConvSample {
    double r = 0, t = 0;
    int region = 0;
    double lhs = 0, bound = 0, ratio = 0;
};

struct ConvReport {
    std::string name;
    std::vector<ConvSample> samples;
    std::map<int, double> c_est_by_region;
    double c_est = 0;
    double trend_ratio = 0;      // later-half max over earlier-half max
    double end_ratio = 0;        // last t over first t, for reference
    double growth_exponent = 0;  // slope of log(max ratio per t) against log(1+t)
    double growth_exponent_d1 = 0;  // same, near field r <= sqrt(1+t) only
    bool pass = false;
};

ConvReport verify_case(const ConvCase& cc, const std::vector<double>& t_list, double c);

struct LogObstruction {
    std::vector<double> t, n12, n1;  // N12 and N1 at x = 0
    double slope = 0, intercept = 0, correlation = 0;  // (1+t) N12 against ln(1+t)
    double ratio_16_256 = 0;  // (1+t) N12 at 256 over 16, when both are sampled
    // last local log-slope of (1+t) N over its maximum along the list
    double n12_slope_decay = 0, n1_slope_decay = 0;
};
LogObstruction log_obstruction(const std::vector<double>& t_list, double c);

struct RieszReport {
    std::vector<double> t, sup;  // sup over r of the kernel (scaled by the bound)
    double c_min = 0, c_max = 0;
    double slope = 0;            // fitted exponent, meaning depends on the check
    double closed_form_err = 0;
    double profile_exponent = 0;
    bool pass = false;
};

// |grad (-Delta)^{-1} f| for radial f: (1/r^2) int_0^r f(u) u^2 du.
double newton_gradient(const std::function<double(double)>& f, double r);

// f = D(0, p) at each t: returns sup of the gradient against
// (1+t)^{1/2}(1+r^2/(1+t))^{-1}, the scaling slope of the raw sup, the
// Gaussian closed-form error and the far-field exponent at t = 0.
RieszReport riesz_potential_check(double p, const std::vector<double>& t_list);

// f = heat kernel at time t: second-order Riesz transform evaluated
// spectrally and cross-checked against the Newton-potential Hessian.
RieszReport double_riesz_check(const std::vector<double>& t_list);

}  // namespace tf
