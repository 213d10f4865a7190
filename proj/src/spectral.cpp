#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <unsupported/Eigen/MatrixFunctions>

namespace tf {

const char* band_name(Band b)
{
    switch (b) {
        case Band::low: return "low";
        case Band::middle: return "middle";
        case Band::high: return "high";
    }
    return "?";
}

RMat4 symbol_at(double k, const EquilibriumState& e)
{
    RMat4 A = RMat4::Zero();
    const double k2 = k * k, k3 = k2 * k;
    A(0, 1) = -k;
    A(1, 0) = e.beta1 * k + e.sigma_plus * k3;
    A(1, 1) = -e.nu_plus * k2;
    A(1, 2) = e.beta2 * k;
    A(2, 3) = -k;
    A(3, 0) = e.beta3 * k;
    A(3, 2) = e.beta4 * k + e.sigma_minus * k3;
    A(3, 3) = -e.nu_minus * k2;
    return A;
}

Quartic char_poly_coeffs(double k, const EquilibriumState& e)
{
    const double k2 = k * k, k4 = k2 * k2, k6 = k4 * k2, k8 = k4 * k4;
    const double np = e.nu_plus, nm = e.nu_minus, sp = e.sigma_plus, sm = e.sigma_minus;
    Quartic q;
    q.c3 = (np + nm) * k2;
    q.c2 = (e.beta1 + e.beta4) * k2 + (sp + sm + np * nm) * k4;
    q.c1 = (e.beta1 * nm + e.beta4 * np) * k4 + (np * sm + nm * sp) * k6;
    q.c0 = (e.beta1 * sm + e.beta4 * sp) * k6 + sp * sm * k8;
    return q;
}

namespace {

cd poly_eval(const Quartic& q, cd x, cd* deriv)
{
    cd p = (((x + q.c3) * x + q.c2) * x + q.c1) * x + q.c0;
    if (deriv) *deriv = ((4.0 * x + 3.0 * q.c3) * x + 2.0 * q.c2) * x + q.c1;
    return p;
}

const std::array<std::array<int, 4>, 24>& permutations()
{
    static const auto perms = [] {
        std::array<std::array<int, 4>, 24> out{};
        std::array<int, 4> p{0, 1, 2, 3};
        int n = 0;
        do {
            out[n++] = p;
        } while (std::next_permutation(p.begin(), p.end()));
        return out;
    }();
    return perms;
}

// Order `roots` so that roots[i] tracks pred[i]; ties keep the first minimum.
std::array<cd, 4> match_to(const std::array<cd, 4>& roots, const std::array<cd, 4>& pred)
{
    double best = std::numeric_limits<double>::infinity();
    const std::array<int, 4>* bestp = nullptr;
    for (const auto& p : permutations()) {
        double cost = 0;
        for (int i = 0; i < 4; ++i) cost += std::abs(roots[p[i]] - pred[i]);
        if (cost < best) {
            best = cost;
            bestp = &p;
        }
    }
    std::array<cd, 4> out{};
    for (int i = 0; i < 4; ++i) out[i] = roots[(*bestp)[i]];
    return out;
}

// Labels by structure: the conjugate oscillatory pair (|Im| > |Re|) becomes
// lambda1 (Im > 0) and lambda2, the remaining pair is sorted by modulus.
bool label_by_structure(const std::array<cd, 4>& r, std::array<cd, 4>& out)
{
    std::array<int, 4> idx{0, 1, 2, 3};
    std::vector<int> osc, diff;
    for (int i : idx) {
        if (std::fabs(r[i].imag()) > std::fabs(r[i].real())) osc.push_back(i);
        else diff.push_back(i);
    }
    if (osc.size() != 2) return false;
    cd a = r[osc[0]], b = r[osc[1]];
    if (a.imag() * b.imag() >= 0) return false;
    if (a.imag() < 0) std::swap(a, b);
    cd d0 = r[diff[0]], d1 = r[diff[1]];
    if (std::abs(d1) < std::abs(d0)) std::swap(d0, d1);
    out = {a, b, d0, d1};
    return true;
}

SpectralPoint finish_point(double k, const std::array<cd, 4>& lam, const EquilibriumState& e, const BandPartition& part)
{
    SpectralPoint sp;
    sp.k = k;
    sp.lambdas = lam;
    sp.band = k <= part.eta1 ? Band::low : (k >= part.K_cut ? Band::high : Band::middle);

    double maxabs = 0, mingap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        maxabs = std::max(maxabs, std::abs(lam[i]));
        for (int j = i + 1; j < 4; ++j) mingap = std::min(mingap, std::abs(lam[i] - lam[j]));
    }
    sp.degenerate = !(mingap >= 1e-6 * (1.0 + maxabs));
    // Projectors are still formed below the threshold (only the semigroup
    // switches path); coincident roots leave them undefined.
    if (!(mingap > 0)) {
        for (auto& P : sp.P) P.setZero();
        return sp;
    }
    const Mat4 A = symbol_at(k, e).cast<cd>();
    const Mat4 I = Mat4::Identity();
    for (int i = 0; i < 4; ++i) {
        Mat4 P = I;
        for (int j = 0; j < 4; ++j) {
            if (j == i) continue;
            P = P * (A - lam[j] * I) / (lam[i] - lam[j]);
        }
        sp.P[i] = P;
    }
    return sp;
}

}  // namespace

std::array<cd, 4> quartic_roots(const Quartic& q)
{
    // Rescale lambda = s*mu so the companion matrix has O(1) entries.
    const double s = std::max({std::fabs(q.c3), std::sqrt(std::fabs(q.c2)), std::cbrt(std::fabs(q.c1)),
                               std::sqrt(std::sqrt(std::fabs(q.c0))), std::numeric_limits<double>::min()});
    if (q.c3 == 0 && q.c2 == 0 && q.c1 == 0 && q.c0 == 0) return {0.0, 0.0, 0.0, 0.0};
    Eigen::Matrix4d C = Eigen::Matrix4d::Zero();
    C(0, 0) = -q.c3 / s;
    C(0, 1) = -q.c2 / (s * s);
    C(0, 2) = -q.c1 / (s * s * s);
    C(0, 3) = -q.c0 / (s * s * s * s);
    C(1, 0) = C(2, 1) = C(3, 2) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix4d> es(C, false);
    std::array<cd, 4> r{};
    for (int i = 0; i < 4; ++i) {
        cd x = es.eigenvalues()(i) * s;
        cd d;
        cd p = poly_eval(q, x, &d);
        if (std::abs(d) > 0) {
            cd xn = x - p / d;
            if (std::abs(poly_eval(q, xn, nullptr)) < std::abs(p)) x = xn;
        }
        r[i] = x;
    }
    return r;
}

SpectralPoint spectral_point_raw(double k, const EquilibriumState& e, const BandPartition& part)
{
    return finish_point(k, quartic_roots(char_poly_coeffs(k, e)), e, part);
}

SpectralPoint eigen_branches(double k, const EquilibriumState& e, const SpectralPoint* prev, const BandPartition& part)
{
    if (!(k >= 0) || !std::isfinite(k)) throw Error(ErrorCode::invalid_argument, "wavenumber must be non-negative");
    const auto roots = quartic_roots(char_poly_coeffs(k, e));
    for (const auto& r : roots)
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag()))
            throw Error(ErrorCode::branch, "unresolvable branch assignment: non-finite root");
    if (k == 0) return finish_point(k, roots, e, part);

    std::array<cd, 4> lam{};
    if (prev && prev->k > 0) {
        lam = match_to(roots, prev->lambdas);
    } else if (label_by_structure(roots, lam)) {
        // labelled directly
    } else {
        // Continue from the low band where the structural rule is unambiguous.
        double k0 = std::min(k, 0.5 * part.eta1);
        std::array<cd, 4> cur{};
        if (!label_by_structure(quartic_roots(char_poly_coeffs(k0, e)), cur))
            throw Error(ErrorCode::branch, "unresolvable branch assignment at continuation start");
        std::array<cd, 4> older = cur;
        double kprev = k0, kolder = k0;
        double kk = k0;
        while (kk < k) {
            kk = std::min(k, kk * 1.01);
            std::array<cd, 4> pred = cur;
            if (kprev > kolder)
                for (int i = 0; i < 4; ++i) pred[i] = cur[i] + (cur[i] - older[i]) * ((kk - kprev) / (kprev - kolder));
            auto next = match_to(quartic_roots(char_poly_coeffs(kk, e)), pred);
            older = cur;
            kolder = kprev;
            cur = next;
            kprev = kk;
        }
        lam = match_to(roots, cur);
    }
    return finish_point(k, lam, e, part);
}

std::vector<SpectralPoint> spectral_sweep(const std::vector<double>& ks, const EquilibriumState& e, const BandPartition& part)
{
    std::vector<SpectralPoint> out;
    out.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (i > 0 && ks[i] < ks[i - 1]) throw Error(ErrorCode::invalid_argument, "sweep grid must be increasing");
        const SpectralPoint* prev = (i > 0 && out.back().k > 0) ? &out.back() : nullptr;
        if (prev && i > 1 && out[i - 2].k > 0 && ks[i] > prev->k) {
            // linear extrapolation of the two previous points as prediction
            SpectralPoint guess = *prev;
            const auto& a = out[i - 2];
            for (int b = 0; b < 4; ++b)
                guess.lambdas[b] = prev->lambdas[b] + (prev->lambdas[b] - a.lambdas[b]) * ((ks[i] - prev->k) / (prev->k - a.k));
            out.push_back(eigen_branches(ks[i], e, &guess, part));
        } else {
            out.push_back(eigen_branches(ks[i], e, prev, part));
        }
    }
    return out;
}

Expansion low_freq_expansion(double k, const EquilibriumState& e)
{
    Expansion x;
    const double k2 = k * k;
    x.lambdas[0] = cd(-e.b1 * k2, e.c * k);
    x.lambdas[1] = cd(-e.b1 * k2, -e.c * k);
    x.lambdas[2] = cd(e.lam3_tilde_re, e.lam3_tilde_im) * k2;
    x.lambdas[3] = cd(e.lam4_tilde_re, e.lam4_tilde_im) * k2;
    x.complex_diffusive_pair = !e.r_disc_real;
    return x;
}

std::array<cd, 4> high_freq_expansion(double k, const EquilibriumState& e)
{
    const double k2 = k * k;
    cd rp = std::sqrt(cd(e.nu_plus * e.nu_plus - 4 * e.sigma_plus, 0));
    cd rm = std::sqrt(cd(e.nu_minus * e.nu_minus - 4 * e.sigma_minus, 0));
    return {-(e.nu_plus + rp) / 2.0 * k2, -(e.nu_plus - rp) / 2.0 * k2, -(e.nu_minus + rm) / 2.0 * k2,
            -(e.nu_minus - rm) / 2.0 * k2};
}

std::array<double, 4> matched_relative_errors(const std::array<cd, 4>& exact, const std::array<cd, 4>& approx)
{
    double best = std::numeric_limits<double>::infinity();
    std::array<double, 4> out{};
    for (const auto& p : permutations()) {
        std::array<double, 4> err{};
        double worst = 0;
        for (int i = 0; i < 4; ++i) {
            err[i] = std::abs(exact[i] - approx[p[i]]) / std::max(std::abs(exact[i]), 1e-300);
            worst = std::max(worst, err[i]);
        }
        if (worst < best) {
            best = worst;
            out = err;
        }
    }
    return out;
}

double max_real_part(double k, const EquilibriumState& e)
{
    auto r = quartic_roots(char_poly_coeffs(k, e));
    double m = -std::numeric_limits<double>::infinity();
    for (auto& x : r) m = std::max(m, x.real());
    return m;
}

double mid_band_gap(const EquilibriumState& e, const BandPartition& part, int samples)
{
    if (!(part.eta1 > 0 && part.eta1 < part.K_cut)) throw Error(ErrorCode::invalid_argument, "need 0 < eta1 < K");
    samples = std::max(samples, 2000);
    std::vector<double> ks(samples), f(samples);
    for (int i = 0; i < samples; ++i) {
        ks[i] = part.eta1 + (part.K_cut - part.eta1) * i / (samples - 1);
        f[i] = max_real_part(ks[i], e);
    }
    double best = *std::max_element(f.begin(), f.end());
    // Golden-section refinement around every local maximum of the sampled curve.
    for (int i = 0; i < samples; ++i) {
        bool left = i == 0 || f[i] >= f[i - 1];
        bool right = i == samples - 1 || f[i] >= f[i + 1];
        if (!(left && right)) continue;
        double a = ks[std::max(i - 1, 0)], b = ks[std::min(i + 1, samples - 1)];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        double f1 = max_real_part(x1, e), f2 = max_real_part(x2, e);
        for (int it = 0; it < 60 && (b - a) > 1e-12 * b; ++it) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + g * (b - a); f2 = max_real_part(x2, e);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - g * (b - a); f1 = max_real_part(x1, e);
            }
        }
        best = std::max({best, f1, f2});
    }
    const double gap = -best;
    if (!(gap > 0)) throw Error(ErrorCode::numerical, "middle-band spectral gap is not positive");
    return gap;
}

Mat4 semigroup_spectral(const SpectralPoint& sp, double t)
{
    Mat4 S = Mat4::Zero();
    for (int i = 0; i < 4; ++i) S += std::exp(sp.lambdas[i] * t) * sp.P[i];
    return S;
}

Mat4 semigroup_expm(double k, double t, const EquilibriumState& e)
{
    RMat4 M = symbol_at(k, e) * t;
    RMat4 E = M.exp();
    return E.cast<cd>();
}

Mat4 semigroup_from(const SpectralPoint& sp, double t, const EquilibriumState& e)
{
    if (t == 0) return Mat4::Identity();
    if (sp.degenerate) return semigroup_expm(sp.k, t, e);
    return semigroup_spectral(sp, t);
}

Mat4 semigroup(double k, double t, const EquilibriumState& e)
{
    if (!(k >= 0) || !(t >= 0)) throw Error(ErrorCode::invalid_argument, "semigroup needs k >= 0 and t >= 0");
    if (t == 0) return Mat4::Identity();
    return semigroup_from(spectral_point_raw(k, e), t, e);
}

}  // namespace tf
