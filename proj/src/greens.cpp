#include "greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fftw3.h>

#include "parallel.hpp"

namespace tf {

double Envelope::value(double r, double t) const
{
    const double s = 1.0 + t;
    switch (kind) {
        case Kind::R4: return 1.0 / (s * (1.0 + r * r / s));
        case Kind::D: return std::pow(s, -time_exp) * std::pow(1.0 + r * r / s, -space_exp);
        case Kind::H: {
            const double d = r - speed * t;
            const double p = N > 0 ? N : space_exp;
            return std::pow(s, -time_exp) * std::pow(1.0 + d * d / s, -p);
        }
    }
    return 0;
}

std::string Envelope::label() const
{
    std::ostringstream os;
    switch (kind) {
        case Kind::R4: os << "R4"; break;
        case Kind::D: os << "D(" << time_exp << "," << space_exp << ")"; break;
        case Kind::H: os << "H(" << time_exp << "," << (N > 0 ? N : space_exp) << ")"; break;
    }
    return os.str();
}

Envelope env_D(double a, double p) { return {Envelope::Kind::D, a, p, 0, 0}; }
Envelope env_R4() { return {Envelope::Kind::R4, 1, 1, 0, 0}; }
Envelope env_H(double a, double p, double N, double c) { return {Envelope::Kind::H, a, p, N, c}; }

TensorFactor entry_factor(int i, int j)
{
    if (i < 1 || i > 4 || j < 1 || j > 4) throw Error(ErrorCode::invalid_argument, "entry indices must be in 1..4");
    const bool row_density = (i % 2) == 1, col_density = (j % 2) == 1;
    if (row_density && col_density) return TensorFactor::scalar;
    if (row_density) return TensorFactor::riesz_vector_t;
    if (col_density) return TensorFactor::riesz_vector;
    return TensorFactor::riesz_matrix;
}

namespace {

// Profile sign relative to the 4x4 semigroup entry. Momentum rows pick up
// m = -i xi/|xi| phi, so the column-density entries change sign.
double entry_sign(int i, int j)
{
    return entry_factor(i, j) == TensorFactor::riesz_vector ? -1.0 : 1.0;
}

double heat_rate(const EquilibriumState& e, int i) { return i == 2 ? e.nu1_plus : e.nu1_minus; }

}  // namespace

std::vector<RadialSymbol> entry_symbol(int i, int j, const EquilibriumState& e)
{
    const TensorFactor f = entry_factor(i, j);
    const double sign = entry_sign(i, j);
    const bool singular_entry = (i % 2 == 1) && (j % 2 == 0);
    std::vector<RadialSymbol> out;

    RadialSymbol wave;
    wave.factor = f;
    wave.branch = 12;
    wave.label = "(e^{l1 t}P1 + e^{l2 t}P2)_" + std::to_string(i) + std::to_string(j);
    wave.profile = [=](double k, double t) {
        if (k == 0) return 0.0;
        SpectralPoint sp = eigen_branches(k, e);
        cd v = std::exp(sp.lambdas[0] * t) * sp.P[0](i - 1, j - 1) + std::exp(sp.lambdas[1] * t) * sp.P[1](i - 1, j - 1);
        return sign * v.real();
    };
    out.push_back(wave);

    for (int b : {3, 4}) {
        RadialSymbol d;
        d.factor = f;
        d.branch = b;
        d.singular = singular_entry;
        d.label = "e^{l" + std::to_string(b) + " t}P" + std::to_string(b) + "_" + std::to_string(i) + std::to_string(j);
        d.profile = [=](double k, double t) {
            if (k == 0) return 0.0;
            SpectralPoint sp = eigen_branches(k, e);
            cd v = std::exp(sp.lambdas[b - 1] * t) * sp.P[b - 1](i - 1, j - 1);
            return sign * v.real();
        };
        out.push_back(d);
    }

    if (i == j && i % 2 == 0) {
        RadialSymbol h;
        h.factor = TensorFactor::complement;
        h.branch = 0;
        h.label = "e^{-nu1 k^2 t}(I - xi xi^T/|xi|^2)";
        const double nu1 = heat_rate(e, i);
        h.profile = [=](double k, double t) { return std::exp(-nu1 * k * k * t); };
        out.push_back(h);
    }
    return out;
}

RadialAmp radial_inverse(const RadialSymbol& sym, double r, double t, double eta, double kmax)
{
    const double top = eta > 0 ? eta : kmax;
    if (!(top > 0)) throw Error(ErrorCode::invalid_argument, "radial_inverse needs a cutoff or kmax");
    auto prof = [&](double k) { return sym.profile(k, t) * smooth_cutoff(k, eta); };
    // speed bound: the oscillatory pair travels at most at ~ |Im lambda|/k
    const double phase = r + 4.0 * t + 1.0;
    return radial_transform(prof, r, sym.factor, top, phase, 1e-9).amp;
}

WaveSplit wave_split(double k, double t, const EquilibriumState& e, bool plus_pair)
{
    WaveSplit w;
    const SpectralPoint sp = eigen_branches(k, e);
    const cd l1 = sp.lambdas[0], l2 = sp.lambdas[1];
    const cd pair = plus_pair ? (std::exp(l1 * t) + std::exp(l2 * t)) / 2.0
                              : (std::exp(l1 * t) - std::exp(l2 * t)) / cd(0, 2);
    w.input = pair.real();
    const double E = std::exp(l1.real() * t);
    const double E0 = std::exp(-e.b1 * k * k * t);
    const double theta = l1.imag() * t - e.c * k * t;
    const double cw = std::cos(e.c * k * t), sw = std::sin(e.c * k * t);
    if (plus_pair) {
        w.wt_part = E0 * cw;
        w.remainder = cw * (E * std::cos(theta) - E0) - sw * E * std::sin(theta);
    } else {
        w.w_part = E0 * sw;  // k * w_hat * e^{-b1 k^2 t}
        w.remainder = sw * (E * std::cos(theta) - E0) + cw * E * std::sin(theta);
    }
    return w;
}

EntryCombo single_entry(int i, int j)
{
    EntryCombo c;
    c.name = "G" + std::to_string(i) + std::to_string(j);
    c.terms.emplace_back(i, j, 1.0);
    return c;
}

KernelSlice entry_kernel(const EquilibriumState& e, const EntryCombo& combo, double t, const KernelOptions& opt)
{
    if (combo.terms.empty()) throw Error(ErrorCode::invalid_argument, "empty entry combination");
    const auto [i0, j0, w0] = combo.terms.front();
    (void)w0;
    const TensorFactor f = entry_factor(i0, j0);
    bool has_complement = false;
    for (auto [i, j, w] : combo.terms) {
        if (entry_factor(i, j) != f) throw Error(ErrorCode::invalid_argument, "combination mixes tensor factors");
        if (i == j && i % 2 == 0 && w != 0) has_complement = true;
    }

    KernelSlice ks;
    ks.t = t;
    ks.factor = f;
    const double rmax = opt.r_max_factor * e.c * t;
    ks.r.resize(opt.nr);
    for (int m = 0; m < opt.nr; ++m) ks.r[m] = rmax * m / (opt.nr - 1);

    auto build = [&](int refine, std::vector<double>& kk, std::vector<double>& ww, std::vector<double>& pc,
                     std::vector<double>& ph) {
        QuadNodes q = phase_panels(opt.K_cut, rmax + e.c * t + 1.0, refine);
        const std::size_t n = q.k.size();
        pc.assign(n, 0.0);
        ph.assign(n, 0.0);
        parallel_for(n, [&](std::size_t a) {
            const double k = q.k[a];
            const double chi = smooth_cutoff(k, opt.K_cut);
            if (chi == 0) return;
            const SpectralPoint sp = spectral_point_raw(k, e);
            const Mat4 S = semigroup_from(sp, t, e);
            double v = 0, h = 0;
            for (auto [i, j, w] : combo.terms) {
                v += w * entry_sign(i, j) * S(i - 1, j - 1).real();
                if (i == j && i % 2 == 0) h += w * std::exp(-heat_rate(e, i) * k * k * t);
            }
            pc[a] = chi * v;
            ph[a] = chi * h;
        });
        // drop the numerically dead tail
        double peak = 0;
        for (std::size_t a = 0; a < n; ++a) peak = std::max(peak, q.k[a] * q.k[a] * (std::fabs(pc[a]) + std::fabs(ph[a])));
        std::size_t last = n;
        while (last > 0 && q.k[last - 1] * q.k[last - 1] * (std::fabs(pc[last - 1]) + std::fabs(ph[last - 1])) <= 1e-22 * peak) --last;
        last = std::min(n, last + 20);
        kk.assign(q.k.begin(), q.k.begin() + last);
        ww.assign(q.w.begin(), q.w.begin() + last);
        pc.resize(last);
        ph.resize(last);
    };

    auto evaluate = [&](int refine, const std::vector<double>& radii) {
        std::vector<double> kk, ww, pc, ph;
        build(refine, kk, ww, pc, ph);
        QuadNodes q{kk, ww};
        std::vector<RadialAmp> a = radial_reduce_grid(q, pc, radii, f);
        if (has_complement) {
            std::vector<RadialAmp> b = radial_reduce_grid(q, ph, radii, TensorFactor::complement);
            for (std::size_t m = 0; m < a.size(); ++m) {
                a[m].a += b[m].a;
                a[m].b += b[m].b;
            }
        }
        return a;
    };

    ks.amp = evaluate(opt.refine, ks.r);
    // Richardson-style check on a sub-grid with halved panels.
    std::vector<double> sub;
    std::vector<std::size_t> idx;
    for (std::size_t m = 0; m < ks.r.size(); m += std::max<std::size_t>(1, ks.r.size() / 8)) {
        sub.push_back(ks.r[m]);
        idx.push_back(m);
    }
    std::vector<RadialAmp> fine = evaluate(opt.refine + 1, sub);
    for (std::size_t m = 0; m < idx.size(); ++m) {
        ks.richardson_err = std::max(ks.richardson_err, std::fabs(fine[m].a - ks.amp[idx[m]].a));
        ks.richardson_err = std::max(ks.richardson_err, std::fabs(fine[m].b - ks.amp[idx[m]].b));
    }
    if (ks.richardson_err > 1e-9) throw Error(ErrorCode::quadrature, "entry kernel quadrature not converged");
    return ks;
}

KernelSlice wave_component_kernel(const EquilibriumState& e, double t, double k_cut, int nr, double r_max)
{
    KernelSlice ks;
    ks.t = t;
    ks.factor = TensorFactor::scalar;
    ks.r.resize(nr);
    for (int m = 0; m < nr; ++m) ks.r[m] = r_max * m / (nr - 1);
    QuadNodes q = phase_panels(k_cut, r_max + e.c * t + 1.0, 1);
    std::vector<double> ks_nodes = q.k;
    std::vector<SpectralPoint> sweep = spectral_sweep(ks_nodes, e);
    std::vector<double> p(q.k.size());
    for (std::size_t a = 0; a < q.k.size(); ++a) {
        const SpectralPoint& sp = sweep[a];
        cd v = (std::exp(sp.lambdas[0] * t) - std::exp(sp.lambdas[1] * t)) / cd(0, 2);
        p[a] = v.real() / q.k[a] * smooth_cutoff(q.k[a], k_cut);
    }
    ks.amp = radial_reduce_grid(q, p, ks.r, TensorFactor::scalar);
    return ks;
}

std::vector<double> log_time_grid(double t0, double t1, int n)
{
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t0 * std::pow(t1 / t0, n == 1 ? 0.0 : double(i) / (n - 1));
    return t;
}

namespace {

double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

EnvelopeReport evaluate_envelopes(const std::string& entry, const std::vector<KernelSlice>& kernels,
                                  const std::vector<Envelope>& envs, double c, double trend_limit)
{
    EnvelopeReport rep;
    rep.entry = entry;
    for (const auto& en : envs) rep.envelopes.push_back(en.label());
    for (const auto& ks : kernels) {
        const double t = ks.t, w = std::sqrt(1.0 + t);
        double all = 0, d1 = 0, cone = 0, other = 0;
        for (std::size_t m = 0; m < ks.r.size(); ++m) {
            const double r = ks.r[m];
            double env = 0;
            for (const auto& en : envs) env += en.value(r, t);
            const double ratio = amp_magnitude(ks.amp[m], ks.factor) / env;
            all = std::max(all, ratio);
            bool tagged = false;
            if (r <= w) {
                d1 = std::max(d1, ratio);
                tagged = true;
            }
            if (std::fabs(r - c * t) <= w) {
                cone = std::max(cone, ratio);
                tagged = true;
            }
            if (!tagged) other = std::max(other, ratio);
        }
        rep.t.push_back(t);
        rep.c_total.push_back(all);
        rep.c_d1.push_back(d1);
        rep.c_cone.push_back(cone);
        rep.c_else.push_back(other);
    }
    auto mx = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
    rep.c_est = mx(rep.c_total);
    rep.c_est_d1 = mx(rep.c_d1);
    rep.c_est_cone = mx(rep.c_cone);
    rep.c_est_else = mx(rep.c_else);
    if (!rep.t.empty()) {
        const double split = std::sqrt(rep.t.front() * rep.t.back());
        double first = 0, last = 0;
        for (std::size_t i = 0; i < rep.t.size(); ++i) {
            if (rep.t[i] <= split * (1 + 1e-12)) first = std::max(first, rep.c_total[i]);
            if (rep.t[i] >= split * (1 - 1e-12)) last = std::max(last, rep.c_total[i]);
        }
        rep.trend_ratio = first > 0 ? last / first : std::numeric_limits<double>::infinity();
        std::vector<double> lx, ly, ly1;
        for (std::size_t i = 0; i < rep.t.size(); ++i) {
            lx.push_back(std::log(1 + rep.t[i]));
            ly.push_back(std::log(rep.c_total[i]));
            ly1.push_back(std::log(rep.c_d1[i]));
        }
        rep.growth_exponent = ls_slope(lx, ly);
        rep.growth_exponent_d1 = ls_slope(lx, ly1);
    }
    rep.pass = std::isfinite(rep.c_est) && rep.trend_ratio <= trend_limit;
    return rep;
}

std::vector<KernelSlice> combo_kernels(const EquilibriumState& e, const EntryCombo& combo, const std::vector<double>& t,
                                       const KernelOptions& opt)
{
    std::vector<KernelSlice> out;
    out.reserve(t.size());
    for (double tt : t) out.push_back(entry_kernel(e, combo, tt, opt));
    return out;
}

EnvelopeReport verify_entry_envelope(const EquilibriumState& e, int i, int j, const std::vector<Envelope>& envs,
                                     const std::vector<double>& t, const KernelOptions& opt)
{
    for (double tt : t)
        if (tt < 1 || tt > 100) throw Error(ErrorCode::invalid_argument, "envelope grid needs t in [1, 100]");
    auto combo = single_entry(i, j);
    return evaluate_envelopes(combo.name, combo_kernels(e, combo, t, opt), envs, e.c);
}

EntryCombo cancellation_combo(const EquilibriumState& e, bool swapped)
{
    EntryCombo c;
    const double wp = swapped ? e.rho_bar_plus : e.rho_bar_minus;
    const double wm = swapped ? e.rho_bar_minus : e.rho_bar_plus;
    c.name = swapped ? "rho+G12+rho-G32" : "rho-G12+rho+G32";
    c.terms.emplace_back(1, 2, wp);
    c.terms.emplace_back(3, 2, wm);
    return c;
}

EnvelopeReport verify_cancellation(const EquilibriumState& e, const std::vector<double>& t, bool swapped,
                                   const KernelOptions& opt)
{
    auto combo = cancellation_combo(e, swapped);
    return evaluate_envelopes(combo.name, combo_kernels(e, combo, t, opt), {env_D(1.5, 1.5), env_H(2, 1, 2, e.c)}, e.c);
}

double symbol_cancellation_residual(const EquilibriumState& e, double k, bool swapped)
{
    const double w1 = swapped ? e.rho_bar_plus : e.rho_bar_minus;
    const double w3 = swapped ? e.rho_bar_minus : e.rho_bar_plus;
    const SpectralPoint sp = eigen_branches(k, e);
    double worst = 0;
    for (int b : {2, 3}) {
        for (int col : {1, 3}) {
            const cd comb = w1 * sp.P[b](0, col) + w3 * sp.P[b](2, col);
            const double ref = std::max(std::abs(w1 * sp.P[b](0, col)), std::abs(w3 * sp.P[b](2, col)));
            worst = std::max(worst, std::abs(comb) / ref);
        }
    }
    return worst;
}

double high_band_mass(const EquilibriumState& e, int i, int j, double t, double K)
{
    // Integrate k^2 |S_ij|^2 outward from K until the integrand is negligible.
    double total = 0;
    double a = K;
    const double h = std::max(0.05, K / 50);
    double peak = 0;
    for (int panel = 0; panel < 200000; ++panel) {
        QuadNodes q = phase_panels(h, 1.0, 0);
        double part = 0, local_max = 0;
        for (std::size_t n = 0; n < q.k.size(); ++n) {
            const double k = a + q.k[n];
            const Mat4 S = semigroup(k, t, e);
            double v = S(i - 1, j - 1).real();
            if (i == j && i % 2 == 0) v = std::hypot(v, std::exp(-heat_rate(e, i) * k * k * t));
            const double g = k * k * v * v;
            part += q.w[n] * g;
            local_max = std::max(local_max, g);
        }
        total += part;
        peak = std::max(peak, local_max);
        a += h;
        if (local_max <= 1e-30 * peak || local_max == 0) break;
    }
    return total;
}

std::vector<double> fft_oracle(const std::function<double(double)>& profile, TensorFactor f, int n, double Lbox,
                               const std::vector<double>& r)
{
    const std::size_t N = static_cast<std::size_t>(n) * n * n;
    fftw_complex* buf = fftw_alloc_complex(N);
    if (!buf) throw Error(ErrorCode::numerical, "fftw allocation failed");
    fftw_plan plan = fftw_plan_dft_3d(n, n, n, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    const double dk = 2 * kPi / Lbox;
    auto freq = [&](int a) { return dk * (a <= n / 2 ? a : a - n); };
    // |k|^2 / dk^2 is an integer, so the radial profile is tabulated once per shell
    std::vector<double> shell(3 * (n / 2) * (n / 2) + 1);
    parallel_for(shell.size(), [&](std::size_t s) { shell[s] = profile(dk * std::sqrt(double(s))); });
    auto shell_index = [&](int a) { const int q = a <= n / 2 ? a : a - n; return q * q; };
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const double kx = freq(a), ky = freq(b), kz = freq(c);
                const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
                const std::size_t idx = (static_cast<std::size_t>(a) * n + b) * n + c;
                double re = 0, im = 0;
                const double p = shell[shell_index(a) + shell_index(b) + shell_index(c)];
                if (k == 0) {
                    if (f == TensorFactor::scalar) re = p;
                    else if (f == TensorFactor::riesz_matrix) re = p / 3;
                    else if (f == TensorFactor::complement) re = 2 * p / 3;
                } else {
                    switch (f) {
                        case TensorFactor::scalar: re = p; break;
                        case TensorFactor::riesz_vector:
                        case TensorFactor::riesz_vector_t: im = p * kx / k; break;
                        case TensorFactor::riesz_matrix: re = p * kx * kx / (k * k); break;
                        case TensorFactor::complement: re = p * (1 - kx * kx / (k * k)); break;
                    }
                }
                buf[idx][0] = re;
                buf[idx][1] = im;
            }
    fftw_execute(plan);
    const double h = Lbox / n;
    std::vector<double> out;
    for (double rr : r) {
        int m = static_cast<int>(std::lround(rr / h));
        m = ((m % n) + n) % n;
        const std::size_t idx = static_cast<std::size_t>(m) * n * n;
        out.push_back(buf[idx][0] / (Lbox * Lbox * Lbox));
    }
    fftw_destroy_plan(plan);
    fftw_free(buf);
    return out;
}

}  // namespace tf
