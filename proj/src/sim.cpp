#include "sim.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>

#include "parallel.hpp"

namespace tf {

// ===========================================================================
// Radial linear path

std::vector<double> log_k_grid(double k_min, double k_max, int count)
{
    if (!(k_min > 0) || !(k_max > k_min) || count < 2) throw Error(ErrorCode::invalid_argument, "bad log k grid");
    std::vector<double> k(count);
    const double a = std::log(k_min), b = std::log(k_max);
    for (int i = 0; i < count; ++i) k[i] = std::exp(a + (b - a) * i / (count - 1));
    return k;
}

std::vector<double> uniform_k_grid(double k_max, int count)
{
    if (!(k_max > 0) || count < 1) throw Error(ErrorCode::invalid_argument, "bad uniform k grid");
    std::vector<double> k(count);
    for (int i = 0; i < count; ++i) k[i] = k_max * (i + 1) / count;
    return k;
}

LinearRadialState gaussian_momentum_data(const EquilibriumState& eq, const std::vector<double>& k, double s0)
{
    LinearRadialState s;
    s.eq = eq;
    s.k = k;
    s.U.assign(k.size(), {0.0, 0.0, 0.0, 0.0});
    s.inc_plus.assign(k.size(), 0.0);
    s.inc_minus.assign(k.size(), 0.0);
    // m = g e_1: the longitudinal part i xi.m carries cos^2 (mean 1/3), the
    // transverse part the remaining 2/3.
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double g = std::exp(-0.5 * k[i] * k[i] * s0 * s0);
        s.U[i][1] = cd(0.0, g / std::sqrt(3.0));
        s.inc_plus[i] = g * std::sqrt(2.0 / 3.0);
    }
    return s;
}

LinearRadialState linear_evolve(const LinearRadialState& init, double t)
{
    if (!(t >= 0)) throw Error(ErrorCode::invalid_argument, "linear_evolve needs t >= 0");
    LinearRadialState out = init;
    out.t = init.t + t;
    if (t == 0) return out;
    const std::size_t m = init.k.size();
    parallel_for(m, [&](std::size_t i) {
        const double k = init.k[i];
        const Mat4 S = semigroup(k, t, init.eq);
        Eigen::Matrix<cd, 4, 1> u(init.U[i][0], init.U[i][1], init.U[i][2], init.U[i][3]);
        Eigen::Matrix<cd, 4, 1> v = S * u;
        for (int j = 0; j < 4; ++j) out.U[i][j] = v(j);
        out.inc_plus[i] = init.inc_plus[i] * std::exp(-init.eq.nu1_plus * k * k * t);
        out.inc_minus[i] = init.inc_minus[i] * std::exp(-init.eq.nu1_minus * k * k * t);
    });
    return out;
}

double radial_l2(const std::vector<double>& k, const std::vector<double>& abs2)
{
    if (k.size() != abs2.size()) throw Error(ErrorCode::invalid_argument, "radial_l2 size mismatch");
    double sum = 0, k_prev = 0, f_prev = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double f = k[i] * k[i] * abs2[i];
        sum += 0.5 * (k[i] - k_prev) * (f + f_prev);
        k_prev = k[i];
        f_prev = f;
    }
    return std::sqrt(4.0 * kPi * sum);
}

RadialNorms l2_norms(const LinearRadialState& s)
{
    const std::size_t m = s.k.size();
    std::vector<double> np(m), nm(m), mp(m), mm(m), co(m);
    for (std::size_t i = 0; i < m; ++i) {
        np[i] = std::norm(s.U[i][0]);
        nm[i] = std::norm(s.U[i][2]);
        mp[i] = std::norm(s.U[i][1]) + std::norm(s.inc_plus[i]);
        mm[i] = std::norm(s.U[i][3]) + std::norm(s.inc_minus[i]);
        co[i] = std::norm(s.eq.rho_bar_minus * s.U[i][0] + s.eq.rho_bar_plus * s.U[i][2]);
    }
    return {radial_l2(s.k, np), radial_l2(s.k, nm), radial_l2(s.k, mp), radial_l2(s.k, mm), radial_l2(s.k, co)};
}

SlopeFit fit_decay_slope(const std::vector<double>& times, const std::vector<double>& norms)
{
    if (times.size() != norms.size()) throw Error(ErrorCode::invalid_argument, "fit_decay_slope size mismatch");
    if (times.size() < 8) throw Error(ErrorCode::numerical, "degenerate fit: fewer than 8 samples");
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    const double span = *lo > 0 ? std::log10(*hi / *lo) : std::log10((1 + *hi) / (1 + *lo));
    if (!(span >= 2.0 - 1e-9)) throw Error(ErrorCode::numerical, "degenerate fit: samples span less than two decades");
    const std::size_t m = times.size();
    double sx = 0, sy = 0;
    std::vector<double> x(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(norms[i] > 0) || !std::isfinite(norms[i]))
            throw Error(ErrorCode::numerical, "degenerate fit: non-positive norm");
        x[i] = std::log1p(times[i]);
        y[i] = std::log(norms[i]);
        sx += x[i];
        sy += y[i];
    }
    sx /= m;
    sy /= m;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
        sxx += (x[i] - sx) * (x[i] - sx);
        sxy += (x[i] - sx) * (y[i] - sy);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = sy - f.slope * sx;
    double rss = 0;
    for (std::size_t i = 0; i < m; ++i) {
        const double r = y[i] - f.intercept - f.slope * x[i];
        rss += r * r;
    }
    f.stderr_slope = std::sqrt(rss / (m - 2) / sxx);
    return f;
}

DecayTable linear_decay_table(const EquilibriumState& eq, const std::vector<double>& t_list, double s0)
{
    // Slowest diffusion coefficient among the branches sets how far in k the
    // solution is still visible at time t.
    double d_min = eq.b1;
    for (double d : {std::fabs(eq.lam3_tilde_re), std::fabs(eq.lam4_tilde_re), eq.nu1_plus, eq.nu1_minus})
        if (d > 0) d_min = std::min(d_min, d);
    const double k_data = 9.0 / s0;  // exp(-k^2 s0^2/2) < 1e-17 beyond
    DecayTable tab;
    tab.t = t_list;
    for (double t : t_list) {
        const double k_max = std::min(k_data, std::sqrt(45.0 / (d_min * std::max(t, 1e-12))));
        // at least 16 points per period of exp(i c k t) and 4000 overall
        const int count = std::max(4000, int(std::ceil(k_max * 16.0 * eq.c * t / (2 * kPi))));
        LinearRadialState s = gaussian_momentum_data(eq, uniform_k_grid(k_max, count), s0);
        tab.norms.push_back(l2_norms(linear_evolve(s, t)));
    }
    auto fit = [&](double RadialNorms::*field) {
        std::vector<double> v;
        for (const auto& n : tab.norms) v.push_back(n.*field);
        return fit_decay_slope(tab.t, v);
    };
    tab.n_plus = fit(&RadialNorms::n_plus);
    tab.n_minus = fit(&RadialNorms::n_minus);
    tab.m_plus = fit(&RadialNorms::m_plus);
    tab.m_minus = fit(&RadialNorms::m_minus);
    tab.combo = fit(&RadialNorms::combo);
    return tab;
}

// ===========================================================================
// Periodic grid

namespace {

using Field3 = std::array<std::vector<double>, 3>;
using Spec = std::vector<cd>;

// Per-cell pieces of the pressure remainder for one phase. V is the
// equilibrium-weighted gradient combination, W its density correction.
struct QCell {
    double S[7][3];
};

inline QCell q_cell(double C2, double C2bar, double rho_a, double rho_bar_a, double n_a, const double V[3],
                    const double W[3])
{
    QCell q;
    const double inv = 1.0 / rho_a, inv_bar = 1.0 / rho_bar_a;
    for (int d = 0; d < 3; ++d) {
        q.S[0][d] = C2 * inv * n_a * W[d];
        q.S[1][d] = C2 * inv * n_a * V[d];
        q.S[2][d] = (C2 - C2bar) * inv * W[d];
        q.S[3][d] = (C2 - C2bar) * inv * V[d];
        q.S[4][d] = C2bar * (inv - inv_bar) * V[d];
        q.S[5][d] = C2bar * (inv - inv_bar) * W[d];
        q.S[6][d] = C2bar * inv_bar * W[d];
    }
    return q;
}

}  // namespace

struct GridEngine {
    ModelParams params;
    EquilibriumState eq;
    double L;
    int n, nc;
    std::size_t N, NC;
    double dx, dk;
    std::vector<double> kfull, khalf;
    std::vector<char> mask;
    std::vector<int> shell;
    int kmax_index;
    fftw_plan plan_f = nullptr, plan_b = nullptr;
    mutable std::vector<double> rbuf;
    mutable Spec cbuf;

    struct Propagator {
        std::map<int, Mat4> S;
        std::map<int, std::pair<double, double>> heat;
    };
    std::map<double, Propagator> cache;

    GridEngine(const ModelParams& p, const EquilibriumState& e, int n_, double L_)
        : params(p), eq(e), L(L_), n(n_)
    {
        if (n < 8 || n % 2) throw Error(ErrorCode::invalid_argument, "grid size must be even and at least 8");
        if (!(L > 0)) throw Error(ErrorCode::invalid_argument, "box half-width must be positive");
        nc = n / 2 + 1;
        N = std::size_t(n) * n * n;
        NC = std::size_t(n) * n * nc;
        dx = 2 * L / n;
        dk = kPi / L;
        kmax_index = (n - 1) / 3;
        kfull.resize(n);
        khalf.resize(nc);
        for (int i = 0; i < n; ++i) kfull[i] = dk * (i <= n / 2 ? i : i - n);
        for (int i = 0; i < nc; ++i) khalf[i] = dk * i;
        mask.assign(NC, 0);
        shell.assign(NC, 0);
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < nc; ++iz) {
                    const int a = ix <= n / 2 ? ix : ix - n, b = iy <= n / 2 ? iy : iy - n;
                    const std::size_t id = (std::size_t(ix) * n + iy) * nc + iz;
                    mask[id] = std::abs(a) <= kmax_index && std::abs(b) <= kmax_index && iz <= kmax_index;
                    shell[id] = a * a + b * b + iz * iz;
                }
        rbuf.resize(N);
        cbuf.resize(NC);
        plan_f = fftw_plan_dft_r2c_3d(n, n, n, rbuf.data(), reinterpret_cast<fftw_complex*>(cbuf.data()),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
        plan_b = fftw_plan_dft_c2r_3d(n, n, n, reinterpret_cast<fftw_complex*>(cbuf.data()), rbuf.data(),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan_f || !plan_b) throw Error(ErrorCode::numerical, "fftw plan creation failed");
    }
    ~GridEngine()
    {
        if (plan_f) fftw_destroy_plan(plan_f);
        if (plan_b) fftw_destroy_plan(plan_b);
    }
    GridEngine(const GridEngine&) = delete;
    GridEngine& operator=(const GridEngine&) = delete;

    void kvec(std::size_t id, double k[3]) const
    {
        const std::size_t iz = id % nc, rest = id / nc;
        k[0] = kfull[rest / n];
        k[1] = kfull[rest % n];
        k[2] = khalf[iz];
    }

    // Masked forward transform.
    Spec fwd(const std::vector<double>& f) const
    {
        Spec out(NC);
        fftw_execute_dft_r2c(plan_f, const_cast<double*>(f.data()), reinterpret_cast<fftw_complex*>(out.data()));
        for (std::size_t i = 0; i < NC; ++i)
            if (!mask[i]) out[i] = 0.0;
        return out;
    }
    std::vector<double> bwd(const Spec& g) const
    {
        cbuf = g;
        std::vector<double> out(N);
        fftw_execute_dft_c2r(plan_b, reinterpret_cast<fftw_complex*>(cbuf.data()), out.data());
        const double s = 1.0 / double(N);
        for (double& v : out) v *= s;
        return out;
    }
    // d/dx_a of g in spectral space.
    Spec deriv(const Spec& g, int a) const
    {
        Spec out(NC);
        for (std::size_t i = 0; i < NC; ++i) {
            double k[3];
            kvec(i, k);
            out[i] = cd(0.0, k[a]) * g[i];
        }
        return out;
    }

    double coord(int i) const { return dx * (i < n / 2 ? i : i - n); }

    // ------------------------------------------------------------------
    // Physical fields shared by the right-hand side and the Q diagnostics.
    struct Phys {
        std::array<std::vector<double>, 2> nn;  // n+, n-
        std::array<Field3, 2> m, grad_n, grad_lap_n;
        std::vector<double> rho_p, rho_m, C2;
    };

    Phys physical(const std::array<Spec, 8>& S) const
    {
        Phys P;
        for (int a = 0; a < 2; ++a) {
            const Spec& nh = S[4 * a];
            P.nn[a] = bwd(nh);
            Spec lap(NC);
            for (std::size_t i = 0; i < NC; ++i) {
                double k[3];
                kvec(i, k);
                lap[i] = -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) * nh[i];
            }
            for (int d = 0; d < 3; ++d) {
                P.m[a][d] = bwd(S[4 * a + 1 + d]);
                P.grad_n[a][d] = bwd(deriv(nh, d));
                P.grad_lap_n[a][d] = bwd(deriv(lap, d));
            }
        }
        P.rho_p.resize(N);
        P.rho_m.resize(N);
        P.C2.resize(N);
        const double delta = 0.1;
        parallel_for(std::size_t(n), [&](std::size_t slab) {
            const std::size_t lo = slab * std::size_t(n) * n, hi = lo + std::size_t(n) * n;
            for (std::size_t i = lo; i < hi; ++i) {
                const double np = P.nn[0][i], nm = P.nn[1][i];
                if (!(np > -1 + delta) || !(nm > -1 + delta))
                    throw Error(ErrorCode::admissibility, "admissibility violated: n <= -1 + 0.1 on the grid");
                const FractionState fs = solve_fraction_map(1 + np, 1 + nm, params, eq.rho_bar_plus);
                P.rho_p[i] = fs.rho_plus;
                P.rho_m[i] = fs.rho_minus;
                P.C2[i] = fs.C2;
            }
        });
        return P;
    }

    // Calls fn(i, phase, QCell) for every cell.
    template <class Fn>
    void for_each_q(const Phys& P, Fn fn) const
    {
        const double rbp = eq.rho_bar_plus, rbm = eq.rho_bar_minus;
        for (std::size_t i = 0; i < N; ++i) {
            double V[3], W[3];
            for (int d = 0; d < 3; ++d) {
                const double gp = P.grad_n[0][d][i], gm = P.grad_n[1][d][i];
                V[d] = rbm * gp + rbp * gm;
                W[d] = (P.rho_m[i] - rbm) * gp + (P.rho_p[i] - rbp) * gm;
            }
            fn(i, 0, q_cell(P.C2[i], eq.C2, P.rho_p[i], rbp, P.nn[0][i], V, W));
            fn(i, 1, q_cell(P.C2[i], eq.C2, P.rho_m[i], rbm, P.nn[1][i], V, W));
        }
    }

    // ------------------------------------------------------------------
    std::array<Spec, 8> rhs(const std::array<Spec, 8>& S) const
    {
        std::array<Spec, 8> F;
        F[0].assign(NC, 0.0);
        F[4].assign(NC, 0.0);
        const Phys P = physical(S);

        // Vector part: capillary remainder minus Q, assembled per phase.
        std::array<Field3, 2> vec;
        for (int a = 0; a < 2; ++a)
            for (int d = 0; d < 3; ++d) vec[a][d].assign(N, 0.0);
        const double sig[2] = {params.sigma_plus, params.sigma_minus};
        for_each_q(P, [&](std::size_t i, int a, const QCell& q) {
            for (int d = 0; d < 3; ++d) {
                double Q = 0;
                for (int s = 0; s < 7; ++s) Q += q.S[s][d];
                vec[a][d][i] = sig[a] * P.nn[a][i] * P.grad_lap_n[a][d][i] - Q;
            }
        });

        const double mu[2] = {params.mu_plus, params.mu_minus};
        const double la[2] = {params.lambda_plus, params.lambda_minus};
        const double nu1[2] = {eq.nu1_plus, eq.nu1_minus};
        const double nu2[2] = {eq.nu2_plus, eq.nu2_minus};
        for (int a = 0; a < 2; ++a) {
            const std::vector<double>& rho = a == 0 ? P.rho_p : P.rho_m;
            // velocity and its gradient
            Field3 u;
            std::array<Spec, 3> uh;
            for (int d = 0; d < 3; ++d) {
                u[d].resize(N);
                for (std::size_t i = 0; i < N; ++i) u[d][i] = P.m[a][d][i] / (1 + P.nn[a][i]);
                uh[d] = fwd(u[d]);
            }
            std::array<std::array<std::vector<double>, 3>, 3> du;  // du[b][c] = d_b u_c
            for (int b = 0; b < 3; ++b)
                for (int c = 0; c < 3; ++c) du[b][c] = bwd(deriv(uh[c], b));
            // momentum flux tensor: -m m / R + alpha [mu (grad u + grad u^T) + lambda div u I]
            static const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
            std::array<Spec, 6> Th;
            for (int p = 0; p < 6; ++p) {
                const int b = pairs[p][0], c = pairs[p][1];
                std::vector<double> T(N);
                for (std::size_t i = 0; i < N; ++i) {
                    const double R = 1 + P.nn[a][i];
                    const double alpha = R / rho[i];
                    double tau = mu[a] * (du[b][c][i] + du[c][b][i]);
                    if (b == c) tau += la[a] * (du[0][0][i] + du[1][1][i] + du[2][2][i]);
                    T[i] = -P.m[a][b][i] * P.m[a][c][i] / R + alpha * tau;
                }
                Th[p] = fwd(T);
            }
            auto Tidx = [](int b, int c) {
                if (b == c) return b;
                if (b > c) std::swap(b, c);
                return b == 0 ? (c == 1 ? 3 : 4) : 5;
            };
            std::array<Spec, 3> Vh;
            for (int d = 0; d < 3; ++d) Vh[d] = fwd(vec[a][d]);
            for (int d = 0; d < 3; ++d) {
                Spec& out = F[4 * a + 1 + d];
                out.assign(NC, 0.0);
                const Spec& md = S[4 * a + 1 + d];
                for (std::size_t i = 0; i < NC; ++i) {
                    if (!mask[i]) continue;
                    double k[3];
                    kvec(i, k);
                    const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                    cd div_T = 0.0, div_m = 0.0;
                    for (int b = 0; b < 3; ++b) {
                        div_T += cd(0.0, k[b]) * Th[Tidx(d, b)][i];
                        div_m += cd(0.0, k[b]) * S[4 * a + 1 + b][i];
                    }
                    const cd lin = -nu1[a] * k2 * md[i] + nu2[a] * cd(0.0, k[d]) * div_m;
                    out[i] = div_T - lin + Vh[d][i];
                }
            }
        }
        return F;
    }

    // ------------------------------------------------------------------
    const Propagator& propagator(double h)
    {
        auto it = cache.find(h);
        if (it != cache.end()) return it->second;
        Propagator prop;
        for (std::size_t i = 0; i < NC; ++i) {
            if (!mask[i] || shell[i] == 0 || prop.S.count(shell[i])) continue;
            const double k = dk * std::sqrt(double(shell[i]));
            prop.S[shell[i]] = semigroup(k, h, eq);
            prop.heat[shell[i]] = {std::exp(-eq.nu1_plus * k * k * h), std::exp(-eq.nu1_minus * k * k * h)};
        }
        return cache.emplace(h, std::move(prop)).first->second;
    }

    void apply_linear(std::array<Spec, 8>& S, double h)
    {
        if (h == 0) return;
        const Propagator& prop = propagator(h);
        for (std::size_t i = 0; i < NC; ++i) {
            if (!mask[i] || shell[i] == 0) continue;
            double k[3];
            kvec(i, k);
            const double kk = dk * std::sqrt(double(shell[i]));
            const double xi[3] = {k[0] / kk, k[1] / kk, k[2] / kk};
            const Mat4& E = prop.S.at(shell[i]);
            const auto& heat = prop.heat.at(shell[i]);
            Eigen::Matrix<cd, 4, 1> U;
            cd inc[2][3];
            for (int a = 0; a < 2; ++a) {
                cd phi = 0.0;
                for (int d = 0; d < 3; ++d) phi += cd(0.0, xi[d]) * S[4 * a + 1 + d][i];
                for (int d = 0; d < 3; ++d) inc[a][d] = S[4 * a + 1 + d][i] + cd(0.0, xi[d]) * phi;
                U(2 * a) = S[4 * a][i];
                U(2 * a + 1) = phi;
            }
            const Eigen::Matrix<cd, 4, 1> V = E * U;
            const double hf[2] = {heat.first, heat.second};
            for (int a = 0; a < 2; ++a) {
                S[4 * a][i] = V(2 * a);
                for (int d = 0; d < 3; ++d) S[4 * a + 1 + d][i] = cd(0.0, -xi[d]) * V(2 * a + 1) + hf[a] * inc[a][d];
            }
        }
    }

    std::array<Spec, 8> to_spec(const SimState& s) const
    {
        std::array<Spec, 8> S;
        for (int f = 0; f < 8; ++f) {
            if (s.f[f].size() != N) throw Error(ErrorCode::invalid_argument, "field size does not match grid");
            S[f] = fwd(s.f[f]);
        }
        return S;
    }
};

static void axpy(std::array<Spec, 8>& y, double a, const std::array<Spec, 8>& x)
{
    for (int f = 0; f < 8; ++f)
        for (std::size_t i = 0; i < y[f].size(); ++i) y[f][i] += a * x[f][i];
}

struct Solver::Impl {
    GridEngine g;
    SimState meta;
    bool nonlinear;
    std::array<Spec, 8> S;
    double t;

    Impl(const SimState& init, bool nl) : g(init.params, init.eq, init.n, init.L), meta(init), nonlinear(nl), t(init.t)
    {
        S = g.to_spec(init);
        for (auto& f : meta.f) f.clear();
    }

    std::array<Spec, 8> N(const std::array<Spec, 8>& u) const
    {
        if (nonlinear) return g.rhs(u);
        std::array<Spec, 8> z;
        for (auto& f : z) f.assign(g.NC, 0.0);
        return z;
    }

    void step(double h)
    {
        if (!(h > 0)) throw Error(ErrorCode::invalid_argument, "time step must be positive");
        if (!nonlinear) {
            g.apply_linear(S, h);
            t += h;
            return;
        }
        // Lawson integrating-factor RK4.
        const auto k1 = N(S);
        auto a = S;
        axpy(a, h / 2, k1);
        g.apply_linear(a, h / 2);
        const auto k2 = N(a);
        auto eu = S;
        g.apply_linear(eu, h / 2);
        auto b = eu;
        axpy(b, h / 2, k2);
        const auto k3 = N(b);
        auto d = eu;
        axpy(d, h, k3);
        g.apply_linear(d, h / 2);
        const auto k4 = N(d);

        auto acc = k1;
        g.apply_linear(acc, h / 2);
        axpy(acc, 2.0, k2);
        axpy(acc, 2.0, k3);
        g.apply_linear(acc, h / 2);
        auto out = S;
        g.apply_linear(out, h);
        axpy(out, h / 6, acc);
        axpy(out, h / 6, k4);
        for (const auto& f : out)
            for (const cd& v : f)
                if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                    throw Error(ErrorCode::numerical, "non-finite value in time step");
        S = std::move(out);
        t += h;
    }
};

Solver::Solver(const SimState& init, bool nonlinear) : impl_(std::make_unique<Impl>(init, nonlinear)) {}
Solver::~Solver() = default;
void Solver::step(double dt) { impl_->step(dt); }
double Solver::time() const { return impl_->t; }

double Solver::dt_max() const
{
    const GridEngine& g = impl_->g;
    const double k_max = std::sqrt(3.0) * g.kmax_index * g.dk;
    return 0.5 * (2 * kPi / k_max) / g.eq.c;
}

SimState Solver::state() const
{
    SimState s = impl_->meta;
    s.t = impl_->t;
    for (int f = 0; f < 8; ++f) s.f[f] = impl_->g.bwd(impl_->S[f]);
    return s;
}

Diagnostics Solver::diagnostics() const
{
    const GridEngine& g = impl_->g;
    const auto& S = impl_->S;
    Diagnostics d;
    d.t = impl_->t;
    const double dV = g.dx * g.dx * g.dx;
    // The zero mode of an unnormalized r2c transform is the plain sum.
    d.mass_plus = S[NP][0].real() * dV;
    d.mass_minus = S[NM][0].real() * dV;
    for (int c = 0; c < 3; ++c) d.momentum[c] = (S[MPX + c][0].real() + S[MMX + c][0].real()) * dV;

    std::array<std::vector<double>, 8> f;
    for (int k = 0; k < 8; ++k) f[k] = g.bwd(S[k]);
    double snp = 0, snm = 0, smp = 0, smm = 0, sco = 0, scale = 0;
    const double rbp = g.eq.rho_bar_plus, rbm = g.eq.rho_bar_minus;
    const double dr = g.dx / 2;
    const int nbins = int(g.L / dr);
    std::vector<double> bin_sum(nbins, 0.0), bin_cnt(nbins, 0.0);
    for (int ix = 0; ix < g.n; ++ix)
        for (int iy = 0; iy < g.n; ++iy)
            for (int iz = 0; iz < g.n; ++iz) {
                const std::size_t i = (std::size_t(ix) * g.n + iy) * g.n + iz;
                snp += f[NP][i] * f[NP][i];
                snm += f[NM][i] * f[NM][i];
                double ap = 0, am = 0, at = 0;
                for (int c = 0; c < 3; ++c) {
                    ap += f[MPX + c][i] * f[MPX + c][i];
                    am += f[MMX + c][i] * f[MMX + c][i];
                    const double mt = f[MPX + c][i] + f[MMX + c][i];
                    at += mt * mt;
                }
                smp += ap;
                smm += am;
                scale += std::sqrt(ap) + std::sqrt(am);
                const double co = rbm * f[NP][i] + rbp * f[NM][i];
                sco += co * co;
                const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                const double r = std::sqrt(x * x + y * y + z * z);
                const int b = int(r / dr);
                if (b < nbins) {
                    bin_sum[b] += std::sqrt(at);
                    bin_cnt[b] += 1;
                }
            }
    d.l2_np = std::sqrt(snp * dV);
    d.l2_nm = std::sqrt(snm * dV);
    d.l2_mp = std::sqrt(smp * dV);
    d.l2_mm = std::sqrt(smm * dV);
    d.l2_combo = std::sqrt(sco * dV);
    d.momentum_scale = scale * dV;
    int best = -1;
    for (int b = 0; b < nbins; ++b) {
        if (bin_cnt[b] == 0) continue;
        d.shell_r.push_back((b + 0.5) * dr);
        d.shell_avg.push_back(bin_sum[b] / bin_cnt[b]);
        if (best < 0 || d.shell_avg.back() > d.shell_avg[best]) best = int(d.shell_avg.size()) - 1;
    }
    if (best >= 0) {
        d.ring_r = d.shell_r[best];
        // parabolic refinement through the neighbouring shells
        if (best > 0 && best + 1 < int(d.shell_avg.size())) {
            const double y0 = d.shell_avg[best - 1], y1 = d.shell_avg[best], y2 = d.shell_avg[best + 1];
            const double den = y0 - 2 * y1 + y2;
            if (den < 0) {
                const double off = 0.5 * (y0 - y2) / den;
                if (std::fabs(off) <= 1) d.ring_r += off * (d.shell_r[best + 1] - d.shell_r[best]);
            }
        }
    }
    return d;
}

// ---------------------------------------------------------------------------

SimState zero_state(const ModelParams& p, int n, double L)
{
    SimState s;
    s.params = validate_params(p);
    s.eq = solve_equilibrium(s.params);
    s.n = n;
    s.L = L;
    if (n != 32 && n != 48 && n != 64) throw Error(ErrorCode::invalid_argument, "grid size must be 32, 48 or 64");
    if (!(L > 0)) throw Error(ErrorCode::invalid_argument, "box half-width must be positive");
    for (auto& f : s.f) f.assign(std::size_t(n) * n * n, 0.0);
    return s;
}

SimState blob_state(const ModelParams& p, int n, double L, double eps, double w)
{
    if (!(w > 0)) throw Error(ErrorCode::invalid_argument, "blob width must be positive");
    SimState s = zero_state(p, n, L);
    GridEngine g(s.params, s.eq, n, L);
    std::vector<double> psi(g.N);
    for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy)
            for (int iz = 0; iz < n; ++iz) {
                const double x = g.coord(ix), y = g.coord(iy), z = g.coord(iz);
                psi[(std::size_t(ix) * n + iy) * n + iz] = eps * w * std::exp(-(x * x + y * y + z * z) / (2 * w * w));
            }
    const Spec ph = g.fwd(psi);
    for (int d = 0; d < 3; ++d) {
        s.f[MPX + d] = g.bwd(g.deriv(ph, d));
        s.f[MMX + d] = s.f[MPX + d];
    }
    return s;
}

SimState single_mode_state(const ModelParams& p, int n, double L, double eps)
{
    SimState s = zero_state(p, n, L);
    const double dx = 2 * L / n;
    for (int ix = 0; ix < n; ++ix) {
        const double v = eps * std::cos(2 * kPi * (ix * dx) / L);
        for (std::size_t j = 0; j < std::size_t(n) * n; ++j) s.f[NP][std::size_t(ix) * n * n + j] = v;
    }
    return s;
}

double blob_support_radius(double w)
{
    // |grad psi| ~ r exp(-r^2 / 2w^2); solve for 1e-6 of the peak at r = w.
    double r = 3 * w;
    for (int it = 0; it < 60; ++it) {
        const double f = std::log(r / w) - (r * r - w * w) / (2 * w * w) + std::log(1e6);
        const double df = 1 / r - r / (w * w);
        r -= f / df;
    }
    return r;
}

std::array<std::vector<double>, 8> nonlinear_rhs(const SimState& s)
{
    GridEngine g(s.params, s.eq, s.n, s.L);
    const auto F = g.rhs(g.to_spec(s));
    std::array<std::vector<double>, 8> out;
    for (int f = 0; f < 8; ++f) out[f] = g.bwd(F[f]);
    return out;
}

QTerms q_terms(const SimState& s)
{
    GridEngine g(s.params, s.eq, s.n, s.L);
    const auto P = g.physical(g.to_spec(s));
    QTerms q;
    for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 3; ++d) {
            q.Q[a][d].assign(g.N, 0.0);
            for (int k = 0; k < 7; ++k) q.S[a][k][d].assign(g.N, 0.0);
        }
    g.for_each_q(P, [&](std::size_t i, int a, const QCell& c) {
        for (int d = 0; d < 3; ++d) {
            double sum = 0;
            for (int k = 0; k < 7; ++k) {
                q.S[a][k][d][i] = c.S[k][d];
                sum += c.S[k][d];
            }
            q.Q[a][d][i] = sum;
        }
    });
    return q;
}

std::array<std::array<std::vector<double>, 3>, 2> q_direct(const SimState& s)
{
    GridEngine g(s.params, s.eq, s.n, s.L);
    const auto P = g.physical(g.to_spec(s));
    const EquilibriumState& e = s.eq;
    std::array<std::array<std::vector<double>, 3>, 2> Q;
    for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 3; ++d) Q[a][d].resize(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        const double ap = (1 + P.nn[0][i]) / P.rho_p[i], am = (1 + P.nn[1][i]) / P.rho_m[i];
        for (int d = 0; d < 3; ++d) {
            const double gp = P.grad_n[0][d][i], gm = P.grad_n[1][d][i];
            const double gradP = P.C2[i] * (P.rho_m[i] * gp + P.rho_p[i] * gm);
            Q[0][d][i] = ap * gradP - e.beta1 * gp - e.beta2 * gm;
            Q[1][d][i] = am * gradP - e.beta3 * gp - e.beta4 * gm;
        }
    }
    return Q;
}

SimState step(const SimState& s, double dt, bool nonlinear)
{
    Solver sol(s, nonlinear);
    sol.step(dt);
    return sol.state();
}

SimState linear_grid_evolve(const SimState& s, double t)
{
    GridEngine g(s.params, s.eq, s.n, s.L);
    auto S = g.to_spec(s);
    g.apply_linear(S, t);
    SimState out = s;
    out.t = s.t + t;
    for (int f = 0; f < 8; ++f) out.f[f] = g.bwd(S[f]);
    return out;
}

SimRun run_simulation(const ModelParams& p, const SimConfig& cfg, const std::function<void(const Diagnostics&)>& on_step)
{
    SimState init = blob_state(p, cfg.n, cfg.L, cfg.eps, cfg.width);
    SimRun run;
    const double c = init.eq.c;
    run.horizon = (cfg.L - blob_support_radius(cfg.width)) / c;
    const double t_final = cfg.t_final < 0 ? cfg.L / (2 * c) : cfg.t_final;
    if (t_final > run.horizon * (1 + 1e-12))
        throw Error(ErrorCode::invalid_argument, "t_final " + std::to_string(t_final) + " exceeds the wrap horizon " +
                                                     std::to_string(run.horizon));
    if (cfg.dt < 0) throw Error(ErrorCode::invalid_argument, "dt must be non-negative");
    Solver sol(init, cfg.nonlinear);
    run.dt = cfg.dt > 0 ? std::min(cfg.dt, sol.dt_max()) : sol.dt_max();

    std::vector<double> marks;
    for (double t : cfg.checkpoints)
        if (t > 0 && t < t_final) marks.push_back(t);
    std::sort(marks.begin(), marks.end());
    marks.push_back(t_final);

    auto record = [&] {
        Diagnostics d = sol.diagnostics();
        d.shell_r.clear();
        d.shell_avg.clear();
        if (on_step) on_step(d);
        run.rows.push_back(std::move(d));
    };
    record();
    double t0 = 0;
    for (double mark : marks) {
        const int steps = std::max(1, int(std::ceil((mark - t0) / run.dt - 1e-9)));
        const double h = (mark - t0) / steps;
        for (int k = 0; k < steps; ++k) {
            sol.step(k + 1 < steps ? h : mark - sol.time());
            record();
        }
        t0 = mark;
        if (std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), mark) != cfg.checkpoints.end())
            run.at_checkpoints.push_back(sol.diagnostics());
    }
    run.final_state = sol.state();
    return run;
}

std::string diagnostics_csv_header()
{
    return "t,mass_p,mass_m,momentum,l2_np,l2_nm,l2_mp,l2_mm,l2_combo,ring_r";
}

std::string diagnostics_csv_row(const Diagnostics& d)
{
    const double mom = std::sqrt(d.momentum[0] * d.momentum[0] + d.momentum[1] * d.momentum[1] +
                                 d.momentum[2] * d.momentum[2]);
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", d.t, d.mass_plus,
                  d.mass_minus, mom, d.l2_np, d.l2_nm, d.l2_mp, d.l2_mm, d.l2_combo, d.ring_r);
    return buf;
}

static_assert(sizeof(double) == 8);

static void put_le(std::ofstream& out, double v)
{
    unsigned char b[8];
    std::memcpy(b, &v, 8);
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
    out.write(reinterpret_cast<const char*>(b), 8);
}

static double get_le(std::ifstream& in)
{
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw Error(ErrorCode::io, "truncated state dump");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + 8);
    double v;
    std::memcpy(&v, b, 8);
    return v;
}

void write_state_dump(const SimState& s, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path);
    put_le(out, s.n);
    put_le(out, s.L);
    put_le(out, s.t);
    for (const auto& f : s.f)
        for (double v : f) put_le(out, v);
    if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

SimState read_state_dump(const std::string& path, const ModelParams& p)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path);
    const double n = get_le(in), L = get_le(in), t = get_le(in);
    SimState s = zero_state(p, int(n), L);
    s.t = t;
    for (auto& f : s.f)
        for (double& v : f) v = get_le(in);
    return s;
}

}  // namespace tf
