#include "radial.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss.hpp>

#include "common.hpp"
#include "parallel.hpp"

namespace tf {

const char* factor_name(TensorFactor f)
{
    switch (f) {
        case TensorFactor::scalar: return "scalar";
        case TensorFactor::riesz_vector: return "riesz_vector";
        case TensorFactor::riesz_vector_t: return "riesz_vector_t";
        case TensorFactor::riesz_matrix: return "riesz_matrix";
        case TensorFactor::complement: return "complement";
    }
    return "?";
}

double smooth_cutoff(double k, double eta)
{
    if (eta <= 0) return 1.0;
    const double h = 0.5 * eta;
    if (k <= h) return 1.0;
    if (k >= eta) return 0.0;
    const double s = (k - h) / h;
    auto psi = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
    const double a = psi(1.0 - s), b = psi(s);
    return a / (a + b);
}

QuadNodes phase_panels(double kmax, double phase_rate, int refine)
{
    using GL = boost::math::quadrature::gauss<double, 10>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    double width = (kPi / 4) / std::max(phase_rate, 1e-300);
    width = std::min(width, kmax / 32);
    width /= std::pow(2.0, refine);
    const int panels = std::max(1, static_cast<int>(std::ceil(kmax / width)));
    const double h = kmax / panels;
    QuadNodes q;
    q.k.reserve(static_cast<std::size_t>(panels) * 10);
    q.w.reserve(q.k.capacity());
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h, half = 0.5 * h;
        // abscissae are stored for x >= 0; emit the panel in increasing k
        for (std::size_t i = xs.size(); i-- > 0;) {
            if (xs[i] == 0) continue;
            q.k.push_back(mid - xs[i] * half);
            q.w.push_back(ws[i] * half);
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            q.k.push_back(mid + xs[i] * half);
            q.w.push_back(ws[i] * half);
        }
    }
    return q;
}

double amp_magnitude(const RadialAmp& v, TensorFactor f)
{
    if (f == TensorFactor::riesz_matrix || f == TensorFactor::complement) return std::max(std::fabs(v.a), std::fabs(v.b));
    return std::fabs(v.a);
}

namespace {

struct Bessel {
    double j0, j1, j1x;  // j1x = j1(x)/x
};

inline Bessel bessel(double x)
{
    if (x < 1e-2) {
        const double x2 = x * x;
        return {1 - x2 / 6 + x2 * x2 / 120, x / 3 - x * x2 / 30, 1.0 / 3 - x2 / 30 + x2 * x2 / 840};
    }
    const double s = std::sin(x), c = std::cos(x);
    const double j0 = s / x;
    const double j1 = (s - x * c) / (x * x);
    return {j0, j1, j1 / x};
}

}  // namespace

RadialAmp radial_reduce(const QuadNodes& q, const std::vector<double>& profile, double r, TensorFactor f)
{
    double a = 0, b = 0;
    const std::size_t n = q.k.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double k = q.k[i];
        const double wk = q.w[i] * k * k * profile[i];
        if (wk == 0) continue;
        const Bessel B = bessel(k * r);
        switch (f) {
            case TensorFactor::scalar: a += wk * B.j0; break;
            case TensorFactor::riesz_vector:
            case TensorFactor::riesz_vector_t: a -= wk * B.j1; break;
            case TensorFactor::riesz_matrix:
                a += wk * (B.j0 - 2 * B.j1x);
                b += wk * B.j1x;
                break;
            case TensorFactor::complement:
                a += wk * 2 * B.j1x;
                b += wk * (B.j0 - B.j1x);
                break;
        }
    }
    const double norm = 1.0 / (2 * kPi * kPi);
    return {a * norm, b * norm};
}

std::vector<RadialAmp> radial_reduce_grid(const QuadNodes& q, const std::vector<double>& profile,
                                          const std::vector<double>& r, TensorFactor f)
{
    std::vector<RadialAmp> out(r.size());
    parallel_for(r.size(), [&](std::size_t i) { out[i] = radial_reduce(q, profile, r[i], f); });
    return out;
}

RadialResult radial_transform(const std::function<double(double)>& profile, double r, TensorFactor f,
                              double kmax, double phase_rate, double tol_abs)
{
    RadialResult res;
    RadialAmp prev{};
    for (int level = 0; level < 8; ++level) {
        QuadNodes q = phase_panels(kmax, phase_rate, level);
        std::vector<double> p(q.k.size());
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = profile(q.k[i]);
        RadialAmp cur = radial_reduce(q, p, r, f);
        if (level > 0) {
            res.err = std::max(std::fabs(cur.a - prev.a), std::fabs(cur.b - prev.b));
            res.amp = cur;
            res.levels = level;
            if (res.err <= tol_abs) return res;
        }
        prev = cur;
    }
    throw Error(ErrorCode::quadrature, "radial transform did not converge");
}

}  // namespace tf
