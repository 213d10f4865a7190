#include "twofluid/twofluid.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "certify.hpp"
#include "greens.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "sim.hpp"
#include "spectral.hpp"
#include "waveconv.hpp"

struct tf_params {
    tf::ModelParams p;
};

struct tf_sim {
    tf::SimState init;
    std::unique_ptr<tf::Solver> solver;
    double horizon = 0;
};

namespace {

using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

tf_status to_status(tf::ErrorCode c)
{
    switch (c) {
        case tf::ErrorCode::ok: return TF_OK;
        case tf::ErrorCode::invalid_argument: return TF_INVALID_ARGUMENT;
        case tf::ErrorCode::constraint: return TF_CONSTRAINT;
        case tf::ErrorCode::convergence: return TF_CONVERGENCE;
        case tf::ErrorCode::admissibility: return TF_ADMISSIBILITY;
        case tf::ErrorCode::quadrature: return TF_QUADRATURE;
        case tf::ErrorCode::branch: return TF_BRANCH;
        case tf::ErrorCode::io: return TF_IO;
        case tf::ErrorCode::numerical: return TF_NUMERICAL;
    }
    return TF_INTERNAL;
}

template <class F>
tf_status guarded(F&& f)
{
    g_last_error.clear();
    try {
        f();
        return TF_OK;
    } catch (const tf::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return TF_INVALID_ARGUMENT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TF_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return TF_INTERNAL;
    }
}

void need(bool ok, const char* what)
{
    if (!ok) throw tf::Error(tf::ErrorCode::invalid_argument, what);
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

double* param_slot(tf::ModelParams& p, const std::string& key)
{
    static const std::map<std::string, double tf::ModelParams::*> slots = {
        {"mu_plus", &tf::ModelParams::mu_plus},         {"mu_minus", &tf::ModelParams::mu_minus},
        {"lambda_plus", &tf::ModelParams::lambda_plus}, {"lambda_minus", &tf::ModelParams::lambda_minus},
        {"sigma_plus", &tf::ModelParams::sigma_plus},   {"sigma_minus", &tf::ModelParams::sigma_minus},
        {"a_plus", &tf::ModelParams::a_plus},           {"a_minus", &tf::ModelParams::a_minus},
        {"gamma_plus", &tf::ModelParams::gamma_plus},   {"gamma_minus", &tf::ModelParams::gamma_minus},
    };
    auto it = slots.find(key);
    if (it == slots.end()) throw tf::Error(tf::ErrorCode::invalid_argument, "unknown parameter key: " + key);
    return &(p.*(it->second));
}

ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string csv_num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<tf::Envelope> parse_envelopes(const std::string& spec, double c)
{
    std::vector<tf::Envelope> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string tok;
        while (std::getline(is, tok, ':')) parts.push_back(tok);
        if (parts.empty()) continue;
        auto val = [&](std::size_t k) {
            try {
                return std::stod(parts.at(k));
            } catch (...) {
                throw tf::Error(tf::ErrorCode::invalid_argument, "bad envelope term: " + item);
            }
        };
        if (parts[0] == "R4" && parts.size() == 1) out.push_back(tf::env_R4());
        else if (parts[0] == "D" && parts.size() == 3) out.push_back(tf::env_D(val(1), val(2)));
        else if (parts[0] == "H" && parts.size() == 4) out.push_back(tf::env_H(val(1), val(2), val(3), c));
        else throw tf::Error(tf::ErrorCode::invalid_argument, "bad envelope term: " + item);
    }
    need(!out.empty(), "empty envelope list");
    return out;
}

std::vector<double> to_vec(const double* t, size_t nt)
{
    need(t != nullptr && nt > 0, "time list is empty");
    return std::vector<double>(t, t + nt);
}

}  // namespace

extern "C" {

const char* tf_version(void) { return "1.0.0"; }
const char* tf_last_error(void) { return g_last_error.c_str(); }

const char* tf_status_name(tf_status s)
{
    switch (s) {
        case TF_OK: return "ok";
        case TF_INVALID_ARGUMENT: return "invalid_argument";
        case TF_CONSTRAINT: return "constraint";
        case TF_CONVERGENCE: return "convergence";
        case TF_ADMISSIBILITY: return "admissibility";
        case TF_QUADRATURE: return "quadrature";
        case TF_BRANCH: return "branch";
        case TF_IO: return "io";
        case TF_NUMERICAL: return "numerical";
        case TF_INTERNAL: return "internal";
    }
    return "unknown";
}

void tf_string_free(char* s) { std::free(s); }

tf_status tf_set_threads(int n)
{
    return guarded([&] {
        need(n >= 0, "thread count must be non-negative");
        tf::set_thread_count(n);
    });
}

tf_status tf_params_create(tf_params** out)
{
    return guarded([&] {
        need(out, "null output pointer");
        *out = new tf_params{};
    });
}

tf_status tf_params_load(const char* path, tf_params** out)
{
    return guarded([&] {
        need(path && out, "null argument");
        tf::ModelParams p = tf::load_params(path);
        *out = new tf_params{p};
    });
}

tf_status tf_params_set(tf_params* p, const char* key, double value)
{
    return guarded([&] {
        need(p && key, "null argument");
        *param_slot(p->p, key) = value;
    });
}

tf_status tf_params_get(const tf_params* p, const char* key, double* value)
{
    return guarded([&] {
        need(p && key && value, "null argument");
        tf::ModelParams copy = p->p;
        *value = *param_slot(copy, key);
    });
}

tf_status tf_params_validate(const tf_params* p)
{
    return guarded([&] {
        need(p, "null params");
        tf::validate_params(p->p);
    });
}

void tf_params_destroy(tf_params* p) { delete p; }

tf_status tf_equilibrium_json(const tf_params* p, char** json)
{
    return guarded([&] {
        need(p && json, "null argument");
        const tf::EquilibriumState e = tf::solve_equilibrium(p->p);
        ojson j;
        j["schema"] = 1;
        const ojson body = ojson::parse(tf::equilibrium_json(e));
        for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
        *json = dup_string(j.dump(2) + "\n");
    });
}

tf_status tf_spectrum_csv(const tf_params* p, double k_min, double k_max, int count, int log_spacing, char** csv)
{
    return guarded([&] {
        need(p && csv, "null argument");
        need(count >= 2 && k_max > k_min && k_min >= 0, "need 0 <= k_min < k_max and count >= 2");
        need(!log_spacing || k_min > 0, "log spacing needs k_min > 0");
        const tf::EquilibriumState e = tf::solve_equilibrium(p->p);
        const tf::BandPartition part;
        std::vector<double> ks = log_spacing ? tf::log_k_grid(k_min, k_max, count) : std::vector<double>(count);
        if (!log_spacing)
            for (int i = 0; i < count; ++i) ks[i] = k_min + (k_max - k_min) * i / (count - 1);
        const auto sweep = tf::spectral_sweep(ks, e, part);
        std::ostringstream out;
        out << "k,re_lambda1,re_lambda2,re_lambda3,re_lambda4,im_lambda1,im_lambda2,im_lambda3,im_lambda4,band,"
               "degenerate,expansion_err1,expansion_err2,expansion_err3,expansion_err4\n";
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const tf::SpectralPoint& sp = sweep[i];
            std::array<double, 4> err;
            err.fill(std::numeric_limits<double>::quiet_NaN());
            if (sp.band == tf::Band::low && ks[i] > 0) {
                const tf::Expansion x = tf::low_freq_expansion(ks[i], e);
                for (int b = 0; b < 4; ++b) err[b] = std::abs(sp.lambdas[b] - x.lambdas[b]) / std::abs(sp.lambdas[b]);
            } else if (sp.band == tf::Band::high) {
                err = tf::matched_relative_errors(sp.lambdas, tf::high_freq_expansion(ks[i], e));
            }
            out << csv_num(ks[i]);
            for (int b = 0; b < 4; ++b) out << ',' << csv_num(sp.lambdas[b].real());
            for (int b = 0; b < 4; ++b) out << ',' << csv_num(sp.lambdas[b].imag());
            out << ',' << tf::band_name(sp.band) << ',' << (sp.degenerate ? 1 : 0);
            for (int b = 0; b < 4; ++b) out << ',' << csv_num(err[b]);
            out << '\n';
        }
        *csv = dup_string(out.str());
    });
}

tf_status tf_greens_report(const tf_params* p, int i, int j, const double* t, size_t nt, double r_max_factor,
                           const char* envelopes, char** kernel_csv, char** report, int* pass)
{
    return guarded([&] {
        need(p && report && pass, "null argument");
        need(i >= 1 && i <= 4 && j >= 1 && j <= 4, "entry indices must be in 1..4");
        need(r_max_factor > 0, "r_max_factor must be positive");
        const std::vector<double> ts = to_vec(t, nt);
        for (double v : ts) need(v >= 1 && v <= 100, "envelope times must lie in [1, 100]");
        const tf::EquilibriumState e = tf::solve_equilibrium(p->p);
        std::vector<tf::Envelope> envs;
        if (envelopes && *envelopes) {
            envs = parse_envelopes(envelopes, e.c);
        } else {
            bool singular = false;
            for (const auto& s : tf::entry_symbol(i, j, e)) singular = singular || s.singular;
            envs = singular ? std::vector<tf::Envelope>{tf::env_R4(), tf::env_H(2, 1, 2, e.c)}
                            : std::vector<tf::Envelope>{tf::env_D(1.5, 1.5), tf::env_H(2, 1, 2, e.c)};
        }
        tf::KernelOptions opt;
        opt.r_max_factor = r_max_factor;
        const std::string name = "G" + std::to_string(i) + std::to_string(j);
        const auto kernels = tf::combo_kernels(e, tf::single_entry(i, j), ts, opt);
        const tf::EnvelopeReport r = tf::evaluate_envelopes(name, kernels, envs, e.c);
        if (kernel_csv) {
            std::ostringstream out;
            out << "r,t,value\n";
            for (const auto& k : kernels)
                for (std::size_t m = 0; m < k.r.size(); ++m)
                    out << csv_num(k.r[m]) << ',' << csv_num(k.t) << ','
                        << csv_num(tf::amp_magnitude(k.amp[m], k.factor)) << '\n';
            *kernel_csv = dup_string(out.str());
        }
        ojson jr;
        jr["schema"] = 1;
        jr["entry"] = name;
        jr["envelopes"] = r.envelopes;
        jr["t"] = r.t;
        jr["region"] = {{"near", num(r.c_est_d1)}, {"cone", num(r.c_est_cone)}, {"else", num(r.c_est_else)}};
        jr["C_est_by_t"] = r.c_total;
        jr["C_est"] = num(r.c_est);
        jr["trend_ratio"] = num(r.trend_ratio);
        jr["growth_exponent"] = num(r.growth_exponent);
        jr["growth_exponent_near"] = num(r.growth_exponent_d1);
        jr["pass"] = r.pass;
        *report = dup_string(jr.dump(2) + "\n");
        *pass = r.pass ? 1 : 0;
    });
}

tf_status tf_convolve_report(const tf_params* p, const char* case_name, const double* t, size_t nt, char** report,
                             int* pass)
{
    return guarded([&] {
        need(p && case_name && report && pass, "null argument");
        const tf::EquilibriumState e = tf::solve_equilibrium(p->p);
        const std::vector<double> ts = to_vec(t, nt);
        ojson j;
        j["schema"] = 1;
        j["case"] = case_name;
        if (std::string(case_name) == "log_obstruction") {
            const tf::LogObstruction lo = tf::log_obstruction(ts, e.c);
            j["t"] = lo.t;
            j["n12"] = lo.n12;
            j["n1"] = lo.n1;
            j["slope"] = num(lo.slope);
            j["intercept"] = num(lo.intercept);
            j["correlation"] = num(lo.correlation);
            j["ratio_16_256"] = num(lo.ratio_16_256);
            j["n12_slope_decay"] = num(lo.n12_slope_decay);
            j["n1_slope_decay"] = num(lo.n1_slope_decay);
            const bool ok = lo.correlation > 0.99 && lo.n1_slope_decay <= 0.5;
            j["pass"] = ok;
            *pass = ok ? 1 : 0;
        } else {
            const tf::ConvCase cc = tf::conv_case(case_name, e.c);
            const tf::ConvReport r = tf::verify_case(cc, ts, e.c);
            ojson bound = ojson::array();
            for (const auto& b : cc.bound) bound.push_back(b.label());
            j["green"] = cc.green.label();
            j["source"] = cc.source.label();
            j["bound"] = bound;
            ojson samples = ojson::array();
            for (const auto& s : r.samples)
                samples.push_back({{"r", s.r}, {"t", s.t}, {"region", "D" + std::to_string(s.region)},
                                   {"lhs", num(s.lhs)}, {"bound", num(s.bound)}, {"ratio", num(s.ratio)}});
            j["samples"] = samples;
            ojson regions;
            for (const auto& [reg, v] : r.c_est_by_region) regions["D" + std::to_string(reg)] = num(v);
            j["c_est_by_region"] = regions;
            j["C_est"] = num(r.c_est);
            j["trend_ratio"] = num(r.trend_ratio);
            j["end_ratio"] = num(r.end_ratio);
            j["growth_exponent"] = num(r.growth_exponent);
            j["growth_exponent_near"] = num(r.growth_exponent_d1);
            j["pass"] = r.pass;
            *pass = r.pass ? 1 : 0;
        }
        *report = dup_string(j.dump(2) + "\n");
    });
}

tf_status tf_sim_create(const tf_params* p, int n, double L, double eps, double width, int nonlinear, tf_sim** out)
{
    return guarded([&] {
        need(p && out, "null argument");
        need(std::isfinite(eps) && eps >= 0, "eps must be a non-negative number");
        auto s = std::make_unique<tf_sim>();
        s->init = tf::blob_state(p->p, n, L, eps, width);
        s->solver = std::make_unique<tf::Solver>(s->init, nonlinear != 0);
        s->horizon = (L - tf::blob_support_radius(width)) / s->init.eq.c;
        *out = s.release();
    });
}

void tf_sim_destroy(tf_sim* s) { delete s; }

tf_status tf_sim_step(tf_sim* s, double dt)
{
    return guarded([&] {
        need(s, "null simulation");
        s->solver->step(dt);
    });
}

tf_status tf_sim_time(const tf_sim* s, double* t)
{
    return guarded([&] {
        need(s && t, "null argument");
        *t = s->solver->time();
    });
}

tf_status tf_sim_dt_max(const tf_sim* s, double* dt)
{
    return guarded([&] {
        need(s && dt, "null argument");
        *dt = s->solver->dt_max();
    });
}

tf_status tf_sim_horizon(const tf_sim* s, double* horizon)
{
    return guarded([&] {
        need(s && horizon, "null argument");
        *horizon = s->horizon;
    });
}

tf_status tf_sim_csv_header(char** line)
{
    return guarded([&] {
        need(line, "null argument");
        *line = dup_string(tf::diagnostics_csv_header() + "\n");
    });
}

tf_status tf_sim_csv_row(const tf_sim* s, char** line)
{
    return guarded([&] {
        need(s && line, "null argument");
        *line = dup_string(tf::diagnostics_csv_row(s->solver->diagnostics()) + "\n");
    });
}

tf_status tf_sim_write_dump(const tf_sim* s, const char* path)
{
    return guarded([&] {
        need(s && path, "null argument");
        tf::write_state_dump(s->solver->state(), path);
    });
}

tf_status tf_certify(const tf_params* p, int criterion, double tol_scale, char** report, int* fail_count)
{
    return guarded([&] {
        need(p && report && fail_count, "null argument");
        need(criterion >= 0 && criterion <= tf::kCriterionCount, "criterion must be 0..12");
        need(tol_scale > 0 && std::isfinite(tol_scale), "tol_scale must be positive");
        tf::CertifyOptions opt;
        opt.params = tf::validate_params(p->p);
        opt.tol_scale = tol_scale;
        std::vector<tf::CriterionResult> res;
        if (criterion == 0) res = tf::certify_all(opt);
        else res.push_back(tf::certify_criterion(criterion, opt));
        int fails = 0;
        for (const auto& r : res)
            for (const auto& c : r.checks) fails += !c.pass;
        *report = dup_string(tf::certify_json(res) + "\n");
        *fail_count = fails;
    });
}

}  // extern "C"
