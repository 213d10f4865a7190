// Command-line front end. Talks to the library through the C interface only.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "twofluid/twofluid.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Thrown to unwind with a specific exit code after the message is printed.
struct Exit {
    int code;
};

int exit_code_for(tf_status s)
{
    switch (s) {
        case TF_OK: return kExitPass;
        case TF_INVALID_ARGUMENT:
        case TF_CONSTRAINT:
        case TF_IO: return kExitUsage;
        default: return kExitFail;
    }
}

void check(tf_status s)
{
    if (s == TF_OK) return;
    std::fprintf(stderr, "error (%s): %s\n", tf_status_name(s), tf_last_error());
    throw Exit{exit_code_for(s)};
}

// Owns a string handed out by the library.
struct LibString {
    char* p = nullptr;
    ~LibString() { tf_string_free(p); }
    std::string str() const { return p ? std::string(p) : std::string(); }
};

struct ParamsDeleter {
    void operator()(tf_params* p) const { tf_params_destroy(p); }
};
struct SimDeleter {
    void operator()(tf_sim* s) const { tf_sim_destroy(s); }
};
using ParamsPtr = std::unique_ptr<tf_params, ParamsDeleter>;
using SimPtr = std::unique_ptr<tf_sim, SimDeleter>;

struct Globals {
    std::string params_path;
    std::string out_dir;
    int threads = 0;
    double tol_scale = 1.0;
};

ParamsPtr load_params(const Globals& g)
{
    tf_params* raw = nullptr;
    if (g.params_path.empty()) check(tf_params_create(&raw));
    else check(tf_params_load(g.params_path.c_str(), &raw));
    ParamsPtr p(raw);
    check(tf_params_validate(p.get()));
    return p;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "error (io): cannot write %s\n", path.string().c_str());
        throw Exit{kExitUsage};
    }
    f << text;
    if (!f) {
        std::fprintf(stderr, "error (io): short write to %s\n", path.string().c_str());
        throw Exit{kExitUsage};
    }
}

fs::path ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::fprintf(stderr, "error (io): cannot create %s: %s\n", dir.c_str(), ec.message().c_str());
        throw Exit{kExitUsage};
    }
    return fs::path(dir);
}

// Prints to stdout and, with --out, also stores the text under `name`.
void emit(const Globals& g, const std::string& name, const std::string& text)
{
    std::cout << text;
    if (!g.out_dir.empty()) write_file(ensure_dir(g.out_dir) / name, text);
}

int run_equilibrium(const Globals& g)
{
    auto p = load_params(g);
    LibString json;
    check(tf_equilibrium_json(p.get(), &json.p));
    emit(g, "equilibrium.json", json.str());
    return kExitPass;
}

struct SpectrumArgs {
    double k_min = 1e-3, k_max = 100;
    int count = 200;
    bool linear = false;
};

int run_spectrum(const Globals& g, const SpectrumArgs& a)
{
    auto p = load_params(g);
    LibString csv;
    check(tf_spectrum_csv(p.get(), a.k_min, a.k_max, a.count, a.linear ? 0 : 1, &csv.p));
    emit(g, "spectrum.csv", csv.str());
    return kExitPass;
}

struct GreensArgs {
    std::vector<int> entry{1, 2};
    std::vector<double> t_list{1, 2, 5, 10, 25, 50, 100};
    double r_max_factor = 3.0;
    std::string envelopes;
};

int run_greens(const Globals& g, const GreensArgs& a)
{
    auto p = load_params(g);
    LibString csv, report;
    int pass = 0;
    check(tf_greens_report(p.get(), a.entry[0], a.entry[1], a.t_list.data(), a.t_list.size(), a.r_max_factor,
                           a.envelopes.empty() ? nullptr : a.envelopes.c_str(), &csv.p, &report.p, &pass));
    const std::string tag = "G" + std::to_string(a.entry[0]) + std::to_string(a.entry[1]);
    emit(g, "greens_" + tag + ".json", report.str());
    if (!g.out_dir.empty()) write_file(ensure_dir(g.out_dir) / ("greens_" + tag + ".csv"), csv.str());
    return pass ? kExitPass : kExitFail;
}

struct ConvolveArgs {
    std::string case_name = "K4";
    std::vector<double> t{4, 16, 64};
};

int run_convolve(const Globals& g, const ConvolveArgs& a)
{
    auto p = load_params(g);
    LibString report;
    int pass = 0;
    check(tf_convolve_report(p.get(), a.case_name.c_str(), a.t.data(), a.t.size(), &report.p, &pass));
    emit(g, "convolve_" + a.case_name + ".json", report.str());
    return pass ? kExitPass : kExitFail;
}

struct SimulateArgs {
    std::string mode = "nonlinear";
    int grid = 48;
    double box = 64;
    double eps = 1e-3;
    double width = 5;
    double t_final = -1;  // negative: half the box crossing time, L / (2c)
    double dt = 0;        // 0: the stability limit of the scheme
};

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\n' || cell.back() == '\r')) cell.pop_back();
        out.push_back(cell);
    }
    return out;
}

int run_simulate(const Globals& g, const SimulateArgs& a)
{
    auto p = load_params(g);
    const fs::path dir = ensure_dir(g.out_dir.empty() ? std::string(".") : g.out_dir);

    tf_sim* raw = nullptr;
    check(tf_sim_create(p.get(), a.grid, a.box, a.eps, a.width, a.mode == "nonlinear" ? 1 : 0, &raw));
    SimPtr sim(raw);

    double horizon = 0, dt_max = 0;
    check(tf_sim_horizon(sim.get(), &horizon));
    check(tf_sim_dt_max(sim.get(), &dt_max));

    LibString eq_json;
    check(tf_equilibrium_json(p.get(), &eq_json.p));
    const double c = nlohmann::json::parse(eq_json.str()).at("c").get<double>();
    const double t_final = a.t_final < 0 ? a.box / (2 * c) : a.t_final;
    if (t_final > horizon) {
        std::fprintf(stderr, "error (invalid_argument): t_final %.6g exceeds the wrap horizon %.6g\n", t_final, horizon);
        return kExitUsage;
    }
    double dt = a.dt > 0 ? a.dt : dt_max;
    if (dt > dt_max) {
        std::fprintf(stderr, "error (invalid_argument): dt %.6g exceeds the stability limit %.6g\n", dt, dt_max);
        return kExitUsage;
    }

    LibString header;
    check(tf_sim_csv_header(&header.p));
    std::ostringstream csv;
    csv << header.str();
    std::string last_row;
    auto record = [&] {
        LibString row;
        check(tf_sim_csv_row(sim.get(), &row.p));
        last_row = row.str();
        csv << last_row;
    };
    record();

    // Equal steps that land exactly on t_final.
    const long steps = t_final > 0 ? static_cast<long>(std::ceil(t_final / dt - 1e-12)) : 0;
    const double h = steps > 0 ? t_final / steps : 0;
    for (long s = 0; s < steps; ++s) {
        check(tf_sim_step(sim.get(), h));
        record();
    }

    write_file(dir / "diagnostics.csv", csv.str());
    check(tf_sim_write_dump(sim.get(), (dir / "state.bin").string().c_str()));

    nlohmann::ordered_json summary;
    summary["schema"] = 1;
    summary["mode"] = a.mode;
    summary["grid"] = a.grid;
    summary["box_half_width"] = a.box;
    summary["eps"] = a.eps;
    summary["width"] = a.width;
    summary["t_final"] = t_final;
    summary["dt"] = h;
    summary["steps"] = steps;
    summary["horizon"] = horizon;
    const auto names = split_csv_line(header.str());
    const auto values = split_csv_line(last_row);
    nlohmann::ordered_json fin;
    for (std::size_t i = 0; i < names.size() && i < values.size(); ++i) {
        const double v = std::strtod(values[i].c_str(), nullptr);
        fin[names[i]] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    }
    summary["final"] = fin;
    const std::string text = summary.dump(2) + "\n";
    write_file(dir / "summary.json", text);
    std::cout << text;
    return kExitPass;
}

int run_certify(const Globals& g, int criterion)
{
    auto p = load_params(g);
    LibString report;
    int fails = 0;
    check(tf_certify(p.get(), criterion, g.tol_scale, &report.p, &fails));
    emit(g, "certify.json", report.str());
    std::fprintf(stderr, "%d check(s) failed\n", fails);
    return fails == 0 ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Two-fluid linearized dynamics: spectra, Green's functions, convolution bounds, simulation"};
    app.set_version_flag("--version", std::string(tf_version()));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--params", g.params_path, "parameter file (key = value lines)")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
    app.add_option("--tol-scale", g.tol_scale, "multiplies every certification tolerance")
        ->check(CLI::PositiveNumber);

    auto* eq = app.add_subcommand("equilibrium", "solve for the equilibrium and print derived constants");

    SpectrumArgs sa;
    auto* sp = app.add_subcommand("spectrum", "eigenvalue sweep of the linearized symbol");
    sp->add_option("--k-min", sa.k_min, "smallest wavenumber")->check(CLI::PositiveNumber);
    sp->add_option("--k-max", sa.k_max, "largest wavenumber")->check(CLI::PositiveNumber);
    sp->add_option("--count", sa.count, "number of wavenumbers")->check(CLI::Range(2, 1000000));
    sp->add_flag("--linear", sa.linear, "uniform spacing instead of logarithmic");

    GreensArgs ga;
    auto* gr = app.add_subcommand("greens", "pointwise Green's function entry against envelopes");
    gr->add_option("--entry", ga.entry, "entry i,j with 1 <= i,j <= 4")->delimiter(',')->expected(2);
    gr->add_option("--t-list", ga.t_list, "comma-separated times in [1, 100]")->delimiter(',');
    gr->add_option("--r-max-factor", ga.r_max_factor, "radial extent in units of c t")->check(CLI::PositiveNumber);
    gr->add_option("--envelopes", ga.envelopes, "e.g. R4,H:2:1:2 or D:1.5:1.5,H:2:1:2");

    ConvolveArgs ca;
    auto* cv = app.add_subcommand("convolve", "space-time convolution bound for a named case");
    cv->add_option("--case", ca.case_name, "I1..I3, K1..K7, N12_log, N1, K4_false or log_obstruction");
    cv->add_option("--t", ca.t, "comma-separated times")->delimiter(',');

    SimulateArgs ma;
    auto* sm = app.add_subcommand("simulate", "periodic pseudo-spectral run from a momentum blob");
    sm->add_option("--mode", ma.mode, "linear or nonlinear")->check(CLI::IsMember({"linear", "nonlinear"}));
    sm->add_option("--grid", ma.grid, "points per side")->check(CLI::IsMember({32, 48, 64}));
    sm->add_option("--box", ma.box, "box half-width L")->check(CLI::PositiveNumber);
    sm->add_option("--eps", ma.eps, "blob amplitude")->check(CLI::NonNegativeNumber);
    sm->add_option("--width", ma.width, "blob width")->check(CLI::PositiveNumber);
    sm->add_option("--t-final", ma.t_final, "end time, default L / (2c)")->check(CLI::NonNegativeNumber);
    sm->add_option("--dt", ma.dt, "step size, default the stability limit")->check(CLI::PositiveNumber);

    int criterion = 0;
    auto* ca_all = app.add_subcommand("certify-all", "run the acceptance checks and print a JSON summary");
    ca_all->add_option("--criterion", criterion, "run only this criterion (1..12)")->check(CLI::Range(1, 12));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        check(tf_set_threads(g.threads));
        if (*eq) return run_equilibrium(g);
        if (*sp) return run_spectrum(g, sa);
        if (*gr) return run_greens(g, ga);
        if (*cv) return run_convolve(g, ca);
        if (*sm) return run_simulate(g, ma);
        if (*ca_all) return run_certify(g, criterion);
    } catch (const Exit& e) {
        return e.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFail;
    }
    return kExitUsage;
}
