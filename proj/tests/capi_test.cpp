// Exercises the shared library through its public header only.
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "twofluid/twofluid.h"

namespace {

struct Owned {
    char* p = nullptr;
    ~Owned() { tf_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

struct Params {
    tf_params* p = nullptr;
    Params() { REQUIRE(tf_params_create(&p) == TF_OK); }
    ~Params() { tf_params_destroy(p); }
};

int count_lines(const std::string& s)
{
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST_CASE("status names and version")
{
    CHECK(std::string(tf_status_name(TF_OK)) == "ok");
    CHECK(std::string(tf_status_name(TF_CONSTRAINT)) == "constraint");
    CHECK(std::string(tf_version()).size() > 0);
}

TEST_CASE("parameter handles")
{
    Params p;
    double v = 0;
    CHECK(tf_params_get(p.p, "a_minus", &v) == TF_OK);
    CHECK(v == 1.0);
    CHECK(tf_params_set(p.p, "a_minus", 2.0) == TF_OK);
    CHECK(tf_params_get(p.p, "a_minus", &v) == TF_OK);
    CHECK(v == 2.0);
    CHECK(tf_params_set(p.p, "viscosity", 1.0) == TF_INVALID_ARGUMENT);
    CHECK(std::string(tf_last_error()).find("viscosity") != std::string::npos);
    CHECK(tf_params_validate(p.p) == TF_OK);
    CHECK(std::string(tf_last_error()).empty());
    CHECK(tf_params_set(p.p, "sigma_plus", -1.0) == TF_OK);
    CHECK(tf_params_validate(p.p) == TF_CONSTRAINT);
    CHECK(tf_params_get(nullptr, "a_minus", &v) == TF_INVALID_ARGUMENT);

    tf_params* loaded = nullptr;
    CHECK(tf_params_load("/nonexistent/params.cfg", &loaded) == TF_IO);
    CHECK(loaded == nullptr);
}

TEST_CASE("last error is per thread")
{
    Params p;
    CHECK(tf_params_set(p.p, "bogus", 1.0) == TF_INVALID_ARGUMENT);
    std::string other = "unset";
    std::thread([&] { other = tf_last_error(); }).join();
    CHECK(other.empty());
    CHECK_FALSE(std::string(tf_last_error()).empty());
}

TEST_CASE("equilibrium and spectrum reports")
{
    Params p;
    Owned json;
    REQUIRE(tf_equilibrium_json(p.p, &json.p) == TF_OK);
    const auto j = nlohmann::json::parse(json.str());
    CHECK(j.at("schema") == 1);
    CHECK(j.at("c").get<double>() == doctest::Approx(2.0));

    Owned csv;
    REQUIRE(tf_spectrum_csv(p.p, 1e-3, 50, 30, 1, &csv.p) == TF_OK);
    CHECK(count_lines(csv.str()) == 31);
    CHECK(csv.str().rfind("k,re_lambda1,", 0) == 0);
    Owned bad;
    CHECK(tf_spectrum_csv(p.p, 0, 50, 30, 1, &bad.p) == TF_INVALID_ARGUMENT);
    CHECK(bad.p == nullptr);
}

TEST_CASE("Green's function report")
{
    Params p;
    const double t[] = {1.0, 4.0};
    Owned csv, report;
    int pass = -1;
    REQUIRE(tf_greens_report(p.p, 2, 2, t, 2, 2.0, nullptr, &csv.p, &report.p, &pass) == TF_OK);
    const auto j = nlohmann::json::parse(report.str());
    CHECK(j.at("entry") == "G22");
    CHECK(j.at("schema") == 1);
    CHECK(j.contains("region"));
    CHECK(j.at("pass").get<bool>() == (pass == 1));
    CHECK(csv.str().rfind("r,t,value\n", 0) == 0);

    Owned r2;
    CHECK(tf_greens_report(p.p, 5, 1, t, 2, 2.0, nullptr, nullptr, &r2.p, &pass) == TF_INVALID_ARGUMENT);
    CHECK(tf_greens_report(p.p, 1, 2, t, 2, 2.0, "Q:1", nullptr, &r2.p, &pass) == TF_INVALID_ARGUMENT);
}

TEST_CASE("convolution report")
{
    Params p;
    const double t[] = {4.0};
    Owned report;
    int pass = -1;
    REQUIRE(tf_convolve_report(p.p, "K1", t, 1, &report.p, &pass) == TF_OK);
    const auto j = nlohmann::json::parse(report.str());
    CHECK(j.at("case") == "K1");
    CHECK(j.at("samples").size() == 8);
    CHECK(j.at("c_est_by_region").size() >= 3);
    Owned r2;
    CHECK(tf_convolve_report(p.p, "nope", t, 1, &r2.p, &pass) == TF_INVALID_ARGUMENT);
}

TEST_CASE("simulation handle")
{
    Params p;
    tf_sim* s = nullptr;
    CHECK(tf_sim_create(p.p, 40, 16.0, 1e-3, 3.0, 1, &s) == TF_INVALID_ARGUMENT);
    CHECK(s == nullptr);
    REQUIRE(tf_sim_create(p.p, 32, 16.0, 1e-3, 2.0, 1, &s) == TF_OK);
    double dt = 0, horizon = 0, t = -1;
    CHECK(tf_sim_dt_max(s, &dt) == TF_OK);
    CHECK(tf_sim_horizon(s, &horizon) == TF_OK);
    CHECK(dt > 0);
    CHECK(horizon > 0);
    CHECK(tf_sim_step(s, 0.5) == TF_OK);
    CHECK(tf_sim_time(s, &t) == TF_OK);
    CHECK(t == doctest::Approx(0.5));
    Owned header, row;
    CHECK(tf_sim_csv_header(&header.p) == TF_OK);
    CHECK(tf_sim_csv_row(s, &row.p) == TF_OK);
    CHECK(count_lines(header.str()) == 1);
    CHECK(count_lines(row.str()) == 1);
    const auto path = std::filesystem::temp_directory_path() / "twofluid_capi_dump.bin";
    CHECK(tf_sim_write_dump(s, path.string().c_str()) == TF_OK);
    CHECK(std::filesystem::file_size(path) == 8 * (3 + 8 * 32 * 32 * 32));
    std::filesystem::remove(path);
    CHECK(tf_sim_write_dump(s, "/nonexistent/dir/state.bin") == TF_IO);
    tf_sim_destroy(s);
}

TEST_CASE("certification of a single criterion")
{
    Params p;
    Owned report;
    int fails = -1;
    REQUIRE(tf_certify(p.p, 5, 1.0, &report.p, &fails) == TF_OK);
    CHECK(fails == 0);
    const auto j = nlohmann::json::parse(report.str());
    CHECK(j.at("schema") == 1);
    CHECK(j.at("fail_count") == 0);
    CHECK(j.at("checks").size() >= 1);
    CHECK(tf_certify(p.p, 13, 1.0, &report.p, &fails) == TF_INVALID_ARGUMENT);
}
