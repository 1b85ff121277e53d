#include "doctest.h"
#include "test_util.hpp"
#include "sgphonon/sgphonon.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>

TEST_CASE("status names and version")
{
    CHECK(std::string(sgp_version()) == "0.1.0");
    CHECK(std::string(sgp_status_name(SGP_OK)) == "ok");
    CHECK(std::string(sgp_status_name(SGP_ERR_NONCONVERGENCE)) == "non-convergence");
}

TEST_CASE("materials through the C API")
{
    sgp_material* m = nullptr;
    REQUIRE(sgp_material_preset("diamond", &m) == SGP_OK);
    double side = 0, w0 = 0;
    CHECK(sgp_cube_side(m, 1e-14, &side) == SGP_OK);
    CHECK(side == rel(1.417634567609967e-6, 1e-14));
    CHECK(sgp_fundamental_tone(m, 1e-14, &w0) == SGP_OK);
    CHECK(w0 == rel(38781412850.64050731, 1e-14));
    CHECK(sgp_cube_side(m, -1.0, &side) == SGP_ERR_DOMAIN);
    CHECK(std::strstr(sgp_last_error(), "mass") != nullptr);
    char* js = nullptr;
    REQUIRE(sgp_material_to_json(m, &js) == SGP_OK);
    sgp_material* back = nullptr;
    CHECK(sgp_material_from_json(js, &back) == SGP_OK);
    sgp_string_free(js);
    sgp_material_free(back);
    sgp_material_free(m);

    sgp_material* none = nullptr;
    CHECK(sgp_material_preset("lead", &none) == SGP_ERR_CONFIG);
    CHECK(none == nullptr);
    CHECK(sgp_material_from_json("{", &none) == SGP_ERR_CONFIG);
    CHECK(sgp_material_load(nullptr, &none) == SGP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("protocol through the C API")
{
    sgp_protocol* p = nullptr;
    REQUIRE(sgp_protocol_from_target(1e-14, 1e-4, 1.0, 0.0, &p) == SGP_OK);
    sgp_protocol_info info{};
    REQUIRE(sgp_protocol_get_info(p, &info) == SGP_OK);
    CHECK(info.tau_a == 0.25);
    CHECK(info.eta_b == rel(431499.4606256743, 1e-14));
    CHECK(info.delta_x_max == rel(1e-4, 1e-14));
    double g = 0;
    CHECK(sgp_protocol_gradient(p, -0.5, &g) == SGP_OK);
    CHECK(g == info.eta_b);
    double x = 1, v = 1, a = 0;
    int in_run = 0;
    CHECK(sgp_protocol_kinematics(p, SGP_ARM_RIGHT, 0.0, &x, &v, &a, &in_run) == SGP_OK);
    CHECK(x == rel(0.5e-4, 1e-13));
    CHECK(in_run == 1);
    CHECK(sgp_protocol_kinematics(p, static_cast<sgp_arm>(3), 0.0, &x, &v, &a, &in_run) == SGP_ERR_INVALID_ARGUMENT);
    int pass = 0;
    double ratio = 0;
    CHECK(sgp_protocol_check_budget(p, 1e6, &pass, &ratio) == SGP_OK);
    CHECK(pass == 1);
    char* js = nullptr;
    REQUIRE(sgp_protocol_to_json(p, &js) == SGP_OK);
    sgp_protocol* q = nullptr;
    CHECK(sgp_protocol_from_json(js, &q) == SGP_OK);
    sgp_string_free(js);
    sgp_protocol_free(q);
    sgp_protocol_free(p);

    sgp_protocol* bad = nullptr;
    CHECK(sgp_protocol_from_target(1e-14, 1e-4, 1.0, 1.0, &bad) == SGP_ERR_DOMAIN);
    CHECK(sgp_protocol_create(0.1, 0.0, 1.0, 0.0, 1e-14, nullptr) == SGP_ERR_INVALID_ARGUMENT);
}

TEST_CASE("contrast through the C API")
{
    sgp_material* m = nullptr;
    sgp_protocol* p = nullptr;
    REQUIRE(sgp_material_preset("diamond", &m) == SGP_OK);
    REQUIRE(sgp_protocol_from_target(1e-14, 1e-4, 1.0, 0.0, &p) == SGP_OK);

    sgp_report* r = nullptr;
    REQUIRE(sgp_ln_contrast(SGP_CHANNEL_SPIN, p, m, 300.0, nullptr, &r) == SGP_OK);
    double ln_c = 0, c = 0;
    size_t used = 0, count = 0;
    int converged = 0;
    CHECK(sgp_report_totals(r, &ln_c, &c, &used, &converged) == SGP_OK);
    CHECK(-ln_c == rel(1.347558250669454e-14, 1e-10));
    CHECK(used == 49708);
    CHECK(converged == 1);
    CHECK(sgp_report_mode_count(r, &count) == SGP_OK);
    CHECK(count == used);
    size_t n = 0;
    double w = 0, lc = 0;
    CHECK(sgp_report_mode(r, 0, &n, &w, &lc) == SGP_OK);
    CHECK(n == 1);
    CHECK(sgp_report_mode(r, count, &n, &w, &lc) == SGP_ERR_INVALID_ARGUMENT);
    char* js = nullptr;
    CHECK(sgp_report_to_json(r, &js) == SGP_OK);
    CHECK(std::strstr(js, "\"channel\":\"spin\"") != nullptr);
    sgp_string_free(js);
    sgp_report_free(r);

    sgp_contrast_options o;
    sgp_contrast_options_default(&o);
    o.fixed_modes = 3;
    o.gamma = SGP_GAMMA_UNIT;
    REQUIRE(sgp_ln_contrast(SGP_CHANNEL_DIA, p, m, 4.0, &o, &r) == SGP_OK);
    CHECK(sgp_report_totals(r, nullptr, nullptr, &used, nullptr) == SGP_OK);
    CHECK(used == 3);
    sgp_report_free(r);

    o.gamma = static_cast<sgp_gamma>(9);
    CHECK(sgp_ln_contrast(SGP_CHANNEL_DIA, p, m, 4.0, &o, &r) == SGP_ERR_INVALID_ARGUMENT);
    CHECK(sgp_ln_contrast(SGP_CHANNEL_SPIN, p, m, -4.0, nullptr, &r) == SGP_ERR_DOMAIN);

    double w0 = 0, tr = 0, orc = 0, gam = 0, occ = 0, asym = 0;
    sgp_fundamental_tone(m, 1e-14, &w0);
    CHECK(sgp_transfer_sq(SGP_CHANNEL_DIA, p, m, 3 * w0, 0.0, &tr) == SGP_OK);
    CHECK(sgp_oracle_transfer_sq(SGP_CHANNEL_DIA, p, m, 3 * w0, 0.0, &orc) == SGP_OK);
    CHECK(orc == rel(tr, 1e-9));
    CHECK(sgp_gamma_factor(2 * M_PI, 0.25, 0.0, &gam) == SGP_OK);
    CHECK(gam == rel(-2.0, 1e-14));
    CHECK(sgp_thermal_occupation(3.88e10, 0.0, &occ) == SGP_OK);
    CHECK(occ == 0.5);
    CHECK(sgp_mode_ln_contrast(0.0, w0, 300.0, &lc) == SGP_OK);
    CHECK(lc == 0.0);
    CHECK(sgp_asymptotic_neg_ln_contrast(SGP_CHANNEL_SPIN, SGP_REGIME_LOW_T, p, m, 0.01, &asym) == SGP_OK);
    CHECK(asym > 0.0);
    CHECK(sgp_asymptotic_neg_ln_contrast(SGP_CHANNEL_INDUCED_DIPOLE, SGP_REGIME_LOW_T, p, m, 0.01, &asym) ==
          SGP_ERR_DOMAIN);

    sgp_protocol_free(p);
    sgp_material_free(m);
}

TEST_CASE("runners through the C API")
{
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "sgp_capi_runner";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto cfg = dir / "config.json";
    {
        std::FILE* f = std::fopen(cfg.c_str(), "w");
        std::fputs(R"({"scenario":"dipole_estimate","output_dir":"out"})", f);
        std::fclose(f);
    }
    char* summary = nullptr;
    REQUIRE(sgp_run_scenario_file(cfg.c_str(), nullptr, 0, &summary) == SGP_OK);
    CHECK(std::strstr(summary, "fit_exponent") != nullptr);
    sgp_string_free(summary);
    CHECK(fs::exists(dir / "out" / "dipole_estimate.csv"));

    CHECK(sgp_run_scenario_file((dir / "missing.json").c_str(), nullptr, 0, nullptr) == SGP_ERR_IO);
    CHECK(sgp_sweep_file(SGP_TEST_DATA_DIR "/small_grid.json", "spin,bogus", (dir / "s").c_str(), 1, nullptr,
                         nullptr) == SGP_ERR_CONFIG);
    CHECK(sgp_sweep_file(SGP_TEST_DATA_DIR "/small_grid.json", "spin", (dir / "s").c_str(), 2, nullptr, nullptr) ==
          SGP_OK);
    CHECK(fs::exists(dir / "s" / "sweep.csv"));

    int ok = 0;
    char* rep = nullptr;
    CHECK(sgp_golden_check(SGP_TEST_DATA_DIR "/golden_contrast_curves.csv", 1e-9, nullptr, 1, &ok, &rep) == SGP_OK);
    CHECK(ok == 1);
    CHECK(std::strstr(rep, "\"rows\": 128") != nullptr);
    sgp_string_free(rep);
    fs::remove_all(dir);
}
