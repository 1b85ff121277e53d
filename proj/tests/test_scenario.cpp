#include "doctest.h"
#include "test_util.hpp"
#include "sgphonon/dynamics.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

using namespace sgp;
namespace fs = std::filesystem;

namespace {
const MaterialModel kDiamond = MaterialModel::diamond();

fs::path scratch(const std::string& name)
{
    const auto p = fs::temp_directory_path() / ("sgp_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

SweepGrid small_grid()
{
    SweepGrid g;
    g.masses = {1e-16, 1e-14};
    g.delta_x = {1e-6, 1e-5, 1e-4};
    g.delta_t = {0.1, 1.0};
    g.flight_fraction = {0.0, 0.3};
    g.temperatures = {4.0, 300.0};
    return g;
}
}  // namespace

TEST_CASE("one-point grid gives one row per channel")
{
    SweepGrid g;
    g.masses = {1e-14};
    g.delta_x = {1e-4};
    g.delta_t = {1.0};
    g.temperatures = {300.0};
    const std::vector<ChannelKind> ch{ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic};
    const auto rows = sweep(g, ch, kDiamond);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].channel == ChannelKind::SpinMagnetic);
    CHECK(rows[1].channel == ChannelKind::Diamagnetic);
    CHECK(rows[0].neg_ln_c == rel(1.347558250669454e-14, 1e-10));
}

TEST_CASE("sweep output does not depend on the worker count")
{
    const std::vector<ChannelKind> ch{ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic, ChannelKind::InducedDipole};
    auto g = small_grid();
    g.eta_e = 30.0;
    std::ostringstream a, b;
    write_contrast_csv(a, sweep(g, ch, kDiamond, 1));
    write_contrast_csv(b, sweep(g, ch, kDiamond, 8));
    CHECK(a.str() == b.str());
}

TEST_CASE("contrast csv round trip")
{
    const std::vector<ChannelKind> ch{ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic};
    const auto rows = sweep(small_grid(), ch, kDiamond);
    std::ostringstream out;
    write_contrast_csv(out, rows);
    CHECK(out.str().rfind("channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,contrast,modes_used,fidelity\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_contrast_csv(in);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].channel == rows[i].channel);
        CHECK(back[i].mass == rows[i].mass);
        CHECK(back[i].delta_x == rows[i].delta_x);
        CHECK(back[i].neg_ln_c == rows[i].neg_ln_c);
        CHECK(back[i].contrast == rows[i].contrast);
        CHECK(back[i].modes_used == rows[i].modes_used);
        CHECK(back[i].fidelity == rows[i].fidelity);
    }
}

TEST_CASE("grid validation")
{
    SweepGrid g = small_grid();
    g.masses.clear();
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = small_grid();
    g.flight_fraction = {1.0};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    CHECK_THROWS_AS(SweepGrid::from_json(R"({"masses":[1e-14]})"), ConfigError);
    const auto j = SweepGrid::from_json(
        R"({"masses":1e-14,"delta_x":{"from":1e-6,"to":1e-3,"per_decade":16},"delta_t":[1],"temperatures":[4,300]})");
    CHECK(j.delta_x.size() == 49);
    CHECK(j.delta_x.front() == rel(1e-6, 1e-15));
    CHECK(j.delta_x.back() == rel(1e-3, 1e-15));
    CHECK(j.size() == 98);
}

TEST_CASE("channel lists")
{
    const auto c = parse_channel_list("spin, dia,dipole");
    REQUIRE(c.size() == 3);
    CHECK(c[2] == ChannelKind::InducedDipole);
    CHECK_THROWS_AS(parse_channel_list("spin,spin"), ConfigError);
    CHECK_THROWS_AS(parse_channel_list("spin,,dia"), ConfigError);
    CHECK_THROWS_AS(parse_channel_list(""), ConfigError);
    CHECK_THROWS_AS(parse_channel_list("phonon"), ConfigError);
}

TEST_CASE("contour of a uniform map below threshold is empty")
{
    const std::vector<double> xs{0, 1, 2}, ys{0, 1, 2};
    const std::vector<double> v(9, 1e-5);
    const auto c = feasibility_contour(xs, ys, v, 0.01);
    CHECK(c.empty());
    CHECK_FALSE(c.notice.empty());
}

TEST_CASE("contour of a diagonal ramp follows the diagonal")
{
    const std::size_t n = 21;
    std::vector<double> xs(n), ys(n), v(n * n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = ys[i] = static_cast<double>(i);
    for (std::size_t iy = 0; iy < n; ++iy)
        for (std::size_t ix = 0; ix < n; ++ix) v[iy * n + ix] = static_cast<double>(ix) - static_cast<double>(iy) + 0.3;
    const auto c = feasibility_contour(xs, ys, v, 0.0);
    REQUIRE(c.polylines.size() == 1);
    CHECK(c.polylines[0].size() >= n);
    for (const auto& p : c.polylines[0]) CHECK(std::fabs(p[0] - p[1]) <= 1.0);
    std::ostringstream out;
    write_contour_csv(out, c);
    CHECK(out.str().rfind("polyline,x,y\n", 0) == 0);
}

TEST_CASE("scenario config errors")
{
    CHECK_THROWS_AS(ScenarioConfig::from_json(R"({"scenario":"spectrogram","output_dir":"x"})"), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json(R"({"scenario":"occupation"})"), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json(R"({"scenario":"occupation","output_dir":"x","material":"lead"})"),
                    ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json(R"({"scenario":"occupation","output_dir":"x","jobs":0})"), ConfigError);
    CHECK_THROWS_AS(ScenarioConfig::from_json("[1,2]"), ConfigError);
}

TEST_CASE("empty custom grid fails without output")
{
    const auto dir = scratch("empty_grid");
    auto c = ScenarioConfig::from_json(
        R"({"scenario":"custom_sweep","parameters":{"grid":{"masses":[],"delta_x":[1e-4],"delta_t":[1],"temperatures":[4]}},"output_dir":")" +
        dir.string() + "\"}");
    CHECK_THROWS_AS(run_scenario(c), ConfigError);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("unwritable output is reported before computing")
{
    const auto file = scratch("blocker");
    {
        std::ofstream(file) << "x";
    }
    auto c = ScenarioConfig::from_json(R"({"scenario":"contrast_curves","output_dir":")" + (file / "sub").string() + "\"}");
    CHECK_THROWS_AS(run_scenario(c), IoError);
    fs::remove(file);
}

TEST_CASE("contrast curves scenario")
{
    const auto dir = scratch("curves");
    auto c = ScenarioConfig::from_json(R"({"scenario":"contrast_curves","output_dir":")" + dir.string() +
                                       R"(","parameters":{"delta_x":{"from":1e-6,"to":1e-3,"count":4}}})");
    const auto summary = nlohmann::json::parse(run_scenario(c));
    CHECK(summary["rows"] == 2 * 2 * 4 * 2);
    CHECK(summary.contains("wall_time_s"));
    std::ifstream in(dir / "contrast_curves.csv");
    const auto rows = read_contrast_csv(in);
    CHECK(rows.size() == 32);
    fs::remove_all(dir);
}

TEST_CASE("history scenarios")
{
    const auto dir = scratch("phase");
    auto c = ScenarioConfig::from_json(R"({"scenario":"phase_space","output_dir":")" + dir.string() + "\"}");
    const auto summary = nlohmann::json::parse(run_scenario(c));
    REQUIRE(summary["files"].size() == 2);
    std::ifstream in(dir / summary["files"][0].get<std::string>());
    const auto h = read_history_csv(in);
    REQUIRE(h.size() > 10);
    CHECK(h.front().u_l == rel(1.0, 1e-14));
    CHECK(h.front().udot_r == rel(1.0, 1e-14));
    fs::remove_all(dir);
}

TEST_CASE("identical configs give identical files")
{
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    const std::string params = R"(,"parameters":{"map_a":{"delta_t":{"from":1e-3,"to":1,"per_decade":2},)"
                               R"("delta_x":{"from":1e-5,"to":1e-1,"per_decade":2}},)"
                               R"("map_b":{"delta_t":{"from":1e-3,"to":1,"per_decade":2},)"
                               R"("masses":{"from":1e-16,"to":1e-10,"per_decade":2}}}})";
    auto ca = ScenarioConfig::from_json(R"({"scenario":"contrast_maps","jobs":1,"output_dir":")" + a.string() + "\"" + params);
    auto cb = ScenarioConfig::from_json(R"({"scenario":"contrast_maps","jobs":6,"output_dir":")" + b.string() + "\"" + params);
    const auto sa = nlohmann::json::parse(run_scenario(ca));
    run_scenario(cb);
    REQUIRE(sa["files"].size() > 0);
    for (const auto& f : sa["files"]) CHECK(slurp(a / f.get<std::string>()) == slurp(b / f.get<std::string>()));
    fs::remove_all(a);
    fs::remove_all(b);
}
