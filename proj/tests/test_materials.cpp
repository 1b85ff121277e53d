#include "doctest.h"
#include "test_util.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/materials.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace sgp;

TEST_CASE("cube side from mass and density")
{
    const auto d = MaterialModel::diamond();
    CHECK(cube_side(1e-14, d) == rel(1.418e-6, 1e-3));
    CHECK(cube_side(1e-18, d) == rel(6.58e-8, 1e-3));
    CHECK(cube_side(d.density, d) == rel(1.0, 1e-15));
    // mpmath: (1e-14 / 3510)^(1/3)
    CHECK(cube_side(1e-14, d) == rel(1.417634567609967e-6, 1e-14));
    CHECK_THROWS_AS(cube_side(0.0, d), DomainError);
    CHECK_THROWS_AS(cube_side(-1e-14, d), DomainError);
}

TEST_CASE("fundamental tone")
{
    const double w = fundamental_tone(1.418e-6, 1.75e4);
    CHECK(w == rel(3.88e10, 1e-3));
    CHECK(w / (2.0 * 3.141592653589793) == rel(6.2e9, 1e-2));
    CHECK(fundamental_tone(2.836e-6, 1.75e4) == rel(w / 2, 1e-15));
    CHECK(fundamental_tone(6.58e-8, 1.75e4) == rel(8.35e11, 1e-3));
    CHECK(fundamental_tone_for_mass(1e-14, MaterialModel::diamond()) ==
          rel(38781412850.64050731, 1e-14));
    CHECK_THROWS_AS(fundamental_tone(0.0, 1.75e4), DomainError);
    CHECK_THROWS_AS(fundamental_tone(1e-6, -1.0), DomainError);
}

TEST_CASE("mode ladder")
{
    auto three = mode_ladder(1.0, TruncationPolicy::fixed(3)).frequencies();
    REQUIRE(three.size() == 3);
    CHECK(three[0] == 1.0);
    CHECK(three[1] == 2.0);
    CHECK(three[2] == 3.0);
    auto one = mode_ladder(3.88e10, TruncationPolicy::fixed(1)).frequencies();
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 3.88e10);
    CHECK_THROWS_AS(mode_ladder(1.0, TruncationPolicy::fixed(0)), DomainError);
    CHECK_THROWS_AS(mode_ladder(-1.0, TruncationPolicy::fixed(3)), DomainError);
}

TEST_CASE("adaptive ladder on an n^-4 series")
{
    const auto term = [](std::size_t n, double) { return 1.0 / std::pow(static_cast<double>(n), 4); };
    const auto ladder = mode_ladder(1.0, TruncationPolicy::adaptive(1e-12, 100000));
    const auto adaptive = ladder.accumulate(term, term, 4.0);
    const auto fixed = mode_ladder(1.0, TruncationPolicy::fixed(10000)).accumulate(term, term, 4.0);
    CHECK(adaptive.converged);
    CHECK(std::fabs(adaptive.total - fixed.total) < 1e-12);
    CHECK(adaptive.modes_used < 10000);
    CHECK(adaptive.terms.size() == adaptive.modes_used);
}

TEST_CASE("adaptive ladder reports the cap")
{
    const auto term = [](std::size_t n, double) { return 1.0 / std::pow(static_cast<double>(n), 2); };
    const auto s = mode_ladder(1.0, TruncationPolicy::adaptive(1e-12, 500)).accumulate(term, term, 2.0);
    CHECK_FALSE(s.converged);
    CHECK(s.modes_used == 500);
    CHECK(s.tail_bound > 0.0);
}

TEST_CASE("material validation and json")
{
    auto d = MaterialModel::diamond();
    CHECK(d.density == 3.51e3);
    CHECK(d.sound_speed == 1.75e4);
    CHECK(d.susceptibility == -6.2e-9);
    CHECK(d.dielectric == 5.7);
    const auto back = material_from_json(material_to_json(d));
    CHECK(back.name == d.name);
    CHECK(back.density == d.density);
    CHECK(back.susceptibility == d.susceptibility);
    CHECK_THROWS_AS(material_from_json(R"({"name":"x","density":-1,"sound_speed":1,"susceptibility":0,"dielectric":2})"),
                    ConfigError);
    CHECK_THROWS_AS(material_from_json("{not json"), ConfigError);
    CHECK_THROWS_AS(load_material("unobtainium"), ConfigError);
    CHECK(load_material("diamond").density == 3.51e3);
}

TEST_CASE("material from file")
{
    const auto path = std::filesystem::temp_directory_path() / "sgp_test_material.json";
    {
        std::ofstream out(path);
        out << R"({"name":"stiff","density":3510,"sound_speed":35000,"susceptibility":-6.2e-9,"dielectric":5.7})";
    }
    const auto m = load_material(path.string());
    CHECK(m.name == "stiff");
    CHECK(m.sound_speed == 35000.0);
    std::filesystem::remove(path);
}
