#include "doctest.h"
#include "test_util.hpp"
#include "sgphonon/contrast.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace sgp;

namespace {
const MaterialModel kDiamond = MaterialModel::diamond();
const double kW0 = fundamental_tone_for_mass(1e-14, kDiamond);

// tau_a in units of 1 / omega0 keeps quadrature affordable.
SplitProtocol short_protocol(double w0_tau_a, double flight_ratio)
{
    const double ta = w0_tau_a / kW0;
    return SplitProtocol(ta, flight_ratio * ta, 1e5, 0.0, 1e-14);
}
}  // namespace

TEST_CASE("numeric transform of a box")
{
    const double w = 3.0, T = 2.0;
    const std::vector<double> none;
    const auto r = oracle::fourier_transfer_numeric([](double) { return 1.0; }, 0.0, T, none, w);
    const double exact = 2.0 * (1.0 - std::cos(w * T)) / (w * w);
    CHECK(r.value_sq == rel(exact, 1e-12));
}

TEST_CASE("numeric transform is invariant under a time shift")
{
    const auto p = short_protocol(3.0, 0.4);
    const ModeForce f(CouplingChannel::spin(), p, kDiamond);
    const auto bp = p.breakpoints();
    const double w = 2.3 * kW0;
    const auto base = oracle::fourier_transfer_numeric([&](double t) { return f.delta(t); }, bp[0], bp[5], bp, w);
    for (double shift : {0.37 / kW0, 11.0 / kW0, -5.5 / kW0}) {
        std::vector<double> moved(bp.begin(), bp.end());
        for (double& b : moved) b += shift;
        const auto r = oracle::fourier_transfer_numeric([&](double t) { return f.delta(t - shift); }, moved.front(),
                                                        moved.back(), moved, w);
        CHECK(r.value_sq == rel(base.value_sq, 1e-12));
    }
}

TEST_CASE("spin transfer matches quadrature")
{
    for (double wt : {0.5, 3.0, 20.0})
        for (double ff : {0.0, 0.5, 3.0})
            for (double wr : {0.1, 1.0, 37.0, 100.0}) {
                const auto r = oracle::transfer_check(CouplingChannel::spin(), short_protocol(wt, ff), kDiamond, wr * kW0);
                CHECK(r.rel_error < 1e-6);
            }
}

TEST_CASE("dia transfer matches quadrature without free flight")
{
    for (double wt : {0.5, 3.0, 20.0})
        for (double wr : {0.1, 1.0, 37.0, 100.0}) {
            const auto r = oracle::transfer_check(CouplingChannel::diamagnetic(), short_protocol(wt, 0.0), kDiamond,
                                                  wr * kW0);
            CHECK(r.rel_error < 1e-6);
        }
}

TEST_CASE("literal dia gating departs from the closed form in free flight")
{
    const auto p = short_protocol(2.0, 1.0);
    const auto lit = oracle::transfer_check(CouplingChannel::diamagnetic(), p, kDiamond, 1.3 * kW0);
    CHECK(lit.rel_error > 1e-3);
    const auto held = oracle::transfer_check(CouplingChannel::diamagnetic(DiamagneticGating::HeldGradient), p,
                                             kDiamond, 1.3 * kW0);
    CHECK(held.rel_error < 1e-6);
}

TEST_CASE("segment oracle in the one-second regime")
{
    const auto p = SplitProtocol::from_target(1e-14, 1e-4, 1.0, 0.0);
    for (double n : {1.0, 2.0, 17.0, 1000.0}) {
        const double w = n * kW0;
        CHECK(oracle::transfer_segments(CouplingChannel::spin(), p, kDiamond, w) == rel(transfer_spin_sq(p, w), 1e-6));
        // Moment integrals cancel by (omega tau_a)^2 before the 1/omega^3 term
        // survives, so binary128 resolves it to about that times 2e-34.
        const double wt = w * p.tau_a();
        const double floor = std::max(1e-9, wt * wt * 2e-34);
        CHECK(oracle::transfer_segments(CouplingChannel::diamagnetic(), p, kDiamond, w) ==
              rel(transfer_dia_sq(p, kDiamond, w), floor));
    }
    // Direct transform of the segment model in 80-digit arithmetic.
    CHECK(transfer_dia_sq(p, kDiamond, 17 * kW0) == rel(1.1658483118164202e-73, 1e-13));
    CHECK(transfer_dia_sq(p, kDiamond, 1000 * kW0) == rel(1.0527467173158394e-82, 1e-13));
    CHECK(oracle::needs_quad(CouplingChannel::diamagnetic(), p, kW0));
    CHECK_FALSE(oracle::needs_quad(CouplingChannel::spin(), p, kW0));
}

TEST_CASE("duhamel recheck")
{
    const auto r = oracle::duhamel_recheck(CouplingChannel::spin(), short_protocol(4.0, 0.5), kDiamond, kW0);
    CHECK(r.rel_error < 1e-8);
    const SplitProtocol off(4.0 / kW0, 0.0, 0.0, 0.0, 1e-14);
    const auto z = oracle::duhamel_recheck(CouplingChannel::spin(), off, kDiamond, kW0);
    CHECK(z.analytic == 0.0);
    CHECK(z.oracle == 0.0);

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const auto p = short_protocol(0.5 + 10 * u(rng), 2 * u(rng));
        const double w = (0.1 + 10 * u(rng)) * kW0;
        CHECK(oracle::duhamel_recheck(CouplingChannel::spin(), p, kDiamond, w).rel_error < 1e-6);
    }
}

TEST_CASE("golden grid")
{
    CHECK(oracle::GoldenGridSpec::contrast_curves().size() == 128);
    const auto empty = oracle::GoldenGridSpec::from_json(
        R"({"channels":["spin"],"masses":[],"delta_x":[1e-4],"delta_t":[1],"flight_fraction":[0],"temperatures":[4]})");
    CHECK(empty.size() == 0);
    std::ostringstream out;
    oracle::write_golden_csv(out, oracle::golden_table_build(empty, kDiamond));
    CHECK(out.str() == "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,rel_err,method\n");
    CHECK_THROWS_AS(oracle::GoldenGridSpec::from_json(R"({"channels":["dipole"]})"), ConfigError);
}

TEST_CASE("golden build is deterministic and round-trips")
{
    const auto grid = oracle::GoldenGridSpec::from_json(
        R"({"channels":["spin","dia"],"masses":[1e-16],"delta_x":[1e-5,1e-4],"delta_t":[0.01],)"
        R"("flight_fraction":[0,0.4],"temperatures":[4]})");
    std::ostringstream a, b;
    oracle::write_golden_csv(a, oracle::golden_table_build(grid, kDiamond, 1));
    oracle::write_golden_csv(b, oracle::golden_table_build(grid, kDiamond, 3));
    CHECK(a.str() == b.str());
    std::istringstream in(a.str());
    const auto rows = oracle::read_golden_csv(in);
    REQUIRE(rows.size() == 8);
    std::ostringstream c;
    oracle::write_golden_csv(c, rows);
    CHECK(c.str() == a.str());
    const auto check = oracle::golden_check(rows, kDiamond, 1e-9);
    CHECK(check.ok());
    std::istringstream bad("channel,M\nspin,1\n");
    CHECK_THROWS_AS(oracle::read_golden_csv(bad), IoError);
}
