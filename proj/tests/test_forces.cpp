#include "doctest.h"
#include "test_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/forces.hpp"

#include <cmath>

using namespace sgp;

namespace {
const SplitProtocol kProto(0.2, 0.1, 1e3, 0.0, 1e-14);
const MaterialModel kDiamond = MaterialModel::diamond();
}  // namespace

TEST_CASE("spin force")
{
    const double f = kPhys.mu() * 1e3;
    CHECK(spin_force(kProto, Arm::Right, -0.45) == rel(f, 1e-15));
    CHECK(spin_force(kProto, Arm::Left, -0.45) == rel(-f, 1e-15));
    CHECK(spin_force(kProto, Arm::Right, 0.0) == 0.0);
    CHECK(spin_force(kProto, Arm::Right, 0.9) == 0.0);
    const SplitProtocol off(0.2, 0.1, 0.0, 0.0, 1e-14);
    for (double t : {-0.5, -0.2, 0.0, 0.25, 0.5}) CHECK(spin_force(off, Arm::Right, t) == 0.0);
}

TEST_CASE("diamagnetic force")
{
    CHECK(diamagnetic_force_total(kProto, kDiamond, Arm::Right, 0.0) == 0.0);
    CHECK(diamagnetic_force_total(kProto, kDiamond, Arm::Right, kProto.start()) == 0.0);
    // chi M / mu0 * b^2 X at a sample time in the second segment
    const double t = -0.25;
    const double x = kinematics_at(kProto, Arm::Right, t).position;
    const double expect = kDiamond.susceptibility * 1e-14 / kPhys.mu_0 * 1e6 * x;
    CHECK(diamagnetic_force_total(kProto, kDiamond, Arm::Right, t) == rel(expect, 1e-14));
    // Negative susceptibility pushes toward the field minimum.
    CHECK(diamagnetic_force_total(kProto, kDiamond, Arm::Right, t) < 0.0);
    const SplitProtocol biased(0.2, 0.1, 1e3, 0.5, 1e-14);
    const double fb = diamagnetic_force_total(biased, kDiamond, Arm::Right, kProto.start());
    CHECK(fb == rel(kDiamond.susceptibility * 1e-14 / kPhys.mu_0 * 0.5 * 1e3, 1e-14));
}

TEST_CASE("per-atom partition and atom count")
{
    CHECK(per_atom_partition(1.0, 4) == 0.25);
    CHECK(per_atom_partition(3.5, 1) == 3.5);
    CHECK_THROWS_AS(per_atom_partition(1.0, 0), DomainError);
    CHECK(atom_count(1e-14) == rel(1e-14 / 1.994e-26));
    CHECK_THROWS_AS(atom_count(0.0), DomainError);
}

TEST_CASE("polarizability")
{
    const double v = 1e-14 / kDiamond.density;
    const double n = atom_count(1e-14);
    const double a = polarizability(5.7, v, n);
    CHECK(a == rel(3 * kPhys.eps_0 * v / n * 4.7 / 7.7, 1e-15));
    CHECK(polarizability(1.0 + 1e-12, v, n) < 1e-11 * a);
    CHECK_THROWS_AS(polarizability(1.0, v, n), DomainError);
    CHECK_THROWS_AS(polarizability(0.5, v, n), DomainError);
}

TEST_CASE("induced dipole force")
{
    CHECK(induced_dipole_force(kProto, kDiamond, Arm::Right, -0.25, 1e3, 0.0) == 0.0);
    // Per-atom force times atom count equals the summed form.
    const double per = induced_dipole_force(kProto, kDiamond, Arm::Right, -0.25, 10.0, 1e4);
    const double total = induced_dipole_force_total(kProto, kDiamond, Arm::Right, -0.25, 10.0, 1e4);
    CHECK(per * atom_count(1e-14) == rel(total, 1e-13));
    // A linear field (eta_e = 0) gives identical forces on both arms.
    const ModeForce linear(CouplingChannel::induced_dipole(1e3, 0.0), kProto, kDiamond);
    for (double t : {-0.4, -0.1, 0.0, 0.3}) CHECK(linear.delta(t) == 0.0);
}

TEST_CASE("mode force")
{
    const ModeForce spin(CouplingChannel::spin(), kProto, kDiamond);
    CHECK(spin.arm(Arm::Right, -0.45) == rel(kPhys.mu() * 1e3 / std::sqrt(1e-14), 1e-15));
    CHECK(spin.delta(-0.45) == rel(2 * kPhys.mu() * 1e3 / std::sqrt(1e-14), 1e-15));
    const SplitProtocol off(0.2, 0.1, 0.0, 0.0, 1e-14);
    for (auto ch : {CouplingChannel::spin(), CouplingChannel::diamagnetic()}) {
        const ModeForce f(ch, off, kDiamond);
        for (double t : {-0.5, -0.2, 0.0, 0.25, 0.5}) CHECK(f.delta(t) == 0.0);
    }
}

TEST_CASE("held-gradient dia form differs from literal only in free flight")
{
    const ModeForce lit(CouplingChannel::diamagnetic(DiamagneticGating::Literal), kProto, kDiamond);
    const ModeForce held(CouplingChannel::diamagnetic(DiamagneticGating::HeldGradient), kProto, kDiamond);
    CHECK(lit.delta(0.0) == 0.0);
    CHECK(held.delta(0.0) != 0.0);
    for (double t : {-0.45, -0.25, 0.25, 0.45}) CHECK(lit.delta(t) == rel(held.delta(t), 1e-15));
    CHECK(held.delta(0.9) == 0.0);
}

TEST_CASE("arm-common terms drop out of the force difference")
{
    const ModeForce plain(CouplingChannel::induced_dipole(0.0, 50.0), kProto, kDiamond);
    const ModeForce biased(CouplingChannel::induced_dipole(3.0, 50.0), kProto, kDiamond);
    const SplitProtocol no_bias(0.2, 0.1, 1e3, 0.0, 1e-14);
    const ModeForce dia(CouplingChannel::diamagnetic(), no_bias, kDiamond);
    for (double t : {-0.45, -0.25, 0.0, 0.25, 0.45}) {
        CHECK(plain.delta(t) == rel(plain.arm(Arm::Right, t) - plain.arm(Arm::Left, t), 1e-13));
        CHECK(biased.delta(t) == plain.delta(t));
        if (t != 0.0) CHECK(dia.delta(t) == rel(dia.arm(Arm::Right, t) - dia.arm(Arm::Left, t), 1e-13));
    }
    CHECK(dia.delta(0.0) == 0.0);
}

TEST_CASE("polynomial segments reproduce the pointwise force")
{
    for (auto ch : {CouplingChannel::spin(), CouplingChannel::diamagnetic(),
                    CouplingChannel::diamagnetic(DiamagneticGating::HeldGradient),
                    CouplingChannel::induced_dipole(3.0, 50.0)}) {
        const ModeForce f(ch, kProto, kDiamond);
        const auto segs = f.delta_segments();
        REQUIRE(segs.has_value());
        for (const auto& s : *segs) {
            for (double u : {0.1, 0.5, 0.9}) {
                const double t = s.begin + u * (s.end - s.begin);
                const double ref = f.delta(t);
                CHECK(std::fabs(s(t) - ref) <= 1e-12 * std::fabs(ref) + 1e-300);
            }
        }
    }
}

TEST_CASE("channel json")
{
    CHECK(channel_from_json(R"({"kind":"spin"})").kind == ChannelKind::SpinMagnetic);
    CHECK(channel_from_json(R"({"kind":"dia"})").kind == ChannelKind::Diamagnetic);
    const auto d = channel_from_json(R"({"kind":"induced_dipole","eta_e":30,"E_0":1})");
    CHECK(d.kind == ChannelKind::InducedDipole);
    CHECK(d.eta_e == 30.0);
    CHECK(d.e0 == 1.0);
    CHECK_THROWS_AS(channel_from_json(R"({"kind":"spin","eta_e":1})"), ConfigError);
    CHECK_THROWS_AS(channel_from_json(R"({"kind":"induced_dipole"})"), ConfigError);
    CHECK_THROWS_AS(channel_from_json(R"({"kind":"gravity"})"), ConfigError);
    CHECK(parse_channel_kind("dipole") == ChannelKind::InducedDipole);
    CHECK(channel_name(ChannelKind::Diamagnetic) == "dia");
    CHECK_THROWS_AS(CouplingChannel::intrinsic_dipole(0.0, 0.0, 1.0).validate(), DomainError);
}
