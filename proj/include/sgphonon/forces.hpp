#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sgphonon/materials.hpp"
#include "sgphonon/protocol.hpp"

namespace sgp {

enum class ChannelKind { SpinMagnetic, Diamagnetic, InducedDipole, IntrinsicDipole };

/// "spin", "dia", "induced_dipole", "intrinsic_dipole".
std::string channel_name(ChannelKind kind);
/// Accepts the names above plus "diamagnetic" and "dipole" (induced).
ChannelKind parse_channel_kind(std::string_view name);

/// How the diamagnetic force treats the free-flight window.
enum class DiamagneticGating {
    Literal,       // b(t)^2: zero while the gradient is off
    HeldGradient,  // eta_b^2 throughout the run
};

struct CouplingChannel {
    ChannelKind kind = ChannelKind::SpinMagnetic;
    double e0 = 0.0;     // V/m, dipole channels
    double eta_e = 0.0;  // V/m^2, dipole channels
    double d0 = 0.0;     // C m, intrinsic dipole
    DiamagneticGating gating = DiamagneticGating::Literal;
    /// dE/dX at X for the intrinsic dipole. Empty means the linear field
    /// E = E_0 + eta_e X.
    std::function<double(double)> field_derivative;

    static CouplingChannel spin();
    static CouplingChannel diamagnetic(DiamagneticGating gating = DiamagneticGating::Literal);
    static CouplingChannel induced_dipole(double e0, double eta_e);
    static CouplingChannel intrinsic_dipole(double d0, double e0, double eta_e);

    /// Finite parameters; intrinsic dipole needs d0.
    void validate() const;
};

/// {kind, E_0?, eta_e?, d_0?}; unknown fields rejected.
CouplingChannel channel_from_json(std::string_view json_text);
std::string channel_to_json(const CouplingChannel& channel);

/// F_s = mu S b(t).
double spin_force(const SplitProtocol& protocol, Arm arm, double t);

/// F_c = (chi_rho M / mu_0) (B_0 b + b^2 X_c).
double diamagnetic_force_total(const SplitProtocol& protocol, const MaterialModel& material,
                               Arm arm, double t);

/// Uniform share F_total / N_atoms. DomainError for N_atoms == 0.
double per_atom_partition(double total_force, std::size_t atoms);

/// M / m_carbon.
double atom_count(double mass);

/// Clausius-Mossotti: alpha = (3 eps_0 V / N) (eps_r - 1) / (eps_r + 2).
double polarizability(double eps_r, double volume, double atoms);

/// Force on one polarized atom: (2 alpha / eps_r)(E_0 eta_e + eta_e^2 X).
double induced_dipole_force(const SplitProtocol& protocol, const MaterialModel& material, Arm arm,
                            double t, double e0, double eta_e);

/// Sum of induced_dipole_force over all atoms; independent of the atom count.
double induced_dipole_force_total(const SplitProtocol& protocol, const MaterialModel& material,
                                  Arm arm, double t, double e0, double eta_e);

/// Quadratic c0 + c1 s + c2 s^2 in the local coordinate s = t - begin.
struct PolySegment {
    double begin = 0.0;
    double end = 0.0;
    std::array<double, 3> coeffs{};

    double operator()(double t) const
    {
        const double s = t - begin;
        return coeffs[0] + s * (coeffs[1] + s * coeffs[2]);
    }
};

/// Per-mode driving term f_q(t) = sum_i Q_q^i F_i(t) / sqrt(M) with Q_q^i = 1.
/// Times are on the protocol's centred axis.
class ModeForce {
public:
    ModeForce(CouplingChannel channel, SplitProtocol protocol, MaterialModel material);

    const CouplingChannel& channel() const { return channel_; }
    const SplitProtocol& protocol() const { return protocol_; }
    const MaterialModel& material() const { return material_; }

    double arm(Arm arm, double t) const;
    /// f_R(t) - f_L(t).
    double delta(double t) const;
    /// f_R - f_L at offset s into interval `segment` (0..4).
    double delta_in_segment(int segment, double s) const;

    /// Protocol breakpoints t1..t6 (duplicates kept when tau_f = 0).
    std::array<double, 6> breakpoints() const { return protocol_.breakpoints(); }

    /// Piecewise-quadratic form of the arm drive, one segment per protocol
    /// interval. Empty for an intrinsic dipole with a custom field profile.
    std::optional<std::vector<PolySegment>> arm_segments(Arm arm) const;
    std::optional<std::vector<PolySegment>> delta_segments() const;

private:
    CouplingChannel channel_;
    SplitProtocol protocol_;
    MaterialModel material_;
};

ModeForce mode_force(const CouplingChannel& channel, const SplitProtocol& protocol,
                     const MaterialModel& material);

}  // namespace sgp
