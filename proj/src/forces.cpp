#include "sgphonon/forces.hpp"

#include <cmath>

#include "json_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"

namespace sgp {

namespace {

constexpr double kSegmentGradient[5] = {1.0, -1.0, 0.0, -1.0, 1.0};

// (2 / eps_r) * N alpha: the atom count cancels.
double induced_total_coefficient(const MaterialModel& material, double mass)
{
    const double volume = mass / material.density;
    const double n_alpha = 3.0 * kPhys.eps_0 * volume * (material.dielectric - 1.0) / (material.dielectric + 2.0);
    return 2.0 * n_alpha / material.dielectric;
}

}  // namespace

std::string channel_name(ChannelKind kind)
{
    switch (kind) {
    case ChannelKind::SpinMagnetic: return "spin";
    case ChannelKind::Diamagnetic: return "dia";
    case ChannelKind::InducedDipole: return "induced_dipole";
    case ChannelKind::IntrinsicDipole: return "intrinsic_dipole";
    }
    return "unknown";
}

ChannelKind parse_channel_kind(std::string_view name)
{
    if (name == "spin") return ChannelKind::SpinMagnetic;
    if (name == "dia" || name == "diamagnetic") return ChannelKind::Diamagnetic;
    if (name == "induced_dipole" || name == "dipole") return ChannelKind::InducedDipole;
    if (name == "intrinsic_dipole") return ChannelKind::IntrinsicDipole;
    throw ConfigError("unknown channel '" + std::string(name) + "'");
}

CouplingChannel CouplingChannel::spin()
{
    return {};
}

CouplingChannel CouplingChannel::diamagnetic(DiamagneticGating gating)
{
    CouplingChannel c;
    c.kind = ChannelKind::Diamagnetic;
    c.gating = gating;
    return c;
}

CouplingChannel CouplingChannel::induced_dipole(double e0, double eta_e)
{
    CouplingChannel c;
    c.kind = ChannelKind::InducedDipole;
    c.e0 = e0;
    c.eta_e = eta_e;
    return c;
}

CouplingChannel CouplingChannel::intrinsic_dipole(double d0, double e0, double eta_e)
{
    CouplingChannel c;
    c.kind = ChannelKind::IntrinsicDipole;
    c.d0 = d0;
    c.e0 = e0;
    c.eta_e = eta_e;
    return c;
}

void CouplingChannel::validate() const
{
    if (!std::isfinite(e0) || !std::isfinite(eta_e) || !std::isfinite(d0))
        throw DomainError("channel parameters must be finite");
    if (kind == ChannelKind::IntrinsicDipole && d0 == 0.0)
        throw DomainError("intrinsic dipole channel needs a nonzero d_0");
}

CouplingChannel channel_from_json(std::string_view json_text)
{
    constexpr std::string_view what = "channel";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    detail::reject_unknown(j, {"kind", "E_0", "eta_e", "d_0"}, what);
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("channel: missing string field 'kind'");
    CouplingChannel c;
    c.kind = parse_channel_kind(j["kind"].get<std::string>());
    const bool dipole = c.kind == ChannelKind::InducedDipole || c.kind == ChannelKind::IntrinsicDipole;
    if (!dipole && (j.contains("E_0") || j.contains("eta_e") || j.contains("d_0")))
        throw ConfigError("channel: field parameters only apply to dipole channels");
    if (c.kind == ChannelKind::InducedDipole && j.contains("d_0"))
        throw ConfigError("channel: d_0 only applies to the intrinsic dipole");
    if (dipole && !j.contains("eta_e")) throw ConfigError("channel: dipole channels need 'eta_e'");
    if (c.kind == ChannelKind::IntrinsicDipole && !j.contains("d_0"))
        throw ConfigError("channel: intrinsic dipole needs 'd_0'");
    c.e0 = detail::get_number_or(j, "E_0", 0.0, what);
    c.eta_e = detail::get_number_or(j, "eta_e", 0.0, what);
    c.d0 = detail::get_number_or(j, "d_0", 0.0, what);
    try {
        c.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("channel: ") + e.what());
    }
    return c;
}

std::string channel_to_json(const CouplingChannel& c)
{
    nlohmann::json j{{"kind", channel_name(c.kind)}};
    if (c.kind == ChannelKind::InducedDipole || c.kind == ChannelKind::IntrinsicDipole) {
        j["E_0"] = c.e0;
        j["eta_e"] = c.eta_e;
    }
    if (c.kind == ChannelKind::IntrinsicDipole) j["d_0"] = c.d0;
    return j.dump();
}

double spin_force(const SplitProtocol& protocol, Arm arm, double t)
{
    return kPhys.mu() * arm_sign(arm) * gradient_at(protocol, t);
}

double diamagnetic_force_total(const SplitProtocol& protocol, const MaterialModel& material, Arm arm,
                               double t)
{
    const double b = gradient_at(protocol, t);
    const double x = kinematics_at(protocol, arm, t).position;
    return material.susceptibility * protocol.mass() / kPhys.mu_0 * (protocol.bias_field() * b + b * b * x);
}

double per_atom_partition(double total_force, std::size_t atoms)
{
    if (atoms == 0) throw DomainError("per_atom_partition: need at least one atom");
    return total_force / static_cast<double>(atoms);
}

double atom_count(double mass)
{
    if (!(mass > 0.0)) throw DomainError("atom_count: mass must be > 0");
    return mass / kCarbonMass;
}

double polarizability(double eps_r, double volume, double atoms)
{
    if (!(eps_r > 1.0)) throw DomainError("polarizability: eps_r must be > 1");
    if (!(volume > 0.0)) throw DomainError("polarizability: volume must be > 0");
    if (!(atoms > 0.0)) throw DomainError("polarizability: atom count must be > 0");
    return 3.0 * kPhys.eps_0 * volume / atoms * (eps_r - 1.0) / (eps_r + 2.0);
}

double induced_dipole_force(const SplitProtocol& protocol, const MaterialModel& material, Arm arm,
                            double t, double e0, double eta_e)
{
    const double volume = protocol.mass() / material.density;
    const double alpha = polarizability(material.dielectric, volume, atom_count(protocol.mass()));
    const double x = kinematics_at(protocol, arm, t).position;
    return 2.0 * alpha / material.dielectric * (e0 * eta_e + eta_e * eta_e * x);
}

double induced_dipole_force_total(const SplitProtocol& protocol, const MaterialModel& material,
                                  Arm arm, double t, double e0, double eta_e)
{
    const double x = kinematics_at(protocol, arm, t).position;
    return induced_total_coefficient(material, protocol.mass()) * (e0 * eta_e + eta_e * eta_e * x);
}

ModeForce::ModeForce(CouplingChannel channel, SplitProtocol protocol, MaterialModel material)
    : channel_(std::move(channel)), protocol_(protocol), material_(std::move(material))
{
    channel_.validate();
    material_.validate();
}

double ModeForce::arm(Arm arm, double t) const
{
    const double root_mass = std::sqrt(protocol_.mass());
    switch (channel_.kind) {
    case ChannelKind::SpinMagnetic:
        return spin_force(protocol_, arm, t) / root_mass;
    case ChannelKind::Diamagnetic: {
        if (channel_.gating == DiamagneticGating::Literal)
            return diamagnetic_force_total(protocol_, material_, arm, t) / root_mass;
        if (segment_index(protocol_, t) < 0) return 0.0;
        const double b = gradient_at(protocol_, t);
        const double eta = protocol_.eta_b();
        const double x = kinematics_at(protocol_, arm, t).position;
        return material_.susceptibility * protocol_.mass() / kPhys.mu_0 *
               (protocol_.bias_field() * b + eta * eta * x) / root_mass;
    }
    case ChannelKind::InducedDipole:
        return induced_dipole_force_total(protocol_, material_, arm, t, channel_.e0, channel_.eta_e) / root_mass;
    case ChannelKind::IntrinsicDipole: {
        const double x = kinematics_at(protocol_, arm, t).position;
        const double slope = channel_.field_derivative ? channel_.field_derivative(x) : channel_.eta_e;
        return channel_.d0 * slope / root_mass;
    }
    }
    return 0.0;
}

double ModeForce::delta(double t) const
{
    const double root_mass = std::sqrt(protocol_.mass());
    const auto separation = [&] {
        return kinematics_at(protocol_, Arm::Right, t).position - kinematics_at(protocol_, Arm::Left, t).position;
    };
    switch (channel_.kind) {
    case ChannelKind::Diamagnetic: {
        if (segment_index(protocol_, t) < 0) return 0.0;
        const double b = gradient_at(protocol_, t);
        const double eta = protocol_.eta_b();
        const double b2 = channel_.gating == DiamagneticGating::Literal ? b * b : eta * eta;
        return material_.susceptibility * protocol_.mass() / kPhys.mu_0 * b2 * separation() / root_mass;
    }
    case ChannelKind::InducedDipole:
        return induced_total_coefficient(material_, protocol_.mass()) * channel_.eta_e * channel_.eta_e *
               separation() / root_mass;
    case ChannelKind::IntrinsicDipole:
        if (!channel_.field_derivative) return 0.0;
        break;
    case ChannelKind::SpinMagnetic:
        break;
    }
    return arm(Arm::Right, t) - arm(Arm::Left, t);
}

double ModeForce::delta_in_segment(int segment, double s) const
{
    const auto right = kinematics_in_segment(protocol_, Arm::Right, segment, s);
    const auto left = kinematics_in_segment(protocol_, Arm::Left, segment, s);
    const double root_mass = std::sqrt(protocol_.mass());
    const double eta = protocol_.eta_b();
    const double b = kSegmentGradient[segment] * eta;
    switch (channel_.kind) {
    case ChannelKind::SpinMagnetic:
        return 2.0 * kPhys.mu() * b / root_mass;
    case ChannelKind::Diamagnetic: {
        const double b2 = channel_.gating == DiamagneticGating::Literal ? b * b : eta * eta;
        return material_.susceptibility * protocol_.mass() / kPhys.mu_0 * b2 * (right.position - left.position) /
               root_mass;
    }
    case ChannelKind::InducedDipole:
        return induced_total_coefficient(material_, protocol_.mass()) * channel_.eta_e * channel_.eta_e *
               (right.position - left.position) / root_mass;
    case ChannelKind::IntrinsicDipole:
        if (!channel_.field_derivative) return 0.0;
        return channel_.d0 * (channel_.field_derivative(right.position) - channel_.field_derivative(left.position)) /
               root_mass;
    }
    return 0.0;
}

namespace {

// Piecewise-quadratic force on one arm. Without `common`, terms that are the
// same on both arms (bias field, E_0) are dropped; they cancel in R - L.
std::vector<PolySegment> build_segments(const ModeForce& force, Arm arm, bool common)
{
    const auto& channel = force.channel();
    const auto& protocol = force.protocol();
    const auto& material = force.material();
    const auto bp = protocol.breakpoints();
    const double root_mass = std::sqrt(protocol.mass());
    const double a = arm_sign(arm) * protocol.acceleration();
    const double eta = protocol.eta_b();
    const double keep = common ? 1.0 : 0.0;
    std::vector<PolySegment> out;
    out.reserve(5);
    for (std::size_t k = 0; k < 5; ++k) {
        PolySegment seg;
        seg.begin = bp[k];
        seg.end = bp[k + 1];
        const auto kin = kinematics_at(protocol, arm, bp[k]);
        const double x0 = kin.position;
        const double v0 = kin.velocity;
        const double acc = kSegmentGradient[k] * a;
        const double b = kSegmentGradient[k] * eta;
        switch (channel.kind) {
        case ChannelKind::SpinMagnetic:
            seg.coeffs = {kPhys.mu() * arm_sign(arm) * b / root_mass, 0.0, 0.0};
            break;
        case ChannelKind::Diamagnetic: {
            const double g = material.susceptibility * protocol.mass() / kPhys.mu_0 / root_mass;
            const double b2 = channel.gating == DiamagneticGating::Literal ? b * b : eta * eta;
            seg.coeffs = {g * (keep * protocol.bias_field() * b + b2 * x0), g * b2 * v0, g * b2 * 0.5 * acc};
            break;
        }
        case ChannelKind::InducedDipole: {
            const double k_tot = induced_total_coefficient(material, protocol.mass()) / root_mass;
            const double e2 = channel.eta_e * channel.eta_e;
            seg.coeffs = {k_tot * (keep * channel.e0 * channel.eta_e + e2 * x0), k_tot * e2 * v0,
                          k_tot * e2 * 0.5 * acc};
            break;
        }
        case ChannelKind::IntrinsicDipole:
            seg.coeffs = {keep * channel.d0 * channel.eta_e / root_mass, 0.0, 0.0};
            break;
        }
        out.push_back(seg);
    }
    return out;
}

}  // namespace

std::optional<std::vector<PolySegment>> ModeForce::arm_segments(Arm arm) const
{
    if (channel_.kind == ChannelKind::IntrinsicDipole && channel_.field_derivative) return std::nullopt;
    return build_segments(*this, arm, true);
}

std::optional<std::vector<PolySegment>> ModeForce::delta_segments() const
{
    if (channel_.kind == ChannelKind::IntrinsicDipole && channel_.field_derivative) return std::nullopt;
    auto right = build_segments(*this, Arm::Right, false);
    const auto left = build_segments(*this, Arm::Left, false);
    for (std::size_t k = 0; k < right.size(); ++k)
        for (std::size_t c = 0; c < 3; ++c) right[k].coeffs[c] -= left[k].coeffs[c];
    return right;
}

ModeForce mode_force(const CouplingChannel& channel, const SplitProtocol& protocol,
                     const MaterialModel& material)
{
    return ModeForce(channel, protocol, material);
}

}  // namespace sgp
