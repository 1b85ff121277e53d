#include "sgphonon/protocol.hpp"

#include <cmath>

#include "json_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"

namespace sgp {

namespace {

constexpr double kSegmentGradient[5] = {1.0, -1.0, 0.0, -1.0, 1.0};

bool finite_all(std::initializer_list<double> values)
{
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

SplitProtocol::SplitProtocol(double tau_a, double tau_f, double eta_b, double bias_field, double mass)
    : tau_a_(tau_a), tau_f_(tau_f), eta_b_(eta_b), bias_field_(bias_field), mass_(mass)
{
    if (!finite_all({tau_a, tau_f, eta_b, bias_field, mass}))
        throw DomainError("protocol: parameters must be finite");
    if (!(tau_a > 0.0)) throw DomainError("protocol: tau_a must be > 0");
    if (!(tau_f >= 0.0)) throw DomainError("protocol: tau_f must be >= 0");
    if (!(eta_b >= 0.0)) throw DomainError("protocol: eta_b must be >= 0");
    if (!(mass > 0.0)) throw DomainError("protocol: mass must be > 0");
}

SplitProtocol SplitProtocol::from_target(double mass, double delta_x_max, double delta_t,
                                         double flight_fraction, double bias_field)
{
    if (!(delta_x_max >= 0.0)) throw DomainError("from_target: delta_x_max must be >= 0");
    if (!(delta_t > 0.0)) throw DomainError("from_target: delta_t must be > 0");
    if (!(flight_fraction >= 0.0 && flight_fraction < 1.0))
        throw DomainError("from_target: flight_fraction must lie in [0, 1)");
    if (!(mass > 0.0)) throw DomainError("from_target: mass must be > 0");
    const double flight = flight_fraction * delta_t;  // 2 tau_f
    const double tau_f = 0.5 * flight;
    const double tau_a = (delta_t - flight) / 4.0;
    const double eta_b = mass * delta_x_max / (2.0 * kPhys.mu() * tau_a * tau_a);
    return SplitProtocol(tau_a, tau_f, eta_b, bias_field, mass);
}

double SplitProtocol::acceleration() const
{
    return kPhys.mu() * eta_b_ / mass_;
}

double SplitProtocol::delta_t() const
{
    return 4.0 * tau_a_ + 2.0 * tau_f_;
}

double SplitProtocol::delta_x_max() const
{
    return 2.0 * acceleration() * tau_a_ * tau_a_;
}

std::array<double, 6> SplitProtocol::breakpoints() const
{
    return {-(2.0 * tau_a_ + tau_f_), -(tau_a_ + tau_f_), -tau_f_, tau_f_, tau_a_ + tau_f_,
            2.0 * tau_a_ + tau_f_};
}

int segment_index(const SplitProtocol& protocol, double t)
{
    const auto bp = protocol.breakpoints();
    if (!(t >= bp[0] && t <= bp[5])) return -1;
    for (int k = 4; k >= 0; --k)
        if (t >= bp[static_cast<std::size_t>(k)]) return k;
    return 0;
}

double gradient_at(const SplitProtocol& protocol, double t)
{
    const int k = segment_index(protocol, t);
    if (k < 0) return 0.0;
    return kSegmentGradient[k] * protocol.eta_b();
}

Kinematics kinematics_at(const SplitProtocol& protocol, Arm arm, double t)
{
    const int k = segment_index(protocol, t);
    if (k < 0) return {};
    const double a = arm_sign(arm) * protocol.acceleration();
    const double ta = protocol.tau_a();
    const double tf = protocol.tau_f();
    Kinematics out;
    out.in_run = true;
    out.acceleration = kSegmentGradient[k] * a;
    switch (k) {
    case 0: {
        const double s = t - protocol.start();
        out.position = 0.5 * a * s * s;
        out.velocity = a * s;
        break;
    }
    case 1: {
        const double s = t + tf;
        out.position = 0.5 * a * (2.0 * ta * ta - s * s);
        out.velocity = -a * s;
        break;
    }
    case 2:
        out.position = a * ta * ta;
        out.velocity = 0.0;
        break;
    case 3: {
        const double s = t - tf;
        out.position = 0.5 * a * (2.0 * ta * ta - s * s);
        out.velocity = -a * s;
        break;
    }
    default: {
        const double s = protocol.end() - t;
        out.position = 0.5 * a * s * s;
        out.velocity = -a * s;
        break;
    }
    }
    return out;
}

Kinematics kinematics_in_segment(const SplitProtocol& protocol, Arm arm, int segment, double s)
{
    if (segment < 0 || segment > 4) throw DomainError("kinematics_in_segment: segment must be 0..4");
    const double a = arm_sign(arm) * protocol.acceleration();
    const double ta = protocol.tau_a();
    Kinematics out;
    out.in_run = true;
    out.acceleration = kSegmentGradient[segment] * a;
    switch (segment) {
    case 0:
        out.position = 0.5 * a * s * s;
        out.velocity = a * s;
        break;
    case 1: {
        const double r = ta - s;  // time left until the hold
        out.position = a * ta * ta - 0.5 * a * r * r;
        out.velocity = a * r;
        break;
    }
    case 2:
        out.position = a * ta * ta;
        break;
    case 3:
        out.position = a * ta * ta - 0.5 * a * s * s;
        out.velocity = -a * s;
        break;
    default: {
        const double r = ta - s;  // time left in the run
        out.position = 0.5 * a * r * r;
        out.velocity = -a * r;
        break;
    }
    }
    return out;
}

double separation_at(const SplitProtocol& protocol, double t)
{
    return kinematics_at(protocol, Arm::Right, t).position - kinematics_at(protocol, Arm::Left, t).position;
}

GradientBudget check_gradient_budget(const SplitProtocol& protocol, double cap)
{
    if (!(cap > 0.0)) throw DomainError("gradient budget: cap must be > 0");
    return {protocol.eta_b() <= cap, protocol.eta_b() / cap};
}

SplitProtocol protocol_from_json(std::string_view json_text)
{
    constexpr std::string_view what = "protocol";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    const bool direct = j.contains("tau_a") || j.contains("tau_f") || j.contains("eta_b");
    const bool target = j.contains("delta_x_max") || j.contains("delta_t") || j.contains("flight_fraction");
    if (direct == target)
        throw ConfigError("protocol: give exactly one of {tau_a, tau_f, eta_b, B_0, mass} or "
                          "{mass, delta_x_max, delta_t, flight_fraction}");
    try {
        if (direct) {
            detail::reject_unknown(j, {"tau_a", "tau_f", "eta_b", "B_0", "mass"}, what);
            return SplitProtocol(detail::get_number(j, "tau_a", what), detail::get_number(j, "tau_f", what),
                                 detail::get_number(j, "eta_b", what),
                                 detail::get_number_or(j, "B_0", 0.0, what),
                                 detail::get_number(j, "mass", what));
        }
        detail::reject_unknown(j, {"mass", "delta_x_max", "delta_t", "flight_fraction", "B_0"}, what);
        return SplitProtocol::from_target(detail::get_number(j, "mass", what),
                                          detail::get_number(j, "delta_x_max", what),
                                          detail::get_number(j, "delta_t", what),
                                          detail::get_number_or(j, "flight_fraction", 0.0, what),
                                          detail::get_number_or(j, "B_0", 0.0, what));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("protocol: ") + e.what());
    }
}

std::string protocol_to_json(const SplitProtocol& p)
{
    nlohmann::json j{{"tau_a", p.tau_a()},
                     {"tau_f", p.tau_f()},
                     {"eta_b", p.eta_b()},
                     {"B_0", p.bias_field()},
                     {"mass", p.mass()}};
    return j.dump();
}

}  // namespace sgp
