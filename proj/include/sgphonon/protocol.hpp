#pragma once

#include <array>
#include <string>
#include <string_view>

namespace sgp {

/// Interferometer arm. The value is the spin projection S = +1 (right) or -1 (left).
enum class Arm : int { Left = -1, Right = +1 };

constexpr double arm_sign(Arm arm) { return static_cast<double>(static_cast<int>(arm)); }

/// Five-step gradient schedule +eta, -eta, 0, -eta, +eta on a time axis
/// centred at maximum separation: t1 = -(2 tau_a + tau_f), t6 = -t1.
class SplitProtocol {
public:
    /// Throws DomainError unless tau_a > 0, tau_f >= 0, eta_b >= 0, mass > 0.
    SplitProtocol(double tau_a, double tau_f, double eta_b, double bias_field, double mass);

    /// Inverse design: 2 tau_f = flight_fraction * delta_t, tau_a = (delta_t - 2 tau_f) / 4,
    /// eta_b = M delta_x / (2 mu tau_a^2).
    static SplitProtocol from_target(double mass, double delta_x_max, double delta_t,
                                     double flight_fraction, double bias_field = 0.0);

    double tau_a() const { return tau_a_; }
    double tau_f() const { return tau_f_; }
    double eta_b() const { return eta_b_; }
    double bias_field() const { return bias_field_; }
    double mass() const { return mass_; }

    /// |a| = mu eta_b / M.
    double acceleration() const;
    /// 4 tau_a + 2 tau_f.
    double delta_t() const;
    /// 2 |a| tau_a^2.
    double delta_x_max() const;

    /// t1..t6 on the centred axis.
    std::array<double, 6> breakpoints() const;
    /// Interval durations {tau_a, tau_a, 2 tau_f, tau_a, tau_a}; exact, unlike
    /// differences of breakpoints.
    std::array<double, 5> segment_lengths() const { return {tau_a_, tau_a_, 2.0 * tau_f_, tau_a_, tau_a_}; }
    double start() const { return -(2.0 * tau_a_ + tau_f_); }
    double end() const { return 2.0 * tau_a_ + tau_f_; }

private:
    double tau_a_;
    double tau_f_;
    double eta_b_;
    double bias_field_;
    double mass_;
};

/// Index 0..4 of the interval containing t (right-continuous, t6 belongs to
/// the last interval), or -1 outside [t1, t6].
int segment_index(const SplitProtocol& protocol, double t);

/// b(t); zero outside the run.
double gradient_at(const SplitProtocol& protocol, double t);

struct Kinematics {
    double position = 0.0;
    double velocity = 0.0;
    double acceleration = 0.0;
    bool in_run = false;
};

/// Closed-form CoM position/velocity/acceleration of one arm. Outside the run
/// returns zeros with in_run = false.
Kinematics kinematics_at(const SplitProtocol& protocol, Arm arm, double t);

/// Same as kinematics_at, addressed as offset s from the start of interval
/// `segment` (0..4). Avoids rounding s through the centred time axis.
Kinematics kinematics_in_segment(const SplitProtocol& protocol, Arm arm, int segment, double s);

/// X_R(t) - X_L(t).
double separation_at(const SplitProtocol& protocol, double t);

struct GradientBudget {
    bool pass = false;
    double ratio = 0.0;  // eta_b / cap
};

/// Passes iff eta_b <= cap (inclusive). DomainError for cap <= 0.
GradientBudget check_gradient_budget(const SplitProtocol& protocol, double cap);

/// Accepts exactly one of {tau_a, tau_f, eta_b, B_0, mass} or
/// {mass, delta_x_max, delta_t, flight_fraction} (B_0 optional in the latter).
SplitProtocol protocol_from_json(std::string_view json_text);
/// Serializes the direct form.
std::string protocol_to_json(const SplitProtocol& protocol);

}  // namespace sgp
