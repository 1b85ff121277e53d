#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace sgp {

/// Bulk material parameters of the test mass.
struct MaterialModel {
    std::string name;
    double density = 0.0;         // kg/m^3
    double sound_speed = 0.0;     // m/s
    double susceptibility = 0.0;  // mass susceptibility chi_rho, m^3/kg
    double dielectric = 0.0;      // relative permittivity eps_r

    /// Throws DomainError unless density > 0, sound_speed > 0 and dielectric > 1.
    void validate() const;

    static MaterialModel diamond();
};

/// Parses {name, density, sound_speed, susceptibility, dielectric}. All fields
/// are required and unknown fields are rejected (ConfigError).
MaterialModel material_from_json(std::string_view json_text);
std::string material_to_json(const MaterialModel& material);

/// Resolves a preset name ("diamond") or a path to a JSON material file.
MaterialModel load_material(std::string_view name_or_path);

/// Side of the cube of mass M: L = (M / rho)^(1/3).
double cube_side(double mass, const MaterialModel& material);

/// Lowest chain mode, omega_0 = pi c / L (rad/s).
double fundamental_tone(double side, double sound_speed);

/// fundamental_tone(cube_side(M), c).
double fundamental_tone_for_mass(double mass, const MaterialModel& material);

struct TruncationPolicy {
    enum class Kind { Fixed, Adaptive };

    Kind kind = Kind::Adaptive;
    std::size_t modes = 0;       // Fixed: exact count. Adaptive: unused.
    double tolerance = 1e-12;    // Adaptive: relative tail bound.
    std::size_t cap = 100000;    // Adaptive: hard limit on the count.

    static TruncationPolicy fixed(std::size_t modes);
    static TruncationPolicy adaptive(double tolerance = 1e-12, std::size_t cap = 100000);
};

/// Result of summing a per-mode quantity over the harmonic ladder.
struct LadderSum {
    double total = 0.0;
    std::size_t modes_used = 0;
    bool converged = true;
    double tail_bound = 0.0;     // bound on the neglected tail, absolute
    std::vector<double> terms;   // terms[n-1] for mode n
};

/// Harmonic ladder omega_n = n * omega_0 of the 1D chain.
class ModeLadder {
public:
    /// Per-mode term, called with (n, omega_n).
    using Term = std::function<double(std::size_t, double)>;

    ModeLadder(double omega0, TruncationPolicy policy);

    double omega0() const { return omega0_; }
    const TruncationPolicy& policy() const { return policy_; }

    /// omega_n = n * omega_0 (n >= 1).
    double frequency(std::size_t n) const { return static_cast<double>(n) * omega0_; }

    /// Frequencies 1..N for a fixed policy; for an adaptive policy the first
    /// `count` harmonics (DomainError if count is 0).
    std::vector<double> frequencies(std::size_t count = 0) const;

    /// Sums term(n, omega_n). Under an adaptive policy the sum stops at the
    /// first N where envelope(N) * N / (decay - 1) <= tolerance * |sum|:
    /// `envelope` must bound |term| and decay at least like n^-decay.
    LadderSum accumulate(const Term& term, const Term& envelope, double decay) const;

private:
    double omega0_;
    TruncationPolicy policy_;
};

/// Builds a ladder; DomainError when omega0 <= 0 or a fixed policy asks for 0 modes.
ModeLadder mode_ladder(double omega0, TruncationPolicy policy);

}  // namespace sgp
