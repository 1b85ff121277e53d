#pragma once

namespace sgp {

/// SI constants. CODATA values except the Bohr magneton and g-factor, which
/// follow the values quoted for the NV spin.
struct PhysicalConstants {
    double hbar = 1.054571817e-34;   // J s
    double k_b = 1.380649e-23;       // J/K
    double mu_0 = 1.25663706212e-6;  // T m/A
    double eps_0 = 8.8541878128e-12; // F/m
    double mu_b = 9.27e-24;          // J/T
    double g_lande = 2.0;

    /// Spin magnetic moment mu = g * mu_b.
    constexpr double mu() const { return g_lande * mu_b; }
};

inline constexpr PhysicalConstants kPhys{};

/// Mass of a carbon atom, used only for per-atom reporting.
inline constexpr double kCarbonMass = 1.994e-26;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace sgp
