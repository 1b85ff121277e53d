#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sgphonon/forces.hpp"
#include "sgphonon/materials.hpp"
#include "sgphonon/protocol.hpp"

namespace sgp {

/// Protocol shape factor sin(tau_f w) - 2 sin((tau_a + tau_f) w) + sin((2 tau_a + tau_f) w).
double gamma_factor(double omega, double tau_a, double tau_f);

/// |Delta f_s(omega)|^2 = M (2 DX_m / (tau_a^2 omega))^2 Gamma^2.
double transfer_spin_sq(const SplitProtocol& protocol, double omega);

/// |Delta f_dia(omega)|^2 = M^5 (chi DX_m^3 / (2 mu_0 mu^2 tau_a^6 omega^3))^2 Gamma^2.
/// Exact for tau_f = 0 (and for the held-gradient force at any tau_f).
double transfer_dia_sq(const SplitProtocol& protocol, const MaterialModel& material, double omega);

/// |Delta f_dp(omega)|^2 of the induced dipole derived from the per-atom
/// force: (6 eps_0 V (eps_r - 1) / (eps_r (eps_r + 2)))^2 eta_e^4
/// (2 DX_m Gamma / (tau_a^2 omega^3))^2 / M.
double transfer_induced_dipole_sq(const SplitProtocol& protocol, const MaterialModel& material,
                                  double omega, double eta_e);

/// Squared factor of the order-of-magnitude dipole estimate,
/// |3 V DX_m eta_e^2 / (tau_a^2 omega^3) eps_0 (eps_r - 1) / (eps_r (eps_r + 2)) Gamma|^2.
/// `gamma_sq` replaces Gamma^2 when non-negative.
double dipole_estimate_factor(const SplitProtocol& protocol, const MaterialModel& material,
                              double omega, double eta_e, double gamma_sq = -1.0);

/// ln C_q = -coth(hbar omega / 2 k_B T) / (4 hbar omega) * transfer_sq (<= 0).
double mode_ln_contrast(double transfer_sq, double omega, double temperature);

enum class GammaTreatment {
    Exact,  // Gamma(omega_q)^2 per mode
    Unit,   // Gamma^2 -> 1 envelope
};

enum class Fidelity {
    Exact,             // closed form equals the time-domain force's transform
    PaperApproximate,  // dia with tau_f > 0: literal force differs from the closed form
    Envelope,          // Gamma^2 replaced by 1
    Estimate,          // order-of-magnitude dipole estimate
};

std::string fidelity_name(Fidelity fidelity);

struct ContrastOptions {
    TruncationPolicy truncation = TruncationPolicy::adaptive();
    GammaTreatment gamma = GammaTreatment::Exact;
    bool keep_per_mode = true;
};

struct ModeContribution {
    std::size_t n = 0;
    double omega = 0.0;
    double ln_c = 0.0;
};

struct ContrastReport {
    ChannelKind channel = ChannelKind::SpinMagnetic;
    std::string label;             // channel name, or "combined"
    std::vector<ModeContribution> per_mode;
    double ln_contrast_total = 0.0;
    std::size_t modes_used = 0;
    bool converged = true;
    double tail_bound = 0.0;       // bound on the neglected -lnC tail
    Fidelity fidelity = Fidelity::Exact;
    double omega0 = 0.0;
    double temperature = 0.0;
    // Protocol echo.
    double mass = 0.0;
    double tau_a = 0.0;
    double tau_f = 0.0;
    double eta_b = 0.0;
    double delta_x_max = 0.0;
    double delta_t = 0.0;

    double contrast() const;
    double neg_ln_contrast() const { return -ln_contrast_total; }
};

/// -lnC = sum_q coth M DX_m^2 Gamma^2 / (tau_a^4 omega^3 hbar).
ContrastReport ln_contrast_spin(const SplitProtocol& protocol, const MaterialModel& material,
                                double temperature, const ContrastOptions& options = {});

/// -lnC = sum_q coth chi^2 M^5 DX_m^6 Gamma^2 / (16 mu_0^2 mu^4 hbar tau_a^12 omega^7).
ContrastReport ln_contrast_dia(const SplitProtocol& protocol, const MaterialModel& material,
                               double temperature, const ContrastOptions& options = {});

/// Dipole estimate: -lnC = sum_q coth / (hbar omega) * dipole_estimate_factor.
ContrastReport ln_contrast_induced_dipole(const SplitProtocol& protocol,
                                          const MaterialModel& material, double temperature,
                                          double eta_e, const ContrastOptions& options = {});

/// Induced dipole through mode_ln_contrast(transfer_induced_dipole_sq).
ContrastReport ln_contrast_induced_dipole_pipeline(const SplitProtocol& protocol,
                                                   const MaterialModel& material,
                                                   double temperature, double eta_e,
                                                   const ContrastOptions& options = {});

/// mode_ln_contrast composed with the channel's transfer function, summed.
/// Spin, dia and induced dipole (pipeline form) only.
ContrastReport ln_contrast_pipeline(const CouplingChannel& channel, const SplitProtocol& protocol,
                                    const MaterialModel& material, double temperature,
                                    const ContrastOptions& options = {});

/// Dispatches to the closed form of the channel. The intrinsic dipole has no
/// closed form and yields C = 1 for linear fields; for custom fields use the
/// oracle's numeric transfer.
ContrastReport ln_contrast(const CouplingChannel& channel, const SplitProtocol& protocol,
                           const MaterialModel& material, double temperature,
                           const ContrastOptions& options = {});

/// Sum of per-channel reports, labelled "combined".
ContrastReport combine_reports(const std::vector<ContrastReport>& reports);

enum class Regime { HighTemperature, LowTemperature };

/// Fundamental-tone limits with Gamma^2 -> 1, returned as -lnC (>= 0).
/// Spin and dia only; DomainError otherwise.
double asymptotic_neg_ln_contrast(ChannelKind channel, Regime regime,
                                  const SplitProtocol& protocol, const MaterialModel& material,
                                  double temperature);
Regime parse_regime(const std::string& name);

/// {channel, ln_contrast_total, contrast, modes_used, per_mode: [{n, omega, ln_c}], fidelity_flag}
/// plus converged, tail_bound, temperature and a protocol echo.
std::string report_to_json(const ContrastReport& report, int indent = -1);

}  // namespace sgp
