#include "sgphonon/contrast.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/numerics.hpp"

namespace sgp {

namespace {

// sin(omega * (x + y)) with the rounding error of x + y and of the product
// folded back in.
double sin_of_sum(double omega, double x, double y)
{
    const double s = x + y;
    const double bb = s - x;
    const double err = (x - (s - bb)) + (y - bb);
    return num::sincos_product(omega, s, omega * err).sin;
}

double coth_factor(double omega, double temperature)
{
    if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
    if (temperature == 0.0) return 1.0;
    return num::coth(kPhys.hbar * omega / (2.0 * kPhys.k_b * temperature));
}

void require_omega(double omega)
{
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("omega must be > 0");
}

double gamma_sq_for(const ContrastOptions& options, const SplitProtocol& p, double omega)
{
    if (options.gamma == GammaTreatment::Unit) return 1.0;
    const double g = gamma_factor(omega, p.tau_a(), p.tau_f());
    return g * g;
}

double gamma_sq_bound(const ContrastOptions& options)
{
    return options.gamma == GammaTreatment::Unit ? 1.0 : 16.0;
}

ContrastReport make_report(ChannelKind kind, const SplitProtocol& p, const MaterialModel& material,
                           double temperature, const ContrastOptions& options,
                           const ModeLadder::Term& neg_term, const ModeLadder::Term& neg_envelope,
                           double decay, Fidelity fidelity)
{
    material.validate();
    if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be finite and >= 0");
    const double omega0 = fundamental_tone_for_mass(p.mass(), material);
    const ModeLadder ladder = mode_ladder(omega0, options.truncation);
    const LadderSum sum = ladder.accumulate(neg_term, neg_envelope, decay);

    ContrastReport r;
    r.channel = kind;
    r.label = channel_name(kind);
    r.ln_contrast_total = -sum.total;
    r.modes_used = sum.modes_used;
    r.converged = sum.converged;
    r.tail_bound = sum.tail_bound;
    r.fidelity = options.gamma == GammaTreatment::Unit && fidelity == Fidelity::Exact ? Fidelity::Envelope : fidelity;
    r.omega0 = omega0;
    r.temperature = temperature;
    r.mass = p.mass();
    r.tau_a = p.tau_a();
    r.tau_f = p.tau_f();
    r.eta_b = p.eta_b();
    r.delta_x_max = p.delta_x_max();
    r.delta_t = p.delta_t();
    if (options.keep_per_mode) {
        r.per_mode.reserve(sum.terms.size());
        for (std::size_t i = 0; i < sum.terms.size(); ++i)
            r.per_mode.push_back({i + 1, ladder.frequency(i + 1), -sum.terms[i]});
    }
    return r;
}

// chi^2 M^5 DX^6 / (16 mu_0^2 mu^4 hbar tau_a^12), arranged to stay in range.
double dia_prefactor(const SplitProtocol& p, const MaterialModel& m)
{
    const double mu = kPhys.mu();
    const double dx = p.delta_x_max();
    const double ta2 = p.tau_a() * p.tau_a();
    const double inner = m.susceptibility * p.mass() * p.mass() * std::sqrt(p.mass()) * dx * dx * dx /
                         (4.0 * kPhys.mu_0 * mu * mu * ta2 * ta2 * ta2);
    return inner * inner / kPhys.hbar;
}

double dipole_coefficient(const SplitProtocol& p, const MaterialModel& m, double eta_e)
{
    const double volume = p.mass() / m.density;
    const double er = m.dielectric;
    return 3.0 * volume * p.delta_x_max() * eta_e * eta_e / (p.tau_a() * p.tau_a()) * kPhys.eps_0 * (er - 1.0) /
           (er * (er + 2.0));
}

}  // namespace

double gamma_factor(double omega, double tau_a, double tau_f)
{
    // sin(A) + sin(C) = 2 sin(B) cos(tau_a omega) turns the three-sine
    // combination into -4 sin(B) sin^2(tau_a omega / 2), free of cancellation.
    const double b = sin_of_sum(omega, tau_a, tau_f);
    const double h = num::sincos_product(0.5 * omega, tau_a).sin;
    return -4.0 * b * h * h;
}

double transfer_spin_sq(const SplitProtocol& p, double omega)
{
    require_omega(omega);
    const double g = gamma_factor(omega, p.tau_a(), p.tau_f());
    const double amp = 2.0 * p.delta_x_max() / (p.tau_a() * p.tau_a() * omega);
    return p.mass() * amp * amp * g * g;
}

double transfer_dia_sq(const SplitProtocol& p, const MaterialModel& m, double omega)
{
    require_omega(omega);
    const double mu = kPhys.mu();
    const double dx = p.delta_x_max();
    const double ta2 = p.tau_a() * p.tau_a();
    const double g = gamma_factor(omega, p.tau_a(), p.tau_f());
    const double amp = m.susceptibility * dx * dx * dx /
                       (2.0 * kPhys.mu_0 * mu * mu * ta2 * ta2 * ta2 * omega * omega * omega);
    const double root = p.mass() * p.mass() * std::sqrt(p.mass()) * amp * g;
    return root * root;
}

double transfer_induced_dipole_sq(const SplitProtocol& p, const MaterialModel& m, double omega,
                                  double eta_e)
{
    require_omega(omega);
    const double volume = p.mass() / m.density;
    const double er = m.dielectric;
    const double k = 6.0 * kPhys.eps_0 * volume * (er - 1.0) / (er * (er + 2.0)) * eta_e * eta_e;
    const double g = gamma_factor(omega, p.tau_a(), p.tau_f());
    const double ft = 2.0 * p.delta_x_max() * g / (p.tau_a() * p.tau_a() * omega * omega * omega);
    return k * k * ft * ft / p.mass();
}

double dipole_estimate_factor(const SplitProtocol& p, const MaterialModel& m, double omega,
                              double eta_e, double gamma_sq)
{
    require_omega(omega);
    double g2 = gamma_sq;
    if (g2 < 0.0) {
        const double g = gamma_factor(omega, p.tau_a(), p.tau_f());
        g2 = g * g;
    }
    const double c = dipole_coefficient(p, m, eta_e) / (omega * omega * omega);
    return c * c * g2;
}

double mode_ln_contrast(double transfer_sq, double omega, double temperature)
{
    require_omega(omega);
    if (!(transfer_sq >= 0.0)) throw DomainError("transfer_sq must be >= 0");
    return -coth_factor(omega, temperature) / (4.0 * kPhys.hbar * omega) * transfer_sq;
}

std::string fidelity_name(Fidelity fidelity)
{
    switch (fidelity) {
    case Fidelity::Exact: return "exact";
    case Fidelity::PaperApproximate: return "paper-approximate";
    case Fidelity::Envelope: return "envelope";
    case Fidelity::Estimate: return "estimate";
    }
    return "unknown";
}

double ContrastReport::contrast() const
{
    return std::exp(ln_contrast_total);
}

ContrastReport ln_contrast_spin(const SplitProtocol& p, const MaterialModel& material,
                                double temperature, const ContrastOptions& options)
{
    const double dx = p.delta_x_max();
    const double ta2 = p.tau_a() * p.tau_a();
    const double pref = p.mass() * dx * dx / (ta2 * ta2 * kPhys.hbar);
    auto term = [&](std::size_t, double w) {
        return coth_factor(w, temperature) * pref * gamma_sq_for(options, p, w) / (w * w * w);
    };
    auto env = [&](std::size_t, double w) {
        return coth_factor(w, temperature) * pref * gamma_sq_bound(options) / (w * w * w);
    };
    return make_report(ChannelKind::SpinMagnetic, p, material, temperature, options, term, env, 3.0,
                       Fidelity::Exact);
}

ContrastReport ln_contrast_dia(const SplitProtocol& p, const MaterialModel& material,
                               double temperature, const ContrastOptions& options)
{
    const double pref = dia_prefactor(p, material);
    auto w7 = [](double w) {
        const double w2 = w * w;
        return w2 * w2 * w2 * w;
    };
    auto term = [&](std::size_t, double w) {
        return coth_factor(w, temperature) * pref * gamma_sq_for(options, p, w) / w7(w);
    };
    auto env = [&](std::size_t, double w) {
        return coth_factor(w, temperature) * pref * gamma_sq_bound(options) / w7(w);
    };
    const Fidelity f = p.tau_f() > 0.0 ? Fidelity::PaperApproximate : Fidelity::Exact;
    return make_report(ChannelKind::Diamagnetic, p, material, temperature, options, term, env, 7.0, f);
}

ContrastReport ln_contrast_induced_dipole(const SplitProtocol& p, const MaterialModel& material,
                                          double temperature, double eta_e,
                                          const ContrastOptions& options)
{
    auto term = [&](std::size_t, double w) {
        return coth_factor(w, temperature) / (kPhys.hbar * w) *
               dipole_estimate_factor(p, material, w, eta_e, gamma_sq_for(options, p, w));
    };
    auto env = [&](std::size_t, double w) {
        return coth_factor(w, temperature) / (kPhys.hbar * w) *
               dipole_estimate_factor(p, material, w, eta_e, gamma_sq_bound(options));
    };
    auto r = make_report(ChannelKind::InducedDipole, p, material, temperature, options, term, env, 7.0,
                         Fidelity::Estimate);
    return r;
}

ContrastReport ln_contrast_induced_dipole_pipeline(const SplitProtocol& p,
                                                   const MaterialModel& material,
                                                   double temperature, double eta_e,
                                                   const ContrastOptions& options)
{
    auto base = [&](double w) {
        const double volume = p.mass() / material.density;
        const double er = material.dielectric;
        const double k = 6.0 * kPhys.eps_0 * volume * (er - 1.0) / (er * (er + 2.0)) * eta_e * eta_e;
        const double ft = 2.0 * p.delta_x_max() / (p.tau_a() * p.tau_a() * w * w * w);
        return k * k * ft * ft / p.mass();
    };
    auto term = [&](std::size_t, double w) {
        if (options.gamma == GammaTreatment::Unit) return -mode_ln_contrast(base(w), w, temperature);
        return -mode_ln_contrast(transfer_induced_dipole_sq(p, material, w, eta_e), w, temperature);
    };
    auto env = [&](std::size_t, double w) {
        return -mode_ln_contrast(base(w) * gamma_sq_bound(options), w, temperature);
    };
    return make_report(ChannelKind::InducedDipole, p, material, temperature, options, term, env, 7.0,
                       Fidelity::Exact);
}

ContrastReport ln_contrast_pipeline(const CouplingChannel& channel, const SplitProtocol& p,
                                    const MaterialModel& material, double temperature,
                                    const ContrastOptions& options)
{
    channel.validate();
    if (channel.kind == ChannelKind::InducedDipole)
        return ln_contrast_induced_dipole_pipeline(p, material, temperature, channel.eta_e, options);
    if (channel.kind == ChannelKind::IntrinsicDipole)
        throw DomainError("intrinsic dipole has no closed-form transfer function");
    const bool spin = channel.kind == ChannelKind::SpinMagnetic;
    // Transfer with Gamma^2 removed, for the envelope and the unit treatment.
    auto base = [&](double w) {
        const double ta2 = p.tau_a() * p.tau_a();
        const double dx = p.delta_x_max();
        if (spin) {
            const double amp = 2.0 * dx / (ta2 * w);
            return p.mass() * amp * amp;
        }
        const double mu = kPhys.mu();
        const double amp = material.susceptibility * dx * dx * dx /
                           (2.0 * kPhys.mu_0 * mu * mu * ta2 * ta2 * ta2 * w * w * w);
        const double root = p.mass() * p.mass() * std::sqrt(p.mass()) * amp;
        return root * root;
    };
    auto term = [&](std::size_t, double w) {
        if (options.gamma == GammaTreatment::Unit) return -mode_ln_contrast(base(w), w, temperature);
        const double t = spin ? transfer_spin_sq(p, w) : transfer_dia_sq(p, material, w);
        return -mode_ln_contrast(t, w, temperature);
    };
    auto env = [&](std::size_t, double w) {
        return -mode_ln_contrast(base(w) * gamma_sq_bound(options), w, temperature);
    };
    const Fidelity f = !spin && p.tau_f() > 0.0 ? Fidelity::PaperApproximate : Fidelity::Exact;
    return make_report(channel.kind, p, material, temperature, options, term, env, spin ? 3.0 : 7.0, f);
}

ContrastReport ln_contrast(const CouplingChannel& channel, const SplitProtocol& p,
                           const MaterialModel& material, double temperature,
                           const ContrastOptions& options)
{
    channel.validate();
    switch (channel.kind) {
    case ChannelKind::SpinMagnetic: return ln_contrast_spin(p, material, temperature, options);
    case ChannelKind::Diamagnetic: return ln_contrast_dia(p, material, temperature, options);
    case ChannelKind::InducedDipole:
        return ln_contrast_induced_dipole(p, material, temperature, channel.eta_e, options);
    case ChannelKind::IntrinsicDipole: {
        if (channel.field_derivative)
            throw DomainError("intrinsic dipole with a custom field has no closed form; use the oracle");
        ContrastOptions one = options;
        one.truncation = TruncationPolicy::fixed(1);
        auto zero = [](std::size_t, double) { return 0.0; };
        return make_report(ChannelKind::IntrinsicDipole, p, material, temperature, one, zero, zero, 2.0,
                           Fidelity::Exact);
    }
    }
    throw DomainError("unknown channel");
}

ContrastReport combine_reports(const std::vector<ContrastReport>& reports)
{
    if (reports.empty()) throw DomainError("combine_reports: nothing to combine");
    ContrastReport out = reports.front();
    out.label = "combined";
    out.per_mode.clear();
    out.ln_contrast_total = 0.0;
    out.modes_used = 0;
    out.tail_bound = 0.0;
    out.converged = true;
    out.fidelity = Fidelity::Exact;
    std::size_t longest = 0;
    for (const auto& r : reports) longest = std::max(longest, r.per_mode.size());
    out.per_mode.resize(longest);
    for (std::size_t i = 0; i < longest; ++i) out.per_mode[i] = {i + 1, out.omega0 * static_cast<double>(i + 1), 0.0};
    for (const auto& r : reports) {
        out.ln_contrast_total += r.ln_contrast_total;
        out.modes_used = std::max(out.modes_used, r.modes_used);
        out.tail_bound += r.tail_bound;
        out.converged = out.converged && r.converged;
        out.fidelity = std::max(out.fidelity, r.fidelity);
        for (std::size_t i = 0; i < r.per_mode.size(); ++i) out.per_mode[i].ln_c += r.per_mode[i].ln_c;
    }
    return out;
}

double asymptotic_neg_ln_contrast(ChannelKind channel, Regime regime, const SplitProtocol& p,
                                  const MaterialModel& material, double temperature)
{
    const double w0 = fundamental_tone_for_mass(p.mass(), material);
    const double dx = p.delta_x_max();
    const double ta2 = p.tau_a() * p.tau_a();
    const double ta4 = ta2 * ta2;
    const double hbar = kPhys.hbar;
    const double kt = kPhys.k_b * temperature;
    if (!(temperature >= 0.0)) throw DomainError("temperature must be >= 0");
    if (channel == ChannelKind::SpinMagnetic) {
        const double base = p.mass() * dx * dx / ta4;
        if (regime == Regime::HighTemperature) {
            const double w2 = w0 * w0;
            return 2.0 * kt / (hbar * hbar) * base / (w2 * w2);
        }
        return base / (hbar * w0 * w0 * w0);
    }
    if (channel == ChannelKind::Diamagnetic) {
        // dia_prefactor already carries the 1/hbar and 1/16.
        const double pref = dia_prefactor(p, material);
        const double w2 = w0 * w0;
        const double w7 = w2 * w2 * w2 * w0;
        if (regime == Regime::HighTemperature) return 2.0 * kt / hbar * pref / (w7 * w0);
        return pref / w7;
    }
    throw DomainError("asymptotic limits exist for the spin and dia channels only");
}

Regime parse_regime(const std::string& name)
{
    if (name == "highT" || name == "high" || name == "high_temperature") return Regime::HighTemperature;
    if (name == "lowT" || name == "low" || name == "low_temperature") return Regime::LowTemperature;
    throw DomainError("unknown regime '" + name + "'");
}

std::string report_to_json(const ContrastReport& r, int indent)
{
    nlohmann::ordered_json j;
    j["channel"] = r.label;
    j["ln_contrast_total"] = r.ln_contrast_total;
    j["contrast"] = r.contrast();
    j["modes_used"] = r.modes_used;
    j["converged"] = r.converged;
    j["tail_bound"] = r.tail_bound;
    j["fidelity_flag"] = fidelity_name(r.fidelity);
    j["omega0"] = r.omega0;
    j["temperature"] = r.temperature;
    j["protocol"] = {{"mass", r.mass},       {"tau_a", r.tau_a},         {"tau_f", r.tau_f},
                     {"eta_b", r.eta_b},     {"delta_x_max", r.delta_x_max}, {"delta_t", r.delta_t}};
    auto modes = nlohmann::ordered_json::array();
    for (const auto& m : r.per_mode) modes.push_back({{"n", m.n}, {"omega", m.omega}, {"ln_c", m.ln_c}});
    j["per_mode"] = std::move(modes);
    return j.dump(indent);
}

}  // namespace sgp
