#include "sgphonon/oracle.hpp"

#include <quadmath.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <type_traits>

#include "json_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/numerics.hpp"

namespace sgp::oracle {

namespace {

constexpr double kMaxPanels = 5e7;

// Minimal complex arithmetic that works for both double and __float128.
template <class R>
struct Cx {
    R re{};
    R im{};
    Cx operator+(const Cx& o) const { return {re + o.re, im + o.im}; }
    Cx operator-(const Cx& o) const { return {re - o.re, im - o.im}; }
    Cx operator*(const Cx& o) const { return {re * o.re - im * o.im, re * o.im + im * o.re}; }
    Cx scale(R k) const { return {re * k, im * k}; }
    // Division by i * omega.
    Cx over_i(R omega) const { return {im / omega, -re / omega}; }
    R norm() const { return re * re + im * im; }
};

inline double rsin(double x) { return std::sin(x); }
inline double rcos(double x) { return std::cos(x); }
inline __float128 rsin(__float128 x) { return sinq(x); }
inline __float128 rcos(__float128 x) { return cosq(x); }

// e^{i omega t}; in double the product is formed exactly.
template <class R>
Cx<R> phase(double omega, R t)
{
    if constexpr (std::is_same_v<R, double>) {
        const auto sc = num::sincos_product(omega, t);
        return {sc.cos, sc.sin};
    } else {
        const R p = static_cast<R>(omega) * t;
        return {rcos(p), rsin(p)};
    }
}

// J_k = int_0^h s^k e^{i omega s} ds for k = 0, 1, 2.
template <class R>
std::array<Cx<R>, 3> moment_integrals(double omega, double h)
{
    std::array<Cx<R>, 3> j{};
    const R w = static_cast<R>(omega);
    const R hh = static_cast<R>(h);
    if (std::fabs(omega * h) < 0.5) {
        // Series: J_k = sum_m (i omega)^m h^{m+k+1} / (m! (m+k+1)).
        for (int k = 0; k < 3; ++k) {
            Cx<R> term{R(1), R(0)};  // (i omega h)^m / m!
            Cx<R> sum{};
            R hk = hh;
            for (int e = 0; e < k; ++e) hk *= hh;
            for (int m = 0; m < 60; ++m) {
                sum = sum + term.scale(R(1) / static_cast<R>(m + k + 1));
                term = term * Cx<R>{R(0), w * hh / static_cast<R>(m + 1)};
                if (term.norm() == R(0)) break;
            }
            j[static_cast<std::size_t>(k)] = sum.scale(hk);
        }
        return j;
    }
    const Cx<R> e = phase<R>(omega, hh);
    j[0] = (e - Cx<R>{R(1), R(0)}).over_i(w);
    j[1] = (e.scale(hh) - j[0]).over_i(w);
    j[2] = (e.scale(hh * hh) - j[1].scale(R(2))).over_i(w);
    return j;
}

constexpr double kGradientTable[5] = {1.0, -1.0, 0.0, -1.0, 1.0};

// Delta f on each protocol segment as c0 + c1 s + c2 s^2 (local s), built by
// integrating the piecewise-constant acceleration of the right arm from rest.
// Kinematics are carried in R.
template <class R>
struct SegmentModel {
    std::array<double, 5> length{};
    std::array<std::array<R, 3>, 5> coeffs{};
};

template <class R>
SegmentModel<R> segment_model(const CouplingChannel& channel, const SplitProtocol& p,
                              const MaterialModel& material)
{
    const R mass = p.mass();
    const R eta = p.eta_b();
    const R mu = kPhys.mu();
    const R accel = mu * eta / mass;
    const R root_mass = static_cast<R>(std::sqrt(p.mass()));
    const std::array<double, 5> lengths{p.tau_a(), p.tau_a(), 2.0 * p.tau_f(), p.tau_a(), p.tau_a()};
    R drive{};  // coefficient multiplying the separation, per unit gradient^2
    switch (channel.kind) {
    case ChannelKind::Diamagnetic:
        drive = static_cast<R>(material.susceptibility) * root_mass / static_cast<R>(kPhys.mu_0);
        break;
    case ChannelKind::InducedDipole: {
        const R volume = mass / static_cast<R>(material.density);
        const R er = material.dielectric;
        const R ee = channel.eta_e;
        drive = R(6) * static_cast<R>(kPhys.eps_0) * volume * (er - R(1)) / (er * (er + R(2))) * ee * ee / root_mass;
        break;
    }
    default:
        break;
    }
    SegmentModel<R> m;
    R x{};
    R v{};
    for (std::size_t k = 0; k < 5; ++k) {
        const R g = kGradientTable[k];
        const R acc = g * accel;
        const R h = lengths[k];
        m.length[k] = lengths[k];
        switch (channel.kind) {
        case ChannelKind::SpinMagnetic:
            m.coeffs[k] = {R(2) * mu * g * eta / root_mass, R(0), R(0)};
            break;
        case ChannelKind::Diamagnetic:
        case ChannelKind::InducedDipole: {
            R k2 = drive;
            if (channel.kind == ChannelKind::Diamagnetic)
                k2 *= channel.gating == DiamagneticGating::Literal ? g * g * eta * eta : eta * eta;
            // Separation of the two arms is 2 x(s).
            m.coeffs[k] = {k2 * R(2) * x, k2 * R(2) * v, k2 * acc};
            break;
        }
        case ChannelKind::IntrinsicDipole:
            m.coeffs[k] = {R(0), R(0), R(0)};
            break;
        }
        x += v * h + acc * h * h / R(2);
        v += acc * h;
    }
    return m;
}

template <class R>
double segments_transfer(const SegmentModel<R>& m, double omega)
{
    Cx<R> total{};
    // e^{i omega start} as a product of per-segment phases; a rounded start
    // time would cost omega * ulp(start) radians.
    Cx<R> at{R(1), R(0)};
    for (std::size_t k = 0; k < 5; ++k) {
        if (!(m.length[k] > 0.0)) continue;
        const auto j = moment_integrals<R>(omega, m.length[k]);
        const auto& c = m.coeffs[k];
        const Cx<R> local = j[0].scale(c[0]) + j[1].scale(c[1]) + j[2].scale(c[2]);
        total = total + at * local;
        at = at * phase<R>(omega, static_cast<R>(m.length[k]));
    }
    return static_cast<double>(total.norm());
}

double coth_factor(double omega, double temperature)
{
    if (temperature == 0.0) return 1.0;
    return num::coth(kPhys.hbar * omega / (2.0 * kPhys.k_b * temperature));
}

std::vector<double> sorted_cuts(double a, double b, std::span<const double> breakpoints)
{
    std::vector<double> cuts{a};
    for (double t : breakpoints)
        if (t > a && t < b) cuts.push_back(t);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

}  // namespace

namespace {

// One integration piece: g(index, s) for s in [0, length], weighted by
// e^{i omega (start + s)}.
struct Piece {
    std::size_t index = 0;
    double length = 0.0;
    long double start = 0.0L;
};

using Phase = std::complex<long double>;

Phase phase_at(long double omega, long double t)
{
    const long double a = omega * t;
    return {std::cos(a), std::sin(a)};
}

// Node positions and phases are carried in extended precision: a panel
// shifted by r changes its integral by r (F(b) - F(a)), which does not
// cancel across the window the way the integral itself does. The force
// is sampled at the rounded position.
template <class G>
FourierResult transform_pieces(const G& g, const std::vector<Piece>& pieces, double omega,
                               const FourierOptions& options)
{
    const auto& rule = num::GaussLegendre::order16();
    const auto& x = rule.nodes();
    const auto& w = rule.weights();
    const long double om = omega;

    auto pass = [&](double factor, std::size_t& panels_used) {
        Phase sum{};
        panels_used = 0;
        for (const auto& piece : pieces) {
            const double h = piece.length;
            const double base = std::max(1.0, std::ceil(options.panels_per_period * omega * h / (2.0 * kPi)));
            const double want = base * factor;
            if (want > kMaxPanels) throw NonConvergence("Fourier quadrature needs too many panels", 0.0);
            const auto panels = static_cast<std::size_t>(want);
            panels_used += panels;
            const long double width = static_cast<long double>(h) / static_cast<long double>(panels);
            std::vector<long double> offset(x.size());
            std::vector<Phase> node_phase(x.size());
            for (std::size_t q = 0; q < x.size(); ++q) {
                offset[q] = 0.5L * width * static_cast<long double>(x[q]);
                node_phase[q] = phase_at(om, offset[q]);
            }
            num::CompensatedSum<Phase> local;
            for (std::size_t p = 0; p < panels; ++p) {
                const long double mid = width * (static_cast<long double>(p) + 0.5L);
                Phase panel{};
                for (std::size_t q = 0; q < x.size(); ++q) {
                    const double s = static_cast<double>(mid + offset[q]);
                    const double v = g(piece.index, s);
                    if (!std::isfinite(v))
                        throw EvaluationError("non-finite integrand at offset " + num::format_double(s) +
                                                  " into piece " + std::to_string(piece.index),
                                              s);
                    panel += static_cast<long double>(w[q] * v) * node_phase[q];
                }
                local.add(phase_at(om, mid) * panel * (0.5L * width));
            }
            sum += phase_at(om, piece.start) * local.value();
        }
        return std::complex<double>(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
    };

    FourierResult out;
    std::size_t panels = 0;
    std::complex<double> prev = pass(1.0, panels);
    for (int level = 1; level <= options.max_doublings; ++level) {
        std::size_t next_panels = 0;
        const std::complex<double> next = pass(std::ldexp(1.0, level), next_panels);
        const double diff = std::abs(next - prev);
        const double scale = std::abs(next);
        out.diagnostics = {next_panels, level, scale > 0.0 ? diff / scale : diff};
        prev = next;
        if (diff <= options.rel_tol * scale || scale < 1e-300) {
            out.integral = next;
            out.value_sq = std::norm(next);
            return out;
        }
    }
    throw NonConvergence("Fourier quadrature did not reach the tolerance", out.diagnostics.error_estimate);
}

}  // namespace

FourierResult fourier_transfer_numeric(const std::function<double(double)>& f, double a, double b,
                                       std::span<const double> breakpoints, double omega,
                                       const FourierOptions& options)
{
    if (!(omega > 0.0)) throw DomainError("fourier_transfer_numeric: omega must be > 0");
    if (!(b >= a)) throw DomainError("fourier_transfer_numeric: empty window");
    const auto cuts = sorted_cuts(a, b, breakpoints);
    std::vector<Piece> pieces;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (!(cuts[k + 1] > cuts[k])) continue;
        pieces.push_back({k, cuts[k + 1] - cuts[k], cuts[k]});
    }
    return transform_pieces([&](std::size_t k, double s) { return f(cuts[k] + s); }, pieces, omega, options);
}

FourierResult channel_transfer_numeric(const CouplingChannel& channel, const SplitProtocol& protocol,
                                       const MaterialModel& material, double omega,
                                       const FourierOptions& options)
{
    if (!(omega > 0.0)) throw DomainError("channel_transfer_numeric: omega must be > 0");
    const ModeForce force(channel, protocol, material);
    // Sampled per interval in local time.
    std::vector<Piece> pieces;
    long double at = 0.0L;
    const auto lengths = protocol.segment_lengths();
    for (std::size_t k = 0; k < lengths.size(); ++k) {
        if (lengths[k] > 0.0) pieces.push_back({k, lengths[k], at});
        at += lengths[k];
    }
    return transform_pieces([&](std::size_t k, double s) { return force.delta_in_segment(static_cast<int>(k), s); },
                            pieces, omega, options);
}

bool needs_quad(const CouplingChannel& channel, const SplitProtocol& protocol, double omega)
{
    if (channel.kind == ChannelKind::SpinMagnetic || channel.kind == ChannelKind::IntrinsicDipole) return false;
    // Segment contributions cancel down by ~(omega delta_t)^-2.
    const double wt = omega * protocol.delta_t();
    return wt * wt * 2.2e-16 > 1e-10;
}

double transfer_segments(const CouplingChannel& channel, const SplitProtocol& protocol,
                         const MaterialModel& material, double omega, Precision precision)
{
    if (!(omega > 0.0)) throw DomainError("transfer_segments: omega must be > 0");
    if (channel.kind == ChannelKind::IntrinsicDipole && channel.field_derivative)
        throw DomainError("transfer_segments: custom field profiles need fourier_transfer_numeric");
    const bool quad = precision == Precision::Quad ||
                      (precision == Precision::Auto && needs_quad(channel, protocol, omega));
    if (quad) return segments_transfer(segment_model<__float128>(channel, protocol, material), omega);
    return segments_transfer(segment_model<double>(channel, protocol, material), omega);
}

OracleResult make_result(std::string label, double analytic, double oracle,
                         QuadratureDiagnostics diagnostics)
{
    return {std::move(label), analytic, oracle, num::relative_error(analytic, oracle), diagnostics};
}

OracleResult transfer_check(const CouplingChannel& channel, const SplitProtocol& protocol,
                            const MaterialModel& material, double omega, const FourierOptions& options)
{
    double analytic = 0.0;
    switch (channel.kind) {
    case ChannelKind::SpinMagnetic: analytic = transfer_spin_sq(protocol, omega); break;
    case ChannelKind::Diamagnetic: analytic = transfer_dia_sq(protocol, material, omega); break;
    case ChannelKind::InducedDipole:
        analytic = transfer_induced_dipole_sq(protocol, material, omega, channel.eta_e);
        break;
    case ChannelKind::IntrinsicDipole: analytic = 0.0; break;
    }
    const auto numeric = channel_transfer_numeric(channel, protocol, material, omega, options);
    return make_result("transfer_" + channel_name(channel.kind), analytic, numeric.value_sq, numeric.diagnostics);
}

OracleResult duhamel_recheck(const CouplingChannel& channel, const SplitProtocol& protocol,
                             const MaterialModel& material, double omega)
{
    QuadratureOptions q;
    const PhaseDelta d = arm_deltas(channel, protocol, material, omega, protocol.delta_t(), q);
    const auto numeric = channel_transfer_numeric(channel, protocol, material, omega);
    return make_result("duhamel_" + channel_name(channel.kind), d.norm_sq(omega), numeric.value_sq,
                       numeric.diagnostics);
}

double neg_ln_contrast_segments(const CouplingChannel& channel, const SplitProtocol& protocol,
                                const MaterialModel& material, double temperature, std::size_t modes,
                                Precision precision)
{
    const double omega0 = fundamental_tone_for_mass(protocol.mass(), material);
    double total = 0.0;
    for (std::size_t n = 1; n <= modes; ++n) {
        const double w = static_cast<double>(n) * omega0;
        const double t = transfer_segments(channel, protocol, material, w, precision);
        total += coth_factor(w, temperature) / (4.0 * kPhys.hbar * w) * t;
    }
    return total;
}

std::size_t GoldenGridSpec::size() const
{
    return channels.size() * masses.size() * delta_x.size() * delta_t.size() * flight_fraction.size() *
           temperatures.size();
}

GoldenGridSpec GoldenGridSpec::contrast_curves()
{
    GoldenGridSpec g;
    g.channels = {ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic};
    g.masses = {1e-14, 1e-18};
    g.delta_x = num::logspace(1e-6, 1e-3, 16);
    g.delta_t = {1.0};
    g.flight_fraction = {0.0};
    g.temperatures = {4.0, 300.0};
    return g;
}

GoldenGridSpec GoldenGridSpec::from_json(std::string_view json_text)
{
    constexpr std::string_view what = "golden grid";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    detail::reject_unknown(j, {"channels", "masses", "delta_x", "delta_t", "flight_fraction", "temperatures"}, what);
    GoldenGridSpec g;
    if (!j.contains("channels") || !j["channels"].is_array()) throw ConfigError("golden grid: 'channels' must be an array");
    for (const auto& c : j["channels"]) {
        if (!c.is_string()) throw ConfigError("golden grid: channel names must be strings");
        const auto kind = parse_channel_kind(c.get<std::string>());
        if (kind != ChannelKind::SpinMagnetic && kind != ChannelKind::Diamagnetic)
            throw ConfigError("golden grid: only spin and dia channels are tabulated");
        g.channels.push_back(kind);
    }
    auto axis = [&](const char* key, std::vector<double>& out, bool optional, double fallback) {
        if (!j.contains(key)) {
            if (!optional) throw ConfigError(std::string("golden grid: missing axis '") + key + "'");
            out = {fallback};
            return;
        }
        const auto& a = j[key];
        // An explicitly empty axis yields an empty grid.
        if (a.is_array() && a.empty()) {
            out.clear();
            return;
        }
        out = detail::parse_axis(a, key, what);
    };
    axis("masses", g.masses, false, 0.0);
    axis("delta_x", g.delta_x, false, 0.0);
    axis("delta_t", g.delta_t, false, 0.0);
    axis("flight_fraction", g.flight_fraction, true, 0.0);
    axis("temperatures", g.temperatures, false, 0.0);
    return g;
}

namespace {

struct GoldenIndex {
    std::size_t channel, mass, temperature, delta_t, ff, delta_x;
};

GoldenIndex unravel(const GoldenGridSpec& g, std::size_t i)
{
    GoldenIndex k{};
    k.delta_x = i % g.delta_x.size();
    i /= g.delta_x.size();
    k.ff = i % g.flight_fraction.size();
    i /= g.flight_fraction.size();
    k.delta_t = i % g.delta_t.size();
    i /= g.delta_t.size();
    k.temperature = i % g.temperatures.size();
    i /= g.temperatures.size();
    k.mass = i % g.masses.size();
    i /= g.masses.size();
    k.channel = i;
    return k;
}

CouplingChannel oracle_channel(ChannelKind kind, double flight_fraction)
{
    if (kind == ChannelKind::Diamagnetic)
        return CouplingChannel::diamagnetic(flight_fraction > 0.0 ? DiamagneticGating::HeldGradient
                                                                  : DiamagneticGating::Literal);
    return CouplingChannel::spin();
}

ContrastReport library_report(const GoldenRow& row, const MaterialModel& material)
{
    const auto p = SplitProtocol::from_target(row.mass, row.delta_x, row.delta_t, row.flight_fraction);
    ContrastOptions opts;
    opts.keep_per_mode = false;
    return row.channel == ChannelKind::SpinMagnetic ? ln_contrast_spin(p, material, row.temperature, opts)
                                                    : ln_contrast_dia(p, material, row.temperature, opts);
}

}  // namespace

std::vector<GoldenRow> golden_table_build(const GoldenGridSpec& grid, const MaterialModel& material,
                                          unsigned jobs)
{
    material.validate();
    std::vector<GoldenRow> rows(grid.size());
    num::parallel_for(rows.size(), jobs, [&](std::size_t i) {
        const auto k = unravel(grid, i);
        GoldenRow& r = rows[i];
        r.channel = grid.channels[k.channel];
        r.mass = grid.masses[k.mass];
        r.delta_x = grid.delta_x[k.delta_x];
        r.delta_t = grid.delta_t[k.delta_t];
        r.flight_fraction = grid.flight_fraction[k.ff];
        r.temperature = grid.temperatures[k.temperature];
        const auto library = library_report(r, material);
        const auto p = SplitProtocol::from_target(r.mass, r.delta_x, r.delta_t, r.flight_fraction);
        const auto channel = oracle_channel(r.channel, r.flight_fraction);
        const double w_top = static_cast<double>(library.modes_used) * library.omega0;
        const bool quad = needs_quad(channel, p, w_top);
        r.neg_ln_c = neg_ln_contrast_segments(channel, p, material, r.temperature, library.modes_used);
        r.rel_err = num::relative_error(library.neg_ln_contrast(), r.neg_ln_c);
        r.method = std::string("segments-") + (quad ? "quad" : "double") + "-N" + std::to_string(library.modes_used);
    });
    return rows;
}

void write_golden_csv(std::ostream& out, std::span<const GoldenRow> rows)
{
    out << "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,rel_err,method\n";
    for (const auto& r : rows) {
        out << channel_name(r.channel) << ',' << num::format_double(r.mass) << ','
            << num::format_double(r.delta_x) << ',' << num::format_double(r.delta_t) << ','
            << num::format_double(r.flight_fraction) << ',' << num::format_double(r.temperature) << ','
            << num::format_double(r.neg_ln_c) << ',' << num::format_double(r.rel_err) << ',' << r.method
            << '\n';
    }
}

std::vector<GoldenRow> read_golden_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,rel_err,method")
        throw IoError("golden CSV: unexpected header");
    std::vector<GoldenRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        for (;;) {
            const auto comma = line.find(',', pos);
            fields.push_back(line.substr(pos, comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        const std::string where = "golden CSV line " + std::to_string(lineno);
        if (fields.size() != 9) throw IoError(where + ": expected 9 fields");
        GoldenRow r;
        try {
            r.channel = parse_channel_kind(fields[0]);
        } catch (const ConfigError&) {
            throw IoError(where + ": unknown channel");
        }
        double* targets[7] = {&r.mass, &r.delta_x, &r.delta_t, &r.flight_fraction, &r.temperature, &r.neg_ln_c, &r.rel_err};
        for (int k = 0; k < 7; ++k) {
            const auto& s = fields[static_cast<std::size_t>(k + 1)];
            const auto res = std::from_chars(s.data(), s.data() + s.size(), *targets[k]);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw IoError(where + ": bad number");
        }
        r.method = fields[8];
        rows.push_back(std::move(r));
    }
    return rows;
}

GoldenCheck golden_check(std::span<const GoldenRow> rows, const MaterialModel& material, double tolerance,
                         unsigned jobs)
{
    GoldenCheck check;
    check.rows.resize(rows.size());
    num::parallel_for(rows.size(), jobs, [&](std::size_t i) {
        const auto report = library_report(rows[i], material);
        check.rows[i] = {rows[i], report.neg_ln_contrast(),
                         num::relative_error(report.neg_ln_contrast(), rows[i].neg_ln_c)};
    });
    for (const auto& r : check.rows) {
        check.max_drift = std::max(check.max_drift, r.drift);
        if (!(r.drift <= tolerance)) ++check.failures;
    }
    return check;
}

}  // namespace sgp::oracle
