#include "sgphonon/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/numerics.hpp"

namespace sgp {

namespace {

constexpr double kMaxPanels = 5e7;

void require_omega(double omega, const char* what)
{
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError(std::string(what) + ": omega must be > 0");
}

ModeState free_step(const ModeState& s, double omega, double h)
{
    const auto sc = num::sincos_product(omega, h);
    ModeState out;
    out.u = s.u * sc.cos + s.u_dot * sc.sin / omega;
    out.u_dot = -s.u * omega * sc.sin + s.u_dot * sc.cos;
    out.t = s.t + h;
    return out;
}

using Phase = std::complex<long double>;

Phase phase_at(long double omega, long double t)
{
    const long double a = omega * t;
    return {std::cos(a), std::sin(a)};
}

// Integral of f(t') e^{i omega (b - t')}: the real part pairs with cos, the
// imaginary part with sin. Panel geometry is kept in extended precision so
// the rounding of panel positions does not leak into the cancelling sum.
std::complex<double> duhamel_pass(const Drive& drive, double omega, double b,
                                  const std::vector<double>& cuts, double scale)
{
    const auto& rule = num::GaussLegendre::order16();
    const auto& x = rule.nodes();
    const auto& w = rule.weights();
    const long double om = omega;
    Phase total{};
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double lo = cuts[k];
        const double hi = cuts[k + 1];
        if (!(hi > lo)) continue;
        const double periods = omega * (hi - lo) / (2.0 * kPi);
        const double wanted = std::ceil(8.0 * periods * scale);
        if (wanted > kMaxPanels) throw NonConvergence("Duhamel quadrature needs too many panels", 0.0);
        const auto panels = static_cast<std::size_t>(std::max(scale, wanted));
        const long double width =
            (static_cast<long double>(hi) - static_cast<long double>(lo)) / static_cast<long double>(panels);
        const long double span_to_end = static_cast<long double>(b) - static_cast<long double>(lo);
        std::vector<long double> offset(x.size());
        std::vector<Phase> node_phase(x.size());
        for (std::size_t q = 0; q < x.size(); ++q) {
            offset[q] = 0.5L * width * static_cast<long double>(x[q]);
            node_phase[q] = phase_at(-om, offset[q]);
        }
        num::CompensatedSum<Phase> part;
        for (std::size_t p = 0; p < panels; ++p) {
            const long double mid = width * (static_cast<long double>(p) + 0.5L);
            Phase panel{};
            for (std::size_t q = 0; q < x.size(); ++q) {
                const double tp = static_cast<double>(static_cast<long double>(lo) + mid + offset[q]);
                const double f = drive.f(tp);
                if (!std::isfinite(f))
                    throw EvaluationError("non-finite drive sample at t' = " + num::format_double(tp), tp);
                panel += static_cast<long double>(w[q] * f) * node_phase[q];
            }
            part.add(phase_at(om, span_to_end - mid) * panel * (0.5L * width));
        }
        total += part.value();
    }
    return {static_cast<double>(total.real()), static_cast<double>(total.imag())};
}

}  // namespace

double thermal_occupation(double omega, double temperature)
{
    require_omega(omega, "thermal_occupation");
    if (!(temperature >= 0.0)) throw DomainError("thermal_occupation: temperature must be >= 0");
    if (temperature == 0.0) return 0.5;
    return 0.5 * num::coth(kPhys.hbar * omega / (2.0 * kPhys.k_b * temperature));
}

ThermalWidths characteristic_widths(double omega, double temperature)
{
    const double n0 = thermal_occupation(omega, temperature);
    ThermalWidths w;
    w.occupation = n0;
    w.sigma_u = std::sqrt(kPhys.hbar * n0 / omega);
    w.sigma_udot = std::sqrt(kPhys.hbar * omega * n0);
    return w;
}

ModeState evolve_mode(const ModeState& initial, double omega, const Drive& drive, double t_end,
                      const QuadratureOptions& options)
{
    require_omega(omega, "evolve_mode");
    if (!(t_end >= initial.t)) throw DomainError("evolve_mode: t_end precedes the initial time");
    if (!drive.f) throw DomainError("evolve_mode: empty drive");
    std::vector<double> cuts{initial.t};
    for (double b : drive.breakpoints)
        if (b > initial.t && b < t_end) cuts.push_back(b);
    cuts.push_back(t_end);
    std::sort(cuts.begin(), cuts.end());

    std::complex<double> prev = duhamel_pass(drive, omega, t_end, cuts, 1.0);
    double achieved = 0.0;
    bool converged = false;
    for (int level = 1; level <= options.max_doublings; ++level) {
        const auto next = duhamel_pass(drive, omega, t_end, cuts, std::ldexp(1.0, level));
        const double scale = std::abs(next);
        const double diff = std::abs(next - prev);
        prev = next;
        achieved = scale > 0.0 ? diff / scale : 0.0;
        if (diff <= options.rel_tol * scale || scale < 1e-300) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NonConvergence("Duhamel quadrature did not reach the tolerance", achieved);

    ModeState out = free_step(initial, omega, t_end - initial.t);
    out.u += prev.imag() / omega;
    out.u_dot += prev.real();
    out.t = t_end;
    return out;
}

ModeState evolve_mode(const ModeState& initial, double omega, std::span<const PolySegment> drive,
                      double t_end)
{
    require_omega(omega, "evolve_mode");
    if (!(t_end >= initial.t)) throw DomainError("evolve_mode: t_end precedes the initial time");
    std::vector<PolySegment> segs(drive.begin(), drive.end());
    std::sort(segs.begin(), segs.end(), [](const PolySegment& x, const PolySegment& y) { return x.begin < y.begin; });
    const double w2 = omega * omega;
    ModeState s = initial;
    for (const auto& seg : segs) {
        const double lo = std::max(seg.begin, s.t);
        const double hi = std::min(seg.end, t_end);
        if (!(hi > lo)) continue;
        if (lo > s.t) s = free_step(s, omega, lo - s.t);
        const auto& c = seg.coeffs;
        // Particular solution u_p = p / omega^2 - p'' / omega^4.
        const auto up = [&](double x) { return (c[0] + x * (c[1] + x * c[2])) / w2 - 2.0 * c[2] / (w2 * w2); };
        const auto vp = [&](double x) { return (c[1] + 2.0 * x * c[2]) / w2; };
        const double xa = lo - seg.begin;
        const double xb = hi - seg.begin;
        ModeState h{s.u - up(xa), s.u_dot - vp(xa), lo};
        h = free_step(h, omega, hi - lo);
        s = {h.u + up(xb), h.u_dot + vp(xb), hi};
    }
    if (t_end > s.t) s = free_step(s, omega, t_end - s.t);
    s.t = t_end;
    return s;
}

double occupation_at(const ModeState& state, double omega)
{
    require_omega(omega, "occupation_at");
    return (state.u_dot * state.u_dot + omega * omega * state.u * state.u) / (2.0 * kPhys.hbar * omega);
}

PhaseDelta arm_deltas(const CouplingChannel& channel, const SplitProtocol& protocol,
                      const MaterialModel& material, double omega, double t,
                      const QuadratureOptions& options)
{
    if (!(t >= 0.0) || t > protocol.delta_t() * (1.0 + 1e-15))
        throw DomainError("arm_deltas: t must lie in [0, delta_t]");
    const ModeForce force(channel, protocol, material);
    const double t1 = protocol.start();
    Drive drive;
    drive.f = [&force, t1](double local) { return force.delta(local + t1); };
    for (double b : protocol.breakpoints()) drive.breakpoints.push_back(b - t1);
    const ModeState end = evolve_mode(ModeState{}, omega, drive, t, options);
    return {end.u, end.u_dot};
}

double wigner_density(double u, double u_dot, double sigma_u, double sigma_udot)
{
    if (!(sigma_u > 0.0) || !(sigma_udot > 0.0)) throw DomainError("wigner_density: widths must be > 0");
    const double a = u / sigma_u;
    const double b = u_dot / sigma_udot;
    return std::exp(-0.5 * (a * a + b * b)) / (2.0 * kPi * sigma_u * sigma_udot);
}

std::vector<HistorySample> arm_histories(const CouplingChannel& channel,
                                         const SplitProtocol& protocol,
                                         const MaterialModel& material, double omega,
                                         double temperature, std::span<const double> times,
                                         HistoryScaling scaling)
{
    const ThermalWidths widths = characteristic_widths(omega, temperature);
    const ModeForce force(channel, protocol, material);
    const double t1 = protocol.start();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
            throw DomainError("arm_histories: sample times must be finite and >= 0");
        if (i > 0 && !(times[i] >= times[i - 1])) throw DomainError("arm_histories: sample times must ascend");
    }

    const auto right_segs = force.arm_segments(Arm::Right);
    const auto left_segs = force.arm_segments(Arm::Left);
    std::vector<double> breakpoints;
    for (double b : protocol.breakpoints()) breakpoints.push_back(b);

    auto step = [&](Arm arm, const ModeState& from, double to) {
        const auto& segs = arm == Arm::Right ? right_segs : left_segs;
        if (segs) return evolve_mode(from, omega, std::span<const PolySegment>(*segs), to);
        Drive drive{[&force, arm, &protocol](double tc) {
                        return segment_index(protocol, tc) < 0 ? 0.0 : force.arm(arm, tc);
                    },
                    breakpoints};
        return evolve_mode(from, omega, drive, to);
    };

    ModeState left{widths.sigma_u, widths.sigma_udot, t1};
    ModeState right = left;
    std::vector<HistorySample> out;
    out.reserve(times.size());
    for (double local : times) {
        const double tc = local + t1;
        left = step(Arm::Left, left, tc);
        right = step(Arm::Right, right, tc);
        HistorySample h{local, left.u, left.u_dot, right.u, right.u_dot, occupation_at(left, omega),
                        occupation_at(right, omega)};
        if (scaling != HistoryScaling::Raw) {
            h.n_l /= widths.occupation;
            h.n_r /= widths.occupation;
        }
        if (scaling == HistoryScaling::Dimensionless) {
            h.u_l /= widths.sigma_u;
            h.u_r /= widths.sigma_u;
            h.udot_l /= widths.sigma_udot;
            h.udot_r /= widths.sigma_udot;
        }
        out.push_back(h);
    }
    return out;
}

void write_history_csv(std::ostream& out, std::span<const HistorySample> samples)
{
    out << "t,u_L,udot_L,u_R,udot_R,n_L,n_R\n";
    for (const auto& s : samples) {
        out << num::format_double(s.t) << ',' << num::format_double(s.u_l) << ','
            << num::format_double(s.udot_l) << ',' << num::format_double(s.u_r) << ','
            << num::format_double(s.udot_r) << ',' << num::format_double(s.n_l) << ','
            << num::format_double(s.n_r) << '\n';
    }
}

std::vector<HistorySample> read_history_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "t,u_L,udot_L,u_R,udot_R,n_L,n_R")
        throw IoError("history CSV: unexpected header");
    std::vector<HistorySample> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        double v[7];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 7; ++k) {
            const auto r = std::from_chars(p, end, v[k]);
            if (r.ec != std::errc{}) throw IoError("history CSV: bad number on line " + std::to_string(row));
            p = r.ptr;
            if (k < 6) {
                if (p == end || *p != ',') throw IoError("history CSV: missing field on line " + std::to_string(row));
                ++p;
            }
        }
        if (p != end) throw IoError("history CSV: trailing data on line " + std::to_string(row));
        out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6]});
    }
    return out;
}

}  // namespace sgp
