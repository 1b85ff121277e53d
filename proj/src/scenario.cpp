#include "sgphonon/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "json_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/dynamics.hpp"
#include "sgphonon/errors.hpp"
#include "sgphonon/numerics.hpp"
#include "sgphonon/protocol.hpp"

namespace sgp {

namespace fs = std::filesystem;
using detail::json;
using ojson = nlohmann::ordered_json;

namespace {

GammaTreatment parse_gamma(const std::string& s, std::string_view what)
{
    if (s == "exact") return GammaTreatment::Exact;
    if (s == "unit") return GammaTreatment::Unit;
    throw ConfigError(std::string(what) + ": gamma must be \"exact\" or \"unit\"");
}

std::string gamma_name(GammaTreatment g)
{
    return g == GammaTreatment::Exact ? "exact" : "unit";
}

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        fields.push_back(line.substr(pos, comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return fields;
}

double parse_field(const std::string& s, const std::string& where)
{
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw IoError(where + ": bad number '" + s + "'");
    return v;
}

// Rethrows the active exception with `prefix` prepended, keeping its category.
[[noreturn]] void rethrow_with(const std::string& prefix)
{
    try {
        throw;
    } catch (const NonConvergence& e) {
        throw NonConvergence(prefix + e.what(), e.achieved_error());
    } catch (const EvaluationError& e) {
        throw EvaluationError(prefix + e.what(), e.at());
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const IoError& e) {
        throw IoError(prefix + e.what());
    } catch (const DomainError& e) {
        throw DomainError(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

/// Creates the directory and proves it is writable.
void prepare_output_dir(const fs::path& dir)
{
    if (dir.empty()) throw ConfigError("output_dir is empty");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
    const fs::path probe = dir / ".sgphonon_write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "probe")) throw IoError("output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

template <class Writer>
std::string to_text(Writer&& w)
{
    std::ostringstream s;
    w(s);
    return s.str();
}

SplitProtocol protocol_param(const json& params, const char* key, const json& fallback)
{
    const json& j = params.contains(key) ? params[key] : fallback;
    return protocol_from_json(j.dump());
}

double number_param(const json& params, const char* key, double fallback, std::string_view what)
{
    return detail::get_number_or(params, key, fallback, what);
}

std::vector<double> axis_param(const json& params, const char* key, const json& fallback,
                               std::string_view what)
{
    return detail::parse_axis(params.contains(key) ? params[key] : fallback, key, what);
}

std::vector<ChannelKind> channels_param(const json& params, std::vector<ChannelKind> fallback,
                                        std::string_view what)
{
    if (!params.contains("channels")) return fallback;
    const auto& c = params["channels"];
    std::vector<ChannelKind> out;
    if (c.is_string()) return parse_channel_list(c.get<std::string>());
    if (!c.is_array() || c.empty()) throw ConfigError(std::string(what) + ": channels must be a non-empty list");
    for (const auto& v : c) {
        if (!v.is_string()) throw ConfigError(std::string(what) + ": channel names must be strings");
        const auto k = parse_channel_kind(v.get<std::string>());
        if (std::find(out.begin(), out.end(), k) != out.end())
            throw ConfigError(std::string(what) + ": duplicate channel");
        out.push_back(k);
    }
    return out;
}

std::string rows_csv(std::span<const ContrastRow> rows)
{
    return to_text([&](std::ostream& o) { write_contrast_csv(o, rows); });
}

// ---------------------------------------------------------------------------
// occupation / phase_space

struct HistoryJob {
    ChannelKind channel;
    double frequency_hz;
};

struct HistoryParams {
    std::vector<HistoryJob> modes;
    SplitProtocol protocol;
    double temperature;
    std::size_t samples;
    double span;  // sampled window as a multiple of delta_t
};

const json kHistoryProtocol = {{"mass", 1e-14}, {"delta_x_max", 1e-6}, {"delta_t", 1e-4}, {"flight_fraction", 0.0}};

HistoryParams parse_history(const json& p, std::string_view what)
{
    detail::reject_unknown(p, {"modes", "protocol", "temperature", "samples", "span"}, what);
    HistoryParams h{{}, protocol_param(p, "protocol", kHistoryProtocol), number_param(p, "temperature", 4.0, what),
                    2001, number_param(p, "span", 1.25, what)};
    if (p.contains("modes")) {
        const auto& m = p["modes"];
        if (!m.is_array() || m.empty()) throw ConfigError(std::string(what) + ": modes must be a non-empty list");
        for (const auto& e : m) {
            detail::require_object(e, what);
            detail::reject_unknown(e, {"channel", "frequency_hz"}, what);
            if (!e.contains("channel") || !e["channel"].is_string())
                throw ConfigError(std::string(what) + ": each mode needs a channel name");
            const auto kind = parse_channel_kind(e["channel"].get<std::string>());
            if (kind != ChannelKind::SpinMagnetic && kind != ChannelKind::Diamagnetic)
                throw ConfigError(std::string(what) + ": histories are available for spin and dia");
            h.modes.push_back({kind, detail::get_number(e, "frequency_hz", what)});
        }
    } else {
        h.modes = {{ChannelKind::SpinMagnetic, 2e6}, {ChannelKind::Diamagnetic, 42e3}};
    }
    for (const auto& m : h.modes)
        if (!(m.frequency_hz > 0.0) || !std::isfinite(m.frequency_hz))
            throw ConfigError(std::string(what) + ": frequency_hz must be > 0");
    if (p.contains("samples")) {
        const double s = detail::get_number(p, "samples", what);
        if (!(s >= 2.0) || s != std::floor(s) || s > 1e7) throw ConfigError(std::string(what) + ": samples must be an integer in [2, 1e7]");
        h.samples = static_cast<std::size_t>(s);
    }
    if (!(h.temperature >= 0.0) || !std::isfinite(h.temperature)) throw ConfigError(std::string(what) + ": temperature must be >= 0");
    if (!(h.span >= 1.0) || !std::isfinite(h.span)) throw ConfigError(std::string(what) + ": span must be >= 1");
    return h;
}

ojson run_history(const HistoryParams& h, const MaterialModel& material, const fs::path& dir,
                  const std::string& stem, HistoryScaling scaling, ojson& files)
{
    const double omega0 = fundamental_tone_for_mass(h.protocol.mass(), material);
    std::vector<double> times(h.samples);
    const double end = h.span * h.protocol.delta_t();
    for (std::size_t i = 0; i < h.samples; ++i)
        times[i] = end * static_cast<double>(i) / static_cast<double>(h.samples - 1);
    times.back() = end;
    ojson modes = ojson::array();
    for (std::size_t k = 0; k < h.modes.size(); ++k) {
        const auto& m = h.modes[k];
        const double omega = 2.0 * kPi * m.frequency_hz;
        const CouplingChannel channel =
            m.channel == ChannelKind::SpinMagnetic ? CouplingChannel::spin() : CouplingChannel::diamagnetic();
        const auto samples = arm_histories(channel, h.protocol, material, omega, h.temperature, times, scaling);
        const std::string name = stem + "_" + std::to_string(k) + "_" + channel_name(m.channel) + ".csv";
        write_text(dir / name, to_text([&](std::ostream& o) { write_history_csv(o, samples); }));
        files.push_back(name);
        ojson entry;
        entry["file"] = name;
        entry["channel"] = channel_name(m.channel);
        entry["frequency_hz"] = m.frequency_hz;
        entry["omega"] = omega;
        entry["below_fundamental"] = omega < omega0;
        entry["initial_occupation"] = thermal_occupation(omega, h.temperature);
        entry["final_n_L"] = samples.back().n_l;
        entry["final_n_R"] = samples.back().n_r;
        modes.push_back(entry);
    }
    ojson out;
    out["omega0"] = omega0;
    out["modes"] = modes;
    out["protocol"] = json::parse(protocol_to_json(h.protocol));
    return out;
}

// ---------------------------------------------------------------------------
// contrast_curves / contrast_maps

const json kCurveDeltaX = {{"from", 1e-6}, {"to", 1e-3}, {"per_decade", 16}};
const json kMapDeltaT = {{"from", 1e-3}, {"to", 1.0}, {"per_decade", 16}};

struct MapSpec {
    std::string name;
    bool mass_axis;  // false: y is delta_x at fixed mass; true: y is mass at fixed delta_x
    double fixed;
    std::vector<double> ys;
    std::vector<double> delta_t;
};

MapSpec parse_map(const json& params, const char* key, bool mass_axis, std::string_view what)
{
    const json empty = json::object();
    const json& m = params.contains(key) ? params[key] : empty;
    detail::require_object(m, what);
    MapSpec s;
    s.name = key;
    s.mass_axis = mass_axis;
    if (mass_axis) {
        detail::reject_unknown(m, {"delta_x", "masses", "delta_t"}, what);
        s.fixed = number_param(m, "delta_x", 1e-4, what);
        s.ys = axis_param(m, "masses", json{{"from", 1e-16}, {"to", 1e-10}, {"per_decade", 16}}, what);
    } else {
        detail::reject_unknown(m, {"mass", "delta_x", "delta_t"}, what);
        s.fixed = number_param(m, "mass", 2.25e-14, what);
        s.ys = axis_param(m, "delta_x", json{{"from", 1e-5}, {"to", 1e-1}, {"per_decade", 16}}, what);
    }
    s.delta_t = axis_param(m, "delta_t", kMapDeltaT, what);
    if (!(s.fixed > 0.0)) throw ConfigError(std::string(what) + ": fixed map coordinate must be > 0");
    auto positive = [&](const std::vector<double>& v) {
        for (double x : v)
            if (!(x > 0.0)) throw ConfigError(std::string(what) + ": map axes must be positive");
    };
    positive(s.ys);
    positive(s.delta_t);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------

std::size_t SweepGrid::size() const
{
    return masses.size() * delta_x.size() * delta_t.size() * flight_fraction.size() * temperatures.size();
}

void SweepGrid::validate() const
{
    auto check = [](const std::vector<double>& v, const char* name, auto&& ok) {
        if (v.empty()) throw ConfigError(std::string("grid axis '") + name + "' is empty");
        for (double x : v)
            if (!std::isfinite(x) || !ok(x)) throw ConfigError(std::string("grid axis '") + name + "' holds an invalid value");
    };
    check(masses, "masses", [](double x) { return x > 0.0; });
    check(delta_x, "delta_x", [](double x) { return x >= 0.0; });
    check(delta_t, "delta_t", [](double x) { return x > 0.0; });
    check(flight_fraction, "flight_fraction", [](double x) { return x >= 0.0 && x < 1.0; });
    check(temperatures, "temperatures", [](double x) { return x >= 0.0; });
    if (!std::isfinite(eta_e)) throw ConfigError("grid: eta_e must be finite");
}

SweepGrid::Point SweepGrid::point(std::size_t index) const
{
    if (index >= size()) throw DomainError("grid index out of range");
    Point p{};
    p.delta_x = delta_x[index % delta_x.size()];
    index /= delta_x.size();
    p.temperature = temperatures[index % temperatures.size()];
    index /= temperatures.size();
    p.flight_fraction = flight_fraction[index % flight_fraction.size()];
    index /= flight_fraction.size();
    p.delta_t = delta_t[index % delta_t.size()];
    index /= delta_t.size();
    p.mass = masses[index];
    return p;
}

SweepGrid SweepGrid::from_json(std::string_view json_text)
{
    constexpr std::string_view what = "grid";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    detail::reject_unknown(j, {"masses", "delta_x", "delta_t", "flight_fraction", "temperatures", "eta_e", "gamma"}, what);
    SweepGrid g;
    auto axis = [&](const char* key, std::vector<double>& out) {
        if (!j.contains(key)) throw ConfigError(std::string("grid: missing axis '") + key + "'");
        out = detail::parse_axis(j[key], key, what);
    };
    axis("masses", g.masses);
    axis("delta_x", g.delta_x);
    axis("delta_t", g.delta_t);
    if (j.contains("flight_fraction")) axis("flight_fraction", g.flight_fraction);
    axis("temperatures", g.temperatures);
    g.eta_e = detail::get_number_or(j, "eta_e", 0.0, what);
    if (j.contains("gamma")) {
        if (!j["gamma"].is_string()) throw ConfigError("grid: gamma must be a string");
        g.gamma = parse_gamma(j["gamma"].get<std::string>(), what);
    }
    g.validate();
    return g;
}

ContrastRow contrast_row(ChannelKind channel, const SweepGrid::Point& point, const MaterialModel& material,
                         double eta_e, GammaTreatment gamma, const TruncationPolicy& truncation)
{
    const auto p = SplitProtocol::from_target(point.mass, point.delta_x, point.delta_t, point.flight_fraction);
    ContrastOptions opts;
    opts.truncation = truncation;
    opts.gamma = gamma;
    opts.keep_per_mode = false;
    ContrastReport r;
    switch (channel) {
    case ChannelKind::SpinMagnetic: r = ln_contrast_spin(p, material, point.temperature, opts); break;
    case ChannelKind::Diamagnetic: r = ln_contrast_dia(p, material, point.temperature, opts); break;
    case ChannelKind::InducedDipole:
        r = ln_contrast_induced_dipole(p, material, point.temperature, eta_e, opts);
        break;
    case ChannelKind::IntrinsicDipole:
        r = ln_contrast(CouplingChannel::intrinsic_dipole(1.0, 0.0, eta_e), p, material, point.temperature, opts);
        break;
    }
    ContrastRow row;
    row.channel = channel;
    row.mass = point.mass;
    row.delta_x = point.delta_x;
    row.delta_t = point.delta_t;
    row.flight_fraction = point.flight_fraction;
    row.temperature = point.temperature;
    row.neg_ln_c = r.neg_ln_contrast();
    row.contrast = r.contrast();
    row.modes_used = r.modes_used;
    row.fidelity = fidelity_name(r.fidelity);
    return row;
}

std::vector<ContrastRow> sweep(const SweepGrid& grid, std::span<const ChannelKind> channels,
                               const MaterialModel& material, unsigned jobs)
{
    grid.validate();
    material.validate();
    if (channels.empty()) throw ConfigError("sweep: no channels");
    const std::size_t n = grid.size();
    std::vector<ContrastRow> rows(n * channels.size());
    num::parallel_for(n, jobs, [&](std::size_t i) {
        try {
            const auto pt = grid.point(i);
            for (std::size_t c = 0; c < channels.size(); ++c)
                rows[i * channels.size() + c] = contrast_row(channels[c], pt, material, grid.eta_e, grid.gamma);
        } catch (...) {
            rethrow_with("grid point " + std::to_string(i) + ": ");
        }
    });
    return rows;
}

void write_contrast_csv(std::ostream& out, std::span<const ContrastRow> rows)
{
    out << "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,contrast,modes_used,fidelity\n";
    for (const auto& r : rows) {
        out << channel_name(r.channel) << ',' << num::format_double(r.mass) << ','
            << num::format_double(r.delta_x) << ',' << num::format_double(r.delta_t) << ','
            << num::format_double(r.flight_fraction) << ',' << num::format_double(r.temperature) << ','
            << num::format_double(r.neg_ln_c) << ',' << num::format_double(r.contrast) << ',' << r.modes_used
            << ',' << r.fidelity << '\n';
    }
}

std::vector<ContrastRow> read_contrast_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) ||
        line != "channel,M,delta_x,delta_t,flight_fraction,T,neg_ln_c,contrast,modes_used,fidelity")
        throw IoError("contrast CSV: unexpected header");
    std::vector<ContrastRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const std::string where = "contrast CSV line " + std::to_string(lineno);
        if (f.size() != 10) throw IoError(where + ": expected 10 fields");
        ContrastRow r;
        try {
            r.channel = parse_channel_kind(f[0]);
        } catch (const ConfigError&) {
            throw IoError(where + ": unknown channel");
        }
        r.mass = parse_field(f[1], where);
        r.delta_x = parse_field(f[2], where);
        r.delta_t = parse_field(f[3], where);
        r.flight_fraction = parse_field(f[4], where);
        r.temperature = parse_field(f[5], where);
        r.neg_ln_c = parse_field(f[6], where);
        r.contrast = parse_field(f[7], where);
        const auto res = std::from_chars(f[8].data(), f[8].data() + f[8].size(), r.modes_used);
        if (res.ec != std::errc{} || res.ptr != f[8].data() + f[8].size()) throw IoError(where + ": bad modes_used");
        r.fidelity = f[9];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ChannelKind> parse_channel_list(std::string_view list)
{
    std::vector<ChannelKind> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = list.find(',', pos);
        auto item = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (item.empty()) throw ConfigError("channel list has an empty entry");
        const auto k = parse_channel_kind(item);
        if (std::find(out.begin(), out.end(), k) != out.end()) throw ConfigError("channel list repeats a channel");
        out.push_back(k);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Marching squares

Contour feasibility_contour(std::span<const double> xs, std::span<const double> ys,
                            std::span<const double> values, double threshold)
{
    const std::size_t nx = xs.size();
    const std::size_t ny = ys.size();
    if (values.size() != nx * ny) throw DomainError("contour: value count does not match the axes");
    Contour out;
    if (nx < 2 || ny < 2) {
        out.notice = "grid too small for a contour";
        return out;
    }
    double lo = values[0], hi = values[0];
    for (double v : values) {
        if (std::isnan(v)) throw DomainError("contour: NaN in the map");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(threshold > lo && threshold <= hi)) {
        out.notice = "threshold outside data range [" + num::format_double(lo) + ", " + num::format_double(hi) + "]";
        return out;
    }
    auto at = [&](std::size_t ix, std::size_t iy) { return values[iy * nx + ix]; };
    auto above = [&](std::size_t ix, std::size_t iy) { return at(ix, iy) >= threshold; };
    // Edge keys: horizontal edge (ix,iy)-(ix+1,iy) -> 2*(iy*nx+ix), vertical (ix,iy)-(ix,iy+1) -> 2*(iy*nx+ix)+1.
    auto h_key = [&](std::size_t ix, std::size_t iy) { return 2 * (iy * nx + ix); };
    auto v_key = [&](std::size_t ix, std::size_t iy) { return 2 * (iy * nx + ix) + 1; };
    auto lerp = [&](double a, double b, double x0, double x1) {
        const double t = (threshold - a) / (b - a);
        return x0 + t * (x1 - x0);
    };
    auto edge_point = [&](std::size_t key) -> Contour::Point {
        const std::size_t cell = key / 2;
        const std::size_t ix = cell % nx;
        const std::size_t iy = cell / nx;
        if (key % 2 == 0) return {lerp(at(ix, iy), at(ix + 1, iy), xs[ix], xs[ix + 1]), ys[iy]};
        return {xs[ix], lerp(at(ix, iy), at(ix, iy + 1), ys[iy], ys[iy + 1])};
    };

    std::vector<std::array<std::size_t, 2>> segments;
    for (std::size_t iy = 0; iy + 1 < ny; ++iy) {
        for (std::size_t ix = 0; ix + 1 < nx; ++ix) {
            const int code = (above(ix, iy) ? 1 : 0) | (above(ix + 1, iy) ? 2 : 0) | (above(ix + 1, iy + 1) ? 4 : 0) |
                             (above(ix, iy + 1) ? 8 : 0);
            const std::size_t bottom = h_key(ix, iy);
            const std::size_t top = h_key(ix, iy + 1);
            const std::size_t left = v_key(ix, iy);
            const std::size_t right = v_key(ix + 1, iy);
            const double centre = 0.25 * (at(ix, iy) + at(ix + 1, iy) + at(ix + 1, iy + 1) + at(ix, iy + 1));
            switch (code) {
            case 0: case 15: break;
            case 1: case 14: segments.push_back({left, bottom}); break;
            case 2: case 13: segments.push_back({bottom, right}); break;
            case 3: case 12: segments.push_back({left, right}); break;
            case 4: case 11: segments.push_back({right, top}); break;
            case 6: case 9: segments.push_back({bottom, top}); break;
            case 7: case 8: segments.push_back({left, top}); break;
            case 5:
                if (centre >= threshold) {
                    segments.push_back({left, top});
                    segments.push_back({bottom, right});
                } else {
                    segments.push_back({left, bottom});
                    segments.push_back({right, top});
                }
                break;
            case 10:
                if (centre >= threshold) {
                    segments.push_back({left, bottom});
                    segments.push_back({right, top});
                } else {
                    segments.push_back({left, top});
                    segments.push_back({bottom, right});
                }
                break;
            }
        }
    }

    std::map<std::size_t, std::vector<std::size_t>> touching;
    for (std::size_t s = 0; s < segments.size(); ++s)
        for (auto k : segments[s]) touching[k].push_back(s);
    std::vector<bool> used(segments.size(), false);
    auto walk = [&](std::size_t first, std::size_t start_key) {
        std::vector<Contour::Point> line{edge_point(start_key)};
        std::size_t seg = first;
        std::size_t key = start_key;
        for (;;) {
            used[seg] = true;
            key = segments[seg][0] == key ? segments[seg][1] : segments[seg][0];
            line.push_back(edge_point(key));
            std::size_t next = segments.size();
            for (auto s : touching[key])
                if (!used[s]) next = s;
            if (next == segments.size()) break;
            seg = next;
        }
        out.polylines.push_back(std::move(line));
    };
    // Open chains start at edges touched once; closed loops afterwards.
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (used[s]) continue;
        for (auto k : segments[s]) {
            if (!used[s] && touching[k].size() == 1) walk(s, k);
        }
    }
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (!used[s]) walk(s, segments[s][0]);
    return out;
}

void write_contour_csv(std::ostream& out, const Contour& contour)
{
    out << "polyline,x,y\n";
    for (std::size_t i = 0; i < contour.polylines.size(); ++i)
        for (const auto& p : contour.polylines[i])
            out << i << ',' << num::format_double(p[0]) << ',' << num::format_double(p[1]) << '\n';
}

// ---------------------------------------------------------------------------

ScenarioConfig ScenarioConfig::from_json(std::string_view json_text, const fs::path& base_dir)
{
    constexpr std::string_view what = "scenario config";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    detail::reject_unknown(j, {"scenario", "output_dir", "material", "jobs", "parameters"}, what);
    ScenarioConfig c;
    if (!j.contains("scenario") || !j["scenario"].is_string()) throw ConfigError("scenario config: missing 'scenario'");
    c.scenario = j["scenario"].get<std::string>();
    static const char* known[] = {"occupation", "phase_space", "contrast_curves", "contrast_maps", "dipole_estimate",
                                  "custom_sweep"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* k) { return c.scenario == k; }))
        throw ConfigError("scenario config: unknown scenario '" + c.scenario + "'");
    if (!j.contains("output_dir") || !j["output_dir"].is_string())
        throw ConfigError("scenario config: missing 'output_dir'");
    fs::path out = j["output_dir"].get<std::string>();
    c.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
    if (j.contains("material")) {
        const auto& m = j["material"];
        if (m.is_string()) {
            const std::string name = m.get<std::string>();
            fs::path path = name;
            if (name != "diamond" && path.is_relative() && !base_dir.empty()) path = base_dir / path;
            c.material = load_material(name == "diamond" ? name : path.string());
        } else if (m.is_object()) {
            c.material = material_from_json(m.dump());
        } else {
            throw ConfigError("scenario config: material must be a name, a path or an object");
        }
    }
    if (j.contains("jobs")) {
        const double n = detail::get_number(j, "jobs", what);
        if (!(n >= 1.0) || n != std::floor(n) || n > 1024) throw ConfigError("scenario config: jobs must be an integer in [1, 1024]");
        c.jobs = static_cast<unsigned>(n);
    }
    if (j.contains("parameters")) {
        detail::require_object(j["parameters"], "scenario parameters");
        c.parameters_json = j["parameters"].dump();
    }
    return c;
}

std::string run_scenario(const ScenarioConfig& config)
{
    const auto started = std::chrono::steady_clock::now();
    config.material.validate();
    const std::string what = config.scenario + " parameters";
    const json params = detail::parse_json(config.parameters_json, what);
    detail::require_object(params, what);

    ojson summary;
    summary["scenario"] = config.scenario;
    summary["material"] = json::parse(material_to_json(config.material));
    ojson files = ojson::array();
    ojson flags = ojson::array();

    // Everything below parses first, then checks the output directory, then computes.
    if (config.scenario == "occupation" || config.scenario == "phase_space") {
        const auto h = parse_history(params, what);
        prepare_output_dir(config.output_dir);
        const auto scaling = config.scenario == "occupation" ? HistoryScaling::OccupationRatio : HistoryScaling::Dimensionless;
        summary["result"] = run_history(h, config.material, config.output_dir, config.scenario, scaling, files);
        summary["scaling"] = config.scenario == "occupation" ? "n/n(0)" : "u/sigma_u, udot/sigma_udot, n/n(0)";
        summary["temperature"] = h.temperature;
        for (const auto& m : summary["result"]["modes"])
            if (m["below_fundamental"].get<bool>()) {
                flags.push_back("below_fundamental");
                break;
            }
    } else if (config.scenario == "contrast_curves" || config.scenario == "custom_sweep") {
        SweepGrid grid;
        std::vector<ChannelKind> channels;
        if (config.scenario == "contrast_curves") {
            detail::reject_unknown(params, {"masses", "delta_x", "delta_t", "flight_fraction", "temperatures", "channels", "gamma"}, what);
            grid.masses = axis_param(params, "masses", json::array({1e-14, 1e-18}), what);
            grid.delta_x = axis_param(params, "delta_x", kCurveDeltaX, what);
            grid.delta_t = axis_param(params, "delta_t", json::array({1.0}), what);
            grid.flight_fraction = axis_param(params, "flight_fraction", json::array({0.0}), what);
            grid.temperatures = axis_param(params, "temperatures", json::array({4.0, 300.0}), what);
            if (params.contains("gamma")) grid.gamma = parse_gamma(params["gamma"].get<std::string>(), what);
            grid.validate();
            channels = channels_param(params, {ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic}, what);
        } else {
            if (!params.contains("grid")) throw ConfigError("custom_sweep: missing 'grid'");
            detail::reject_unknown(params, {"grid", "channels"}, what);
            grid = SweepGrid::from_json(params["grid"].dump());
            channels = channels_param(params, {ChannelKind::SpinMagnetic}, what);
        }
        prepare_output_dir(config.output_dir);
        const auto rows = sweep(grid, channels, config.material, config.jobs);
        const std::string name = config.scenario == "contrast_curves" ? "contrast_curves.csv" : "sweep.csv";
        write_text(config.output_dir / name, rows_csv(rows));
        files.push_back(name);
        summary["rows"] = rows.size();
        summary["gamma"] = gamma_name(grid.gamma);
        for (const auto& r : rows)
            if (r.fidelity != "exact" && std::find(flags.begin(), flags.end(), r.fidelity) == flags.end())
                flags.push_back(r.fidelity);
    } else if (config.scenario == "contrast_maps") {
        detail::reject_unknown(params, {"map_a", "map_b", "temperature", "channels", "threshold", "gradient_cap", "gamma", "flight_fraction"}, what);
        const auto a = parse_map(params, "map_a", false, what);
        const auto b = parse_map(params, "map_b", true, what);
        const double temperature = number_param(params, "temperature", 300.0, what);
        const double threshold = number_param(params, "threshold", 0.01, what);
        const double cap = number_param(params, "gradient_cap", 1e6, what);
        const double ff = number_param(params, "flight_fraction", 0.0, what);
        const GammaTreatment gamma =
            params.contains("gamma") ? parse_gamma(params["gamma"].get<std::string>(), what) : GammaTreatment::Unit;
        const auto channels = channels_param(params, {ChannelKind::SpinMagnetic, ChannelKind::Diamagnetic}, what);
        if (!(temperature >= 0.0) || !(threshold > 0.0) || !(cap > 0.0) || !(ff >= 0.0 && ff < 1.0))
            throw ConfigError("contrast_maps: invalid temperature, threshold, gradient_cap or flight_fraction");
        prepare_output_dir(config.output_dir);

        ojson maps = ojson::array();
        for (const MapSpec* spec : {&a, &b}) {
            SweepGrid grid;
            grid.masses = spec->mass_axis ? spec->ys : std::vector<double>{spec->fixed};
            grid.delta_x = spec->mass_axis ? std::vector<double>{spec->fixed} : spec->ys;
            grid.delta_t = spec->delta_t;
            grid.flight_fraction = {ff};
            grid.temperatures = {temperature};
            grid.gamma = gamma;
            // Sweep order puts delta_t outside delta_x; map B needs mass inside, so index by hand.
            const std::size_t nx = spec->delta_t.size();
            const std::size_t ny = spec->ys.size();
            std::vector<ContrastRow> rows(nx * ny * channels.size());
            num::parallel_for(nx * ny, config.jobs, [&](std::size_t i) {
                const std::size_t ix = i % nx;
                const std::size_t iy = i / nx;
                SweepGrid::Point pt{};
                pt.mass = spec->mass_axis ? spec->ys[iy] : spec->fixed;
                pt.delta_x = spec->mass_axis ? spec->fixed : spec->ys[iy];
                pt.delta_t = spec->delta_t[ix];
                pt.flight_fraction = ff;
                pt.temperature = temperature;
                try {
                    for (std::size_t c = 0; c < channels.size(); ++c)
                        rows[c * nx * ny + i] = contrast_row(channels[c], pt, config.material, 0.0, gamma);
                } catch (...) {
                    rethrow_with(spec->name + " point " + std::to_string(i) + ": ");
                }
            });
            const std::string y_name = spec->mass_axis ? "M" : "delta_x";
            // Cap curve eta_b = cap: y = 2 mu cap tau_a^2 / fixed.
            {
                std::ostringstream cap_csv;
                cap_csv << "delta_t," << y_name << '\n';
                for (double dt : spec->delta_t) {
                    const double tau_a = dt * (1.0 - ff) / 4.0;
                    cap_csv << num::format_double(dt) << ',' << num::format_double(2.0 * kPhys.mu() * cap * tau_a * tau_a / spec->fixed) << '\n';
                }
                const std::string name = spec->name + "_cap.csv";
                write_text(config.output_dir / name, cap_csv.str());
                files.push_back(name);
            }
            for (std::size_t c = 0; c < channels.size(); ++c) {
                const std::span<const ContrastRow> part(rows.data() + c * nx * ny, nx * ny);
                const std::string stem = spec->name + "_" + channel_name(channels[c]);
                write_text(config.output_dir / (stem + ".csv"), rows_csv(part));
                files.push_back(stem + ".csv");
                // Contour in log10 coordinates, mapped back on output.
                std::vector<double> lx(nx), ly(ny), lv(nx * ny);
                for (std::size_t k = 0; k < nx; ++k) lx[k] = std::log10(spec->delta_t[k]);
                for (std::size_t k = 0; k < ny; ++k) ly[k] = std::log10(spec->ys[k]);
                for (std::size_t k = 0; k < nx * ny; ++k)
                    lv[k] = part[k].neg_ln_c > 0.0 ? std::log10(part[k].neg_ln_c) : -std::numeric_limits<double>::infinity();
                Contour contour = feasibility_contour(lx, ly, lv, std::log10(threshold));
                for (auto& line : contour.polylines)
                    for (auto& p : line) p = {std::pow(10.0, p[0]), std::pow(10.0, p[1])};
                write_text(config.output_dir / (stem + "_contour.csv"),
                           to_text([&](std::ostream& o) { write_contour_csv(o, contour); }));
                files.push_back(stem + "_contour.csv");
                ojson m;
                m["map"] = spec->name;
                m["channel"] = channel_name(channels[c]);
                m["x"] = "delta_t";
                m["y"] = y_name;
                m["fixed"] = spec->fixed;
                m["polylines"] = contour.polylines.size();
                if (!contour.notice.empty()) m["notice"] = contour.notice;
                maps.push_back(m);
            }
        }
        summary["maps"] = maps;
        summary["temperature"] = temperature;
        summary["threshold"] = threshold;
        summary["gradient_cap"] = cap;
        summary["gamma"] = gamma_name(gamma);
        if (gamma == GammaTreatment::Unit) flags.push_back("envelope");
    } else if (config.scenario == "dipole_estimate") {
        detail::reject_unknown(params, {"protocol", "temperature", "eta_e", "eta_e_check", "gamma"}, what);
        const json default_protocol = {{"mass", 1e-15}, {"delta_x_max", 1e-4}, {"delta_t", 1.0}, {"flight_fraction", 0.0}};
        const auto p = protocol_param(params, "protocol", default_protocol);
        const double temperature = number_param(params, "temperature", 4.0, what);
        const auto etas = axis_param(params, "eta_e", json{{"from", 1.0}, {"to", 1e10}, {"per_decade", 1}}, what);
        const double eta_check = number_param(params, "eta_e_check", 30.0, what);
        const GammaTreatment gamma =
            params.contains("gamma") ? parse_gamma(params["gamma"].get<std::string>(), what) : GammaTreatment::Unit;
        if (!(temperature >= 0.0)) throw ConfigError("dipole_estimate: temperature must be >= 0");
        for (double e : etas)
            if (!(e > 0.0)) throw ConfigError("dipole_estimate: eta_e values must be > 0");
        prepare_output_dir(config.output_dir);

        const double omega0 = fundamental_tone_for_mass(p.mass(), config.material);
        const double g2 = gamma == GammaTreatment::Unit ? 1.0 : -1.0;
        ContrastOptions opts;
        opts.gamma = gamma;
        opts.keep_per_mode = false;
        std::ostringstream csv;
        csv << "eta_e,prefactor,neg_ln_c_estimate,neg_ln_c_pipeline\n";
        std::vector<double> lx, ly;
        for (double e : etas) {
            const double pref = dipole_estimate_factor(p, config.material, omega0, e, g2);
            const auto est = ln_contrast_induced_dipole(p, config.material, temperature, e, opts);
            const auto pipe = ln_contrast_induced_dipole_pipeline(p, config.material, temperature, e, opts);
            csv << num::format_double(e) << ',' << num::format_double(pref) << ','
                << num::format_double(est.neg_ln_contrast()) << ',' << num::format_double(pipe.neg_ln_contrast()) << '\n';
            lx.push_back(std::log(e));
            ly.push_back(std::log(pref));
        }
        write_text(config.output_dir / "dipole_estimate.csv", csv.str());
        files.push_back("dipole_estimate.csv");
        double slope = 0.0;
        if (lx.size() >= 2) {
            double mx = 0.0, my = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                mx += lx[i];
                my += ly[i];
            }
            mx /= static_cast<double>(lx.size());
            my /= static_cast<double>(ly.size());
            double sxy = 0.0, sxx = 0.0;
            for (std::size_t i = 0; i < lx.size(); ++i) {
                sxy += (lx[i] - mx) * (ly[i] - my);
                sxx += (lx[i] - mx) * (lx[i] - mx);
            }
            slope = sxy / sxx;
        }
        summary["protocol"] = json::parse(protocol_to_json(p));
        summary["temperature"] = temperature;
        summary["omega0"] = omega0;
        summary["gamma"] = gamma_name(gamma);
        summary["prefactor_eta_1"] = dipole_estimate_factor(p, config.material, omega0, 1.0, g2);
        summary["fit_exponent"] = slope;
        summary["eta_e_check"] = eta_check;
        summary["neg_ln_c_check"] = ln_contrast_induced_dipole(p, config.material, temperature, eta_check, opts).neg_ln_contrast();
        flags.push_back("estimate");
    }

    summary["files"] = files;
    summary["fidelity_flags"] = flags;
    summary["jobs"] = config.jobs;
    summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const std::string text = summary.dump(2);
    write_text(config.output_dir / "summary.json", text + "\n");
    return text;
}

std::string run_sweep(const SweepGrid& grid, std::span<const ChannelKind> channels, const MaterialModel& material,
                      const fs::path& output_dir, unsigned jobs)
{
    const auto started = std::chrono::steady_clock::now();
    grid.validate();
    material.validate();
    if (channels.empty()) throw ConfigError("sweep: no channels");
    prepare_output_dir(output_dir);
    const auto rows = sweep(grid, channels, material, jobs);
    write_text(output_dir / "sweep.csv", rows_csv(rows));
    ojson summary;
    summary["scenario"] = "sweep";
    summary["material"] = json::parse(material_to_json(material));
    summary["rows"] = rows.size();
    summary["gamma"] = gamma_name(grid.gamma);
    summary["files"] = ojson::array({"sweep.csv"});
    summary["jobs"] = jobs;
    summary["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const std::string text = summary.dump(2);
    write_text(output_dir / "summary.json", text + "\n");
    return text;
}

}  // namespace sgp
