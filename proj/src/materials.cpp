#include "sgphonon/materials.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "sgphonon/constants.hpp"
#include "sgphonon/errors.hpp"

namespace sgp {

void MaterialModel::validate() const
{
    if (!(density > 0.0) || !std::isfinite(density)) throw DomainError("material density must be > 0");
    if (!(sound_speed > 0.0) || !std::isfinite(sound_speed))
        throw DomainError("material sound speed must be > 0");
    if (!(dielectric > 1.0) || !std::isfinite(dielectric))
        throw DomainError("material dielectric constant must be > 1");
    if (!std::isfinite(susceptibility)) throw DomainError("material susceptibility must be finite");
}

MaterialModel MaterialModel::diamond()
{
    return {"diamond", 3.51e3, 1.75e4, -6.2e-9, 5.7};
}

MaterialModel material_from_json(std::string_view json_text)
{
    constexpr std::string_view what = "material";
    const auto j = detail::parse_json(json_text, what);
    detail::require_object(j, what);
    detail::reject_unknown(j, {"name", "density", "sound_speed", "susceptibility", "dielectric"}, what);
    if (!j.contains("name") || !j["name"].is_string())
        throw ConfigError("material: missing string field 'name'");
    MaterialModel m;
    m.name = j["name"].get<std::string>();
    m.density = detail::get_number(j, "density", what);
    m.sound_speed = detail::get_number(j, "sound_speed", what);
    m.susceptibility = detail::get_number(j, "susceptibility", what);
    m.dielectric = detail::get_number(j, "dielectric", what);
    try {
        m.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("material: ") + e.what());
    }
    return m;
}

std::string material_to_json(const MaterialModel& m)
{
    nlohmann::json j{{"name", m.name},
                     {"density", m.density},
                     {"sound_speed", m.sound_speed},
                     {"susceptibility", m.susceptibility},
                     {"dielectric", m.dielectric}};
    return j.dump();
}

MaterialModel load_material(std::string_view name_or_path)
{
    if (name_or_path == "diamond") return MaterialModel::diamond();
    const std::filesystem::path path{std::string(name_or_path)};
    std::ifstream in(path);
    if (!in) throw ConfigError("unknown material preset or unreadable file: " + std::string(name_or_path));
    std::stringstream buf;
    buf << in.rdbuf();
    return material_from_json(buf.str());
}

double cube_side(double mass, const MaterialModel& material)
{
    if (!(mass > 0.0)) throw DomainError("cube_side: mass must be > 0");
    material.validate();
    return std::cbrt(mass / material.density);
}

double fundamental_tone(double side, double sound_speed)
{
    if (!(side > 0.0)) throw DomainError("fundamental_tone: side length must be > 0");
    if (!(sound_speed > 0.0)) throw DomainError("fundamental_tone: sound speed must be > 0");
    return kPi * sound_speed / side;
}

double fundamental_tone_for_mass(double mass, const MaterialModel& material)
{
    return fundamental_tone(cube_side(mass, material), material.sound_speed);
}

TruncationPolicy TruncationPolicy::fixed(std::size_t modes)
{
    TruncationPolicy p;
    p.kind = Kind::Fixed;
    p.modes = modes;
    return p;
}

TruncationPolicy TruncationPolicy::adaptive(double tolerance, std::size_t cap)
{
    TruncationPolicy p;
    p.kind = Kind::Adaptive;
    p.tolerance = tolerance;
    p.cap = cap;
    return p;
}

ModeLadder::ModeLadder(double omega0, TruncationPolicy policy) : omega0_(omega0), policy_(policy)
{
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw DomainError("mode ladder: omega0 must be > 0");
    if (policy_.kind == TruncationPolicy::Kind::Fixed && policy_.modes == 0)
        throw DomainError("mode ladder: empty ladder requested");
    if (policy_.kind == TruncationPolicy::Kind::Adaptive) {
        if (policy_.cap == 0) throw DomainError("mode ladder: adaptive cap must be >= 1");
        if (!(policy_.tolerance > 0.0)) throw DomainError("mode ladder: tolerance must be > 0");
    }
}

std::vector<double> ModeLadder::frequencies(std::size_t count) const
{
    if (count == 0) {
        if (policy_.kind != TruncationPolicy::Kind::Fixed)
            throw DomainError("mode ladder: adaptive ladder needs an explicit count");
        count = policy_.modes;
    }
    std::vector<double> out(count);
    for (std::size_t n = 1; n <= count; ++n) out[n - 1] = frequency(n);
    return out;
}

LadderSum ModeLadder::accumulate(const Term& term, const Term& envelope, double decay) const
{
    LadderSum result;
    if (policy_.kind == TruncationPolicy::Kind::Fixed) {
        result.terms.reserve(policy_.modes);
        for (std::size_t n = 1; n <= policy_.modes; ++n) {
            const double v = term(n, frequency(n));
            result.terms.push_back(v);
            result.total += v;
        }
        result.modes_used = policy_.modes;
        const double env = envelope(policy_.modes, frequency(policy_.modes));
        result.tail_bound = decay > 1.0 ? env * static_cast<double>(policy_.modes) / (decay - 1.0) : 0.0;
        result.converged = true;
        return result;
    }
    if (!(decay > 1.0)) throw DomainError("mode ladder: adaptive sums need decay exponent > 1");
    result.converged = false;
    for (std::size_t n = 1; n <= policy_.cap; ++n) {
        const double w = frequency(n);
        const double v = term(n, w);
        result.terms.push_back(v);
        result.total += v;
        result.modes_used = n;
        const double tail = envelope(n, w) * static_cast<double>(n) / (decay - 1.0);
        result.tail_bound = tail;
        if (tail <= policy_.tolerance * std::fabs(result.total)) {
            result.converged = true;
            break;
        }
    }
    return result;
}

ModeLadder mode_ladder(double omega0, TruncationPolicy policy)
{
    return ModeLadder(omega0, policy);
}

}  // namespace sgp
