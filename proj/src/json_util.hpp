#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "sgphonon/numerics.hpp"

#include "json.hpp"

#include "sgphonon/errors.hpp"

namespace sgp::detail {

using nlohmann::json;

inline json parse_json(std::string_view text, std::string_view what)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string(what) + ": invalid JSON: " + e.what());
    }
}

inline void require_object(const json& j, std::string_view what)
{
    if (!j.is_object()) throw ConfigError(std::string(what) + ": expected a JSON object");
}

/// ConfigError for any key outside `allowed`.
inline void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed,
                           std::string_view what)
{
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) throw ConfigError(std::string(what) + ": unknown field '" + key + "'");
    }
}

inline double get_number(const json& j, const char* key, std::string_view what)
{
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string(what) + ": missing field '" + key + "'");
    if (!it->is_number()) throw ConfigError(std::string(what) + ": field '" + key + "' must be a number");
    return it->get<double>();
}

inline double get_number_or(const json& j, const char* key, double fallback, std::string_view what)
{
    return j.contains(key) ? get_number(j, key, what) : fallback;
}

/// An axis is an array of numbers, {from, to, per_decade} or {from, to, count}.
inline std::vector<double> parse_axis(const json& j, const std::string& key, std::string_view what)
{
    const std::string where = std::string(what) + ": axis '" + key + "'";
    std::vector<double> out;
    if (j.is_array()) {
        for (const auto& v : j) {
            if (!v.is_number()) throw ConfigError(where + " must hold numbers");
            out.push_back(v.get<double>());
        }
    } else if (j.is_number()) {
        out.push_back(j.get<double>());
    } else if (j.is_object()) {
        reject_unknown(j, {"from", "to", "per_decade", "count"}, where);
        const double from = get_number(j, "from", where);
        const double to = get_number(j, "to", where);
        if (j.contains("per_decade") == j.contains("count"))
            throw ConfigError(where + " needs exactly one of per_decade or count");
        try {
            if (j.contains("per_decade")) {
                const double pd = get_number(j, "per_decade", where);
                if (!(pd >= 1.0) || pd != std::floor(pd)) throw ConfigError(where + ": per_decade must be a positive integer");
                out = num::logspace_per_decade(from, to, static_cast<std::size_t>(pd));
            } else {
                const double n = get_number(j, "count", where);
                if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError(where + ": count must be a positive integer");
                out = num::logspace(from, to, static_cast<std::size_t>(n));
            }
        } catch (const DomainError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    } else {
        throw ConfigError(where + " must be an array, a number or a range object");
    }
    if (out.empty()) throw ConfigError(where + " is empty");
    for (double v : out)
        if (!std::isfinite(v)) throw ConfigError(where + " holds a non-finite value");
    return out;
}

}  // namespace sgp::detail
