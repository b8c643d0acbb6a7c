#ifndef KERROMIT_CONFIG_HPP
#define KERROMIT_CONFIG_HPP

#include <array>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "kerromit/error.hpp"
#include "kerromit/params.hpp"

namespace kerromit
{
// Config-file keys. Numbers are SI; U_unit is one of the KerrUnit tags.
inline constexpr std::array<std::string_view, 16> kConfigKeys = {
    "wavelength_m", "mass_kg",       "radius_m",      "n0",
    "n2_m2_per_W",  "V_eff_m3",      "Q",             "omega_m_rad_s",
    "gamma_m_rad_s", "P_L_W",        "probe_ratio",   "P_s_W",
    "Delta_c_rad_s", "U",            "U_unit",        "comment",
};

namespace detail
{
inline bool is_config_key(std::string_view k)
{
    for (auto key : kConfigKeys)
        if (key == k) return true;
    return false;
}

inline double parse_double(std::string_view key, std::string_view text)
{
    double v = 0.0;
    auto first = text.data();
    auto last = text.data() + text.size();
    if (!text.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        throw ConfigError("value '" + std::string(text) + "' for '" + std::string(key) +
                          "' is not a number");
    return v;
}

inline void set_field(PhysicalParams &p, std::string_view key, double v)
{
    if (key == "wavelength_m") p.wavelength = v;
    else if (key == "mass_kg") p.mass = v;
    else if (key == "radius_m") p.radius = v;
    else if (key == "n0") p.n0 = v;
    else if (key == "n2_m2_per_W") p.n2 = v;
    else if (key == "V_eff_m3") p.mode_volume = v;
    else if (key == "Q") p.quality_factor = v;
    else if (key == "omega_m_rad_s") p.omega_m = v;
    else if (key == "gamma_m_rad_s") p.gamma_m = v;
    else if (key == "P_L_W") p.pump_power = v;
    else if (key == "probe_ratio") p.probe_ratio = v;
    else if (key == "P_s_W") p.probe_power = v;
    else if (key == "Delta_c_rad_s") p.pump_detuning = v;
    else if (key == "U") {
        KerrUnit unit = p.kerr_override ? p.kerr_override->unit : KerrUnit::rad_per_s;
        p.kerr_override = KerrOverride{v, unit};
    }
    else throw ConfigError("unknown parameter '" + std::string(key) + "'");
}

inline void set_kerr_unit(PhysicalParams &p, KerrUnit unit)
{
    double v = p.kerr_override ? p.kerr_override->value : 0.0;
    bool had = p.kerr_override.has_value();
    p.kerr_override = KerrOverride{v, unit};
    if (!had) p.kerr_override->value = PhysicalParams::kUnset;
}
} // namespace detail

inline PhysicalParams params_from_json(const nlohmann::json &j)
{
    if (!j.is_object()) throw ConfigError("config must be a single JSON object");
    PhysicalParams p;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string &key = it.key();
        if (!detail::is_config_key(key)) throw ConfigError("unknown config key '" + key + "'");
        if (key == "comment") continue;
        if (key == "U_unit") {
            if (!it->is_string()) throw ConfigError("'U_unit' must be a string");
            detail::set_kerr_unit(p, parse_kerr_unit(it->get<std::string>()));
            continue;
        }
        if (!it->is_number()) throw ConfigError("config key '" + key + "' must be a number");
        detail::set_field(p, key, it->get<double>());
    }
    if (p.kerr_override && std::isnan(p.kerr_override->value))
        throw ConfigError("'U_unit' given without 'U'");
    return p;
}

inline PhysicalParams load_params(const std::string &path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error &e) {
        throw ConfigError("malformed config '" + path + "': " + e.what());
    }
    return params_from_json(j);
}

// Applies one "key=value" override. Setting a field also clears its mutually
// exclusive partner (V_eff_m3 <-> U, probe_ratio <-> P_s_W) so overrides on top
// of a preset or config do not trip the exactly-one-of checks.
inline void apply_override(PhysicalParams &p, std::string_view assignment)
{
    auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0)
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    auto key = assignment.substr(0, eq);
    auto value = assignment.substr(eq + 1);
    if (!detail::is_config_key(key) || key == "comment")
        throw ConfigError("unknown parameter '" + std::string(key) + "'");
    if (key == "U_unit") {
        if (!p.kerr_override) throw ConfigError("'U_unit' override requires 'U'");
        p.kerr_override->unit = parse_kerr_unit(value);
        return;
    }
    double v = detail::parse_double(key, value);
    if (key == "V_eff_m3") p.kerr_override.reset();
    if (key == "U") p.mode_volume.reset();
    if (key == "probe_ratio") p.probe_power.reset();
    if (key == "P_s_W") p.probe_ratio.reset();
    detail::set_field(p, key, v);
}

inline nlohmann::json params_to_json(const PhysicalParams &p)
{
    nlohmann::json j;
    j["wavelength_m"] = p.wavelength;
    j["mass_kg"] = p.mass;
    j["radius_m"] = p.radius;
    if (p.n0) j["n0"] = *p.n0;
    if (p.n2) j["n2_m2_per_W"] = *p.n2;
    if (p.mode_volume) j["V_eff_m3"] = *p.mode_volume;
    j["Q"] = p.quality_factor;
    j["omega_m_rad_s"] = p.omega_m;
    j["gamma_m_rad_s"] = p.gamma_m;
    j["P_L_W"] = p.pump_power;
    if (p.probe_ratio) j["probe_ratio"] = *p.probe_ratio;
    if (p.probe_power) j["P_s_W"] = *p.probe_power;
    j["Delta_c_rad_s"] = p.pump_detuning;
    if (p.kerr_override) {
        j["U"] = p.kerr_override->value;
        j["U_unit"] = std::string(to_string(p.kerr_override->unit));
    }
    return j;
}

inline nlohmann::json derived_to_json(const DerivedParams &d)
{
    return {
        {"omega_c_rad_s", d.omega_c}, {"omega_l_rad_s", d.omega_l}, {"kappa_rad_s", d.kappa},
        {"g_rad_per_s_m", d.g},       {"U_rad_s", d.kerr},          {"U_interpretation", d.kerr_unit},
        {"eps_l", d.eps_l},           {"eps_p", d.eps_p},           {"x_zpf_m", d.x_zpf},
        {"hbar_J_s", d.hbar},         {"mass_kg", d.mass},          {"omega_m_rad_s", d.omega_m},
        {"gamma_m_rad_s", d.gamma_m}, {"Delta_c_rad_s", d.detuning},
        {"Delta_c_over_omega_m", d.detuning / d.omega_m},
    };
}
} // namespace kerromit

#endif
