#ifndef KERROMIT_PARAMS_HPP
#define KERROMIT_PARAMS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "kerromit/constants.hpp"
#include "kerromit/error.hpp"

namespace kerromit
{
// Unit tag carried by a Kerr-coefficient override.
//   rad_per_s : value is U in rad/s
//   hz        : value is U/2pi, multiplied by 2pi on ingest
//   hz_paper  : the figure-label convention ("U = 8 Hz"); resolved to one of
//               the two above by the caller (see resolve_paper_tag)
enum class KerrUnit
{
    rad_per_s,
    hz,
    hz_paper,
};

inline std::string_view to_string(KerrUnit u)
{
    switch (u) {
    case KerrUnit::rad_per_s: return "rad_per_s";
    case KerrUnit::hz: return "hz";
    case KerrUnit::hz_paper: return "hz_paper";
    }
    return "?";
}

inline KerrUnit parse_kerr_unit(std::string_view s)
{
    if (s == "rad_per_s") return KerrUnit::rad_per_s;
    if (s == "hz") return KerrUnit::hz;
    if (s == "hz_paper") return KerrUnit::hz_paper;
    throw ConfigError("unknown Kerr unit tag '" + std::string(s) +
                      "' (expected rad_per_s, hz or hz_paper)");
}

struct KerrOverride
{
    double value = 0.0;
    KerrUnit unit = KerrUnit::rad_per_s;
};

// Experimental inputs, SI units throughout. Required scalars default to NaN so
// that a forgotten field fails validation by name.
struct PhysicalParams
{
    static constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

    double wavelength = kUnset;       // m
    double mass = kUnset;             // kg
    double radius = kUnset;           // m
    std::optional<double> n0;         // linear index, needed with mode_volume
    std::optional<double> n2;         // m^2/W, needed with mode_volume
    std::optional<double> mode_volume; // m^3
    double quality_factor = kUnset;
    double omega_m = kUnset;          // rad/s
    double gamma_m = kUnset;          // rad/s
    double pump_power = kUnset;       // W
    std::optional<double> probe_ratio; // eps_p / eps_l
    std::optional<double> probe_power; // W
    double pump_detuning = 0.0;       // Delta_c = omega_l - omega_c, rad/s
    std::optional<KerrOverride> kerr_override;
};

// Rate quantities consumed by every solver. Plain aggregate so tests can build
// idealized systems (g = 0, U = 0, ...) directly.
struct DerivedParams
{
    double omega_c = 0.0;  // cavity resonance, rad/s
    double omega_l = 0.0;  // pump, rad/s
    double kappa = 0.0;    // cavity decay, rad/s
    double g = 0.0;        // optomechanical coupling, rad/(s*m), negative
    double kerr = 0.0;     // U, rad/s
    double eps_l = 0.0;    // pump amplitude, sqrt(photons)/s
    double eps_p = 0.0;    // probe amplitude, sqrt(photons)/s
    double x_zpf = 0.0;    // m
    double hbar = kHbar;   // J*s
    double mass = 0.0;     // kg
    double omega_m = 0.0;  // rad/s
    double gamma_m = 0.0;  // rad/s
    double detuning = 0.0; // Delta_c, rad/s
    std::string kerr_unit = "rad_per_s"; // how a U override was interpreted

    double probe_frequency(double beat) const { return omega_l + beat; }
};

namespace detail
{
inline void require_positive(double v, const char *name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string("field '") + name +
                              "' must be a finite positive number");
}

inline void require_non_negative(double v, const char *name)
{
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError(std::string("field '") + name +
                              "' must be a finite non-negative number");
}
} // namespace detail

// Kerr coefficient of a cavity mode, U = hbar omega_c^2 c n2 / (n0^2 V_eff).
inline double kerr_coefficient(double omega_c, double n0, double n2, double mode_volume)
{
    return kHbar * omega_c * omega_c * kSpeedOfLight * n2 / (n0 * n0 * mode_volume);
}

inline double kerr_override_rad_per_s(const KerrOverride &k, KerrUnit paper_tag_as)
{
    KerrUnit u = k.unit == KerrUnit::hz_paper ? paper_tag_as : k.unit;
    return u == KerrUnit::hz ? kTwoPi * k.value : k.value;
}

inline void validate(const PhysicalParams &p)
{
    using detail::require_non_negative;
    using detail::require_positive;

    require_positive(p.wavelength, "wavelength_m");
    require_positive(p.mass, "mass_kg");
    require_positive(p.radius, "radius_m");
    require_positive(p.quality_factor, "Q");
    require_positive(p.omega_m, "omega_m_rad_s");
    require_positive(p.gamma_m, "gamma_m_rad_s");
    require_non_negative(p.pump_power, "P_L_W");
    if (!std::isfinite(p.pump_detuning))
        throw ValidationError("field 'Delta_c_rad_s' must be finite");

    if (p.mode_volume.has_value() == p.kerr_override.has_value())
        throw ConfigError("exactly one of 'V_eff_m3' and 'U' must be supplied");
    if (p.mode_volume) {
        require_positive(*p.mode_volume, "V_eff_m3");
        if (!p.n0 || !p.n2)
            throw ConfigError("'n0' and 'n2_m2_per_W' are required when 'V_eff_m3' is given");
    }
    if (p.n0) require_positive(*p.n0, "n0");
    if (p.n2) require_positive(*p.n2, "n2_m2_per_W");
    if (p.kerr_override) require_non_negative(p.kerr_override->value, "U");

    if (p.probe_ratio.has_value() == p.probe_power.has_value())
        throw ConfigError("exactly one of 'probe_ratio' and 'P_s_W' must be supplied");
    if (p.probe_ratio) require_non_negative(*p.probe_ratio, "probe_ratio");
    if (p.probe_power) require_non_negative(*p.probe_power, "P_s_W");
}

// Converts experimental inputs to SI rates. hbar is explicit everywhere:
// eps = sqrt(kappa P / (hbar omega)), and the probe amplitude derived from a
// power is evaluated once at omega_p = omega_l + omega_m.
inline DerivedParams derive(const PhysicalParams &p,
                            KerrUnit paper_tag_as = KerrUnit::rad_per_s)
{
    validate(p);
    if (paper_tag_as == KerrUnit::hz_paper)
        throw ConfigError("hz_paper must resolve to rad_per_s or hz");

    DerivedParams d;
    d.hbar = kHbar;
    d.omega_c = kTwoPi * kSpeedOfLight / p.wavelength;
    d.omega_l = d.omega_c + p.pump_detuning;
    if (!(d.omega_l > 0.0))
        throw ValidationError("field 'Delta_c_rad_s' puts the pump at non-positive frequency");
    d.kappa = d.omega_c / p.quality_factor;
    d.g = -d.omega_c / p.radius;
    d.mass = p.mass;
    d.omega_m = p.omega_m;
    d.gamma_m = p.gamma_m;
    d.detuning = p.pump_detuning;
    d.x_zpf = std::sqrt(kHbar / (2.0 * p.mass * p.omega_m));
    d.eps_l = std::sqrt(d.kappa * p.pump_power / (kHbar * d.omega_l));

    if (p.probe_ratio) {
        d.eps_p = *p.probe_ratio * d.eps_l;
    } else {
        double omega_p = d.omega_l + p.omega_m;
        d.eps_p = std::sqrt(d.kappa * *p.probe_power / (kHbar * omega_p));
    }

    if (p.kerr_override) {
        d.kerr = kerr_override_rad_per_s(*p.kerr_override, paper_tag_as);
        KerrUnit applied = p.kerr_override->unit == KerrUnit::hz_paper ? paper_tag_as
                                                                       : p.kerr_override->unit;
        d.kerr_unit = std::string(to_string(applied));
        if (p.kerr_override->unit == KerrUnit::hz_paper)
            d.kerr_unit = "hz_paper->" + d.kerr_unit;
    } else {
        d.kerr = kerr_coefficient(d.omega_c, *p.n0, *p.n2, *p.mode_volume);
        d.kerr_unit = "from_mode_volume";
    }
    return d;
}
} // namespace kerromit

#endif
