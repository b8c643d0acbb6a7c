#ifndef KERROMIT_TEST_SUPPORT_HPP
#define KERROMIT_TEST_SUPPORT_HPP

#include <cmath>
#include <complex>
#include <fstream>
#include <string>

#include <json.hpp>

#include "kerromit/presets.hpp"

namespace test
{
inline const nlohmann::json &reference()
{
    static const nlohmann::json doc = [] {
        std::ifstream in(KERROMIT_REFERENCE_FILE);
        return nlohmann::json::parse(in);
    }();
    return doc;
}

inline std::complex<double> cplx(const nlohmann::json &pair) { return {pair[0].get<double>(), pair[1].get<double>()}; }

inline double rel(double value, double expected) { return std::abs(value - expected) / std::abs(expected); }
inline double rel(std::complex<double> value, std::complex<double> expected)
{
    return std::abs(value - expected) / std::abs(expected);
}

// Reference system with U given directly in rad/s.
inline kerromit::DerivedParams paper(double pump_power = 10e-3, double kerr = 0.0, double detuning_ratio = -1.0)
{
    auto p = kerromit::paper_params(kerr, pump_power, detuning_ratio);
    p.kerr_override->unit = kerromit::KerrUnit::rad_per_s;
    return kerromit::derive(p);
}

inline kerromit::DerivedParams paper_for(const nlohmann::json &c)
{
    return paper(c["P_L_W"].get<double>(), c["U_rad_s"].get<double>(), c["Delta_c_over_omega_m"].get<double>());
}
} // namespace test

#endif
