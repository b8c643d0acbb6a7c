#ifndef KERROMIT_STEADY_STATE_HPP
#define KERROMIT_STEADY_STATE_HPP

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kerromit/cubic.hpp"
#include "kerromit/error.hpp"
#include "kerromit/params.hpp"

namespace kerromit
{
enum class Branch
{
    lower,
    middle,
    upper,
};

inline std::string_view to_string(Branch b)
{
    switch (b) {
    case Branch::lower: return "lower";
    case Branch::middle: return "middle";
    case Branch::upper: return "upper";
    }
    return "?";
}

inline Branch parse_branch(std::string_view s)
{
    if (s == "lower") return Branch::lower;
    if (s == "middle") return Branch::middle;
    if (s == "upper") return Branch::upper;
    throw ValidationError("unknown branch '" + std::string(s) + "' (expected lower, middle or upper)");
}

// Pumped cavity with the probe off.
struct SteadyState
{
    double photons = 0.0;            // n = |a|^2
    std::complex<double> field;      // a, phase fixed by a real positive pump
    double displacement = 0.0;       // x, m
    double kerr_shift = 0.0;         // Delta_omega = -2 U n, rad/s
    double detuning = 0.0;           // Delta = Delta_c - 2 Delta_omega - g x, rad/s
    double linewidth = 0.0;          // Gamma, rad/s
    std::vector<double> roots;       // admissible photon numbers, ascending
    std::size_t branch_index = 0;
    Branch branch = Branch::lower;
    std::vector<std::string> flags;  // "bistable", "near-bistable", "unstable-candidate", "linearly-unstable"
    double growth_rate = 0.0;        // largest real part of the linearized spectrum, 1/s
    DerivedParams params;

    bool has_flag(std::string_view f) const
    {
        for (const auto &s : flags)
            if (s == f) return true;
        return false;
    }
};

inline void validate(const DerivedParams &d)
{
    detail::require_positive(d.kappa, "kappa");
    detail::require_positive(d.mass, "mass");
    detail::require_positive(d.omega_m, "omega_m");
    detail::require_non_negative(d.gamma_m, "gamma_m");
    detail::require_non_negative(d.eps_l, "eps_l");
    detail::require_non_negative(d.eps_p, "eps_p");
    detail::require_non_negative(d.kerr, "U");
    detail::require_positive(d.hbar, "hbar");
    if (!std::isfinite(d.g) || !std::isfinite(d.detuning))
        throw ValidationError("g and Delta_c must be finite");
}

// Static radiation-pressure stiffness per photon: the bracket of the
// self-consistency condition is Delta_c + 2 U n + hbar g^2 n / (m omega_m^2).
// With g < 0 the displacement is positive and -g x > 0, so the Kerr and
// optomechanical shifts enter with the same sign.
inline double shift_per_photon(const DerivedParams &d)
{
    return 2.0 * d.kerr + d.hbar * d.g * d.g / (d.mass * d.omega_m * d.omega_m);
}

// n [kappa^2 + (Delta_c + K n)^2] - eps_l^2 with K = shift_per_photon.
inline Cubic<double> self_consistency_cubic(const DerivedParams &d)
{
    const double k = shift_per_photon(d);
    return {k * k, 2.0 * d.detuning * k, d.kappa * d.kappa + d.detuning * d.detuning,
            -d.eps_l * d.eps_l};
}

inline double omit_linewidth(const DerivedParams &d, double photons)
{
    const double coupling = d.g * d.x_zpf;
    return d.gamma_m + coupling * coupling * photons / d.kappa;
}

// Gamma = gamma_m + (g x_zpf)^2 n / kappa.
inline double omit_linewidth(const SteadyState &ss) { return omit_linewidth(ss.params, ss.photons); }

// Fills every derived field of a steady state from its photon number.
inline SteadyState steady_state_at(const DerivedParams &d, double photons)
{
    SteadyState ss;
    ss.params = d;
    ss.photons = photons;
    ss.displacement = -d.hbar * d.g * photons / (d.mass * d.omega_m * d.omega_m);
    ss.kerr_shift = -2.0 * d.kerr * photons + 0.0; // no -0 at U = 0
    ss.detuning = d.detuning - 2.0 * ss.kerr_shift - d.g * ss.displacement;
    const std::complex<double> denom(d.kappa, -(d.detuning - ss.kerr_shift - d.g * ss.displacement));
    ss.field = d.eps_l / denom;
    ss.linewidth = omit_linewidth(d, photons);
    return ss;
}

// Largest real part among the eigenvalues of the equations of motion
// linearized about the steady state, in (Re da, Im da, x / x_zpf, p / (m omega_m x_zpf)):
//   d da/dt = (i Delta - kappa) da + 2iU a^2 da* - i g a dx
//   d dp/dt = -m omega_m^2 dx - gamma_m dp - 2 hbar g Re(a* da)
// Positive means perturbations grow and the oracle will not settle there.
inline double growth_rate(const SteadyState &ss)
{
    const auto &d = ss.params;
    const std::complex<double> a = ss.field;
    const std::complex<double> A(-d.kappa, ss.detuning);
    const std::complex<double> B = std::complex<double>(0.0, 2.0 * d.kerr) * a * a;
    const std::complex<double> C = std::complex<double>(0.0, -d.g * d.x_zpf) * a;
    const double force = -2.0 * d.hbar * d.g / (d.mass * d.omega_m * d.x_zpf);

    Eigen::Matrix4d m;
    m << A.real() + B.real(), -A.imag() + B.imag(), C.real(), 0.0,
        A.imag() + B.imag(), A.real() - B.real(), C.imag(), 0.0,
        0.0, 0.0, 0.0, d.omega_m,
        force * a.real(), force * a.imag(), -d.omega_m, -d.gamma_m;
    Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
    if (es.info() != Eigen::Success) throw NumericalError("steady state: stability eigenvalues did not converge");
    return es.eigenvalues().real().maxCoeff();
}

// Relative gap below which two roots are treated as one double root.
inline constexpr double kRootMergeTolerance = 1e-6;

inline SteadyState solve_steady_state(const DerivedParams &d, Branch policy = Branch::lower)
{
    validate(d);

    std::vector<double> roots;
    const double k = shift_per_photon(d);
    if (d.eps_l == 0.0) {
        roots = {0.0};
    } else if (k == 0.0) {
        roots = {d.eps_l * d.eps_l / (d.kappa * d.kappa + d.detuning * d.detuning)};
    } else {
        for (double r : real_roots(self_consistency_cubic(d)))
            if (r > 0.0) roots.push_back(r);
    }
    if (roots.empty())
        throw NumericalError("steady state: self-consistency cubic has no positive root");

    std::vector<std::string> flags;
    if (roots.size() == 3) {
        flags.emplace_back("bistable");
        for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
            if (roots[i + 1] - roots[i] <= kRootMergeTolerance * roots[i + 1]) {
                const double mean = 0.5 * (roots[i] + roots[i + 1]);
                roots[i] = roots[i + 1] = mean;
                flags.emplace_back("near-bistable");
                break;
            }
        }
    }

    std::size_t index = 0;
    switch (policy) {
    case Branch::lower: index = 0; break;
    case Branch::upper: index = roots.size() - 1; break;
    case Branch::middle:
        if (roots.size() != 3) {
            throw ValidationError("middle branch requested but only one steady state exists (n = " +
                                  std::to_string(roots.front()) + "); available: lower, upper");
        }
        index = 1;
        flags.emplace_back("unstable-candidate");
        break;
    }

    SteadyState ss = steady_state_at(d, roots[index]);
    ss.roots = std::move(roots);
    ss.branch_index = index;
    ss.branch = policy;
    ss.flags = std::move(flags);
    ss.growth_rate = growth_rate(ss);
    if (ss.growth_rate > 0.0) ss.flags.emplace_back("linearly-unstable");
    return ss;
}

// Residual of a = eps_l / (-i(Delta_c - Delta_omega - g x) + kappa) with the
// shifts recomputed from |a|^2.
inline double field_equation_residual(const SteadyState &ss)
{
    const auto &d = ss.params;
    const double n = std::norm(ss.field);
    const double bracket = d.detuning + shift_per_photon(d) * n;
    return std::abs(ss.field * std::complex<double>(d.kappa, -bracket) - d.eps_l);
}

inline DerivedParams with_pump_power(DerivedParams d, double pump_power)
{
    detail::require_non_negative(pump_power, "P_L_W");
    d.eps_l = std::sqrt(d.kappa * pump_power / (d.hbar * d.omega_l));
    return d;
}

inline DerivedParams with_kerr(DerivedParams d, double kerr)
{
    detail::require_non_negative(kerr, "U");
    d.kerr = kerr;
    return d;
}

struct KerrShiftRow
{
    double pump_power = 0.0; // W
    double kerr = 0.0;       // rad/s
    SteadyState state;
};

// Delta_omega over a (P_L, U) grid, P_L-major. The probe amplitude is left
// untouched; only eps_l follows P_L.
inline std::vector<KerrShiftRow> kerr_shift_curve(const DerivedParams &d,
                                                  std::span<const double> pump_powers,
                                                  std::span<const double> kerr_values,
                                                  Branch policy = Branch::lower)
{
    if (pump_powers.empty() || kerr_values.empty())
        throw ValidationError("kerr_shift_curve: grids must be non-empty");
    std::vector<KerrShiftRow> rows;
    rows.reserve(pump_powers.size() * kerr_values.size());
    for (double p : pump_powers) {
        for (double u : kerr_values) {
            try {
                rows.push_back({p, u, solve_steady_state(with_kerr(with_pump_power(d, p), u), policy)});
            } catch (const NumericalError &e) {
                throw NumericalError("kerr_shift_curve at P_L=" + std::to_string(p) +
                                     " W, U=" + std::to_string(u) + " rad/s: " + e.what());
            } catch (const ValidationError &e) {
                throw ValidationError("kerr_shift_curve at P_L=" + std::to_string(p) +
                                      " W, U=" + std::to_string(u) + " rad/s: " + e.what());
            }
        }
    }
    return rows;
}
} // namespace kerromit

#endif
