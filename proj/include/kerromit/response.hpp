#ifndef KERROMIT_RESPONSE_HPP
#define KERROMIT_RESPONSE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kerromit/error.hpp"
#include "kerromit/linalg.hpp"
#include "kerromit/parallel.hpp"
#include "kerromit/steady_state.hpp"

namespace kerromit
{
using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

// Sideband amplitudes follow the ansatz
//   delta a = A1- e^{-i W t} + A1+ e^{i W t} + A2- e^{-2i W t} + A2+ e^{2i W t}
//   delta x = X1 e^{-i W t} + c.c. + X2 e^{-2i W t} + c.c.
// with W the probe-pump beat frequency. Every g^2 coupling to the mechanical
// susceptibility carries hbar (radiation-pressure force -hbar g |a|^2).

struct ResponseCoefficients
{
    cplx alpha_plus;   // -iW + i Delta + kappa
    cplx alpha_minus;  // -iW - i Delta + kappa
    cplx alpha_mech;   // m (omega_m^2 - i gamma_m W - W^2)
    cplx lambda_plus;  // -2iW + i Delta + kappa
    cplx lambda_minus; // -2iW - i Delta + kappa
    cplx lambda_mech;  // m (omega_m^2 - 2i gamma_m W - 4 W^2)
    cplx beta;         // -(2 U alpha_mech + hbar g^2) n / (i g (alpha_plus + i Delta_omega))
    double beat = 0.0;
};

inline void require_beat(double beat)
{
    if (!(beat > 0.0) || !std::isfinite(beat))
        throw ValidationError("probe beat frequency must be a finite positive number");
}

inline ResponseCoefficients coefficients(const SteadyState &ss, double beat)
{
    require_beat(beat);
    const auto &d = ss.params;
    const double delta = ss.detuning;
    ResponseCoefficients c;
    c.beat = beat;
    c.alpha_plus = cplx(d.kappa, -beat + delta);
    c.alpha_minus = cplx(d.kappa, -beat - delta);
    c.alpha_mech = d.mass * cplx(d.omega_m * d.omega_m - beat * beat, -d.gamma_m * beat);
    c.lambda_plus = cplx(d.kappa, -2.0 * beat + delta);
    c.lambda_minus = cplx(d.kappa, -2.0 * beat - delta);
    c.lambda_mech = d.mass * cplx(d.omega_m * d.omega_m - 4.0 * beat * beat, -2.0 * d.gamma_m * beat);

    const cplx pole = c.alpha_plus + kI * ss.kerr_shift;
    const cplx numerator = -(2.0 * d.kerr * c.alpha_mech + d.hbar * d.g * d.g) * ss.photons;
    if (numerator == 0.0) {
        c.beta = 0.0;
    } else if (d.g == 0.0 || std::abs(pole) == 0.0) {
        throw SingularityError("beta coefficient has a pole (alpha_+ + i Delta_omega = " +
                               std::to_string(std::abs(pole)) + ", g = " + std::to_string(d.g) +
                               ", W = " + std::to_string(beat) + " rad/s)");
    } else {
        c.beta = numerator / (kI * d.g * pole);
    }
    return c;
}

struct SidebandAmplitudes
{
    cplx minus;  // A-, upper sideband (omega_l + k W)
    cplx plus;   // A+, lower sideband (omega_l - k W)
    cplx motion; // X
    double condition = 0.0;
};

namespace detail
{
// Shared 3x3 operator in the unknowns (A-, A+*, X):
//   [ lm        -2iU a^2     i g a   ]
//   [ 2iU a*^2   lp          -i g a* ]
//   [ hbar g a*  hbar g a    mech    ]
inline Matrix3c sideband_operator(const SteadyState &ss, cplx lm, cplx lp, cplx mech)
{
    const auto &d = ss.params;
    const cplx a = ss.field;
    const cplx ac = std::conj(a);
    Matrix3c m;
    m << lm, -2.0 * kI * d.kerr * a * a, kI * d.g * a,
        2.0 * kI * d.kerr * ac * ac, lp, -kI * d.g * ac,
        d.hbar * d.g * ac, d.hbar * d.g * a, mech;
    return m;
}
} // namespace detail

// First-order sidebands sourced by the probe alone.
inline SidebandAmplitudes first_order(const SteadyState &ss, double beat)
{
    const auto c = coefficients(ss, beat);
    const Matrix3c m = detail::sideband_operator(ss, c.alpha_minus, c.alpha_plus, c.alpha_mech);
    Vector3c rhs(ss.params.eps_p, 0.0, 0.0);
    auto sol = solve_equilibrated(m, rhs);
    return {sol.x(0), std::conj(sol.x(1)), sol.x(2), sol.condition};
}

// Which products of first-order amplitudes drive the second-order sideband.
//   standard  : optomechanical products only (A1- X1, A1+* X1, A1- A1+*)
//   with_kerr : additionally the second-order Kerr terms
//               2iU (a* (A1-)^2 + 2 a A1- A1+*) that the full equations of
//               motion contain
enum class SecondOrderSources
{
    standard,
    with_kerr,
};

inline std::string_view to_string(SecondOrderSources s)
{
    return s == SecondOrderSources::standard ? "standard" : "with_kerr";
}

inline SecondOrderSources parse_second_order_sources(std::string_view s)
{
    if (s == "standard") return SecondOrderSources::standard;
    if (s == "with_kerr" || s == "with-kerr") return SecondOrderSources::with_kerr;
    throw ValidationError("unknown second-order source model '" + std::string(s) +
                          "' (expected standard or with_kerr)");
}

inline SidebandAmplitudes second_order(const SteadyState &ss, const SidebandAmplitudes &first, double beat,
                                       SecondOrderSources sources = SecondOrderSources::standard)
{
    const auto c = coefficients(ss, beat);
    const auto &d = ss.params;
    const cplx a = ss.field;
    const cplx ac = std::conj(a);
    const cplx a1m = first.minus;
    const cplx a1pc = std::conj(first.plus);
    const cplx x1 = first.motion;

    Vector3c rhs(-kI * d.g * a1m * x1, kI * d.g * a1pc * x1, -d.hbar * d.g * a1m * a1pc);
    if (sources == SecondOrderSources::with_kerr) {
        rhs(0) += 2.0 * kI * d.kerr * (ac * a1m * a1m + 2.0 * a * a1m * a1pc);
        rhs(1) -= 2.0 * kI * d.kerr * (a * a1pc * a1pc + 2.0 * ac * a1m * a1pc);
    }
    if (rhs.isZero(0.0)) return {0.0, 0.0, 0.0, 1.0};

    const Matrix3c m = detail::sideband_operator(ss, c.lambda_minus, c.lambda_plus, c.lambda_mech);
    auto sol = solve_equilibrated(m, rhs);
    return {sol.x(0), std::conj(sol.x(1)), sol.x(2), sol.condition};
}

struct ClosedFormFirst
{
    cplx minus; // A1-
    cplx motion; // X1
};

namespace detail
{
inline void require_nonvanishing(cplx denom, double scale, const char *what, double beat)
{
    if (!(std::abs(denom) > 1e-14 * scale))
        throw SingularityError(std::string(what) + ": denominator vanishes at W = " + std::to_string(beat) +
                               " rad/s");
}
} // namespace detail

// Eliminated form of the first-order system:
//   A1- = (a0 a+ + i hbar g^2 n) / D eps_p
//   X1  = -(a+ + i Dw) hbar g a* / D eps_p
//   D   = a0 a+ a- - Dw^2 a0 + 2 hbar g^2 n (Delta + Dw)
inline ClosedFormFirst closed_form_first(const SteadyState &ss, double beat)
{
    const auto c = coefficients(ss, beat);
    const auto &d = ss.params;
    const double n = ss.photons;
    const double dw = ss.kerr_shift;
    const double hg2n = d.hbar * d.g * d.g * n;

    const cplx t1 = c.alpha_mech * c.alpha_plus * c.alpha_minus;
    const cplx t2 = dw * dw * c.alpha_mech;
    const double t3 = 2.0 * hg2n * (ss.detuning + dw);
    const cplx denom = t1 - t2 + t3;
    detail::require_nonvanishing(denom, std::abs(t1) + std::abs(t2) + std::abs(t3), "closed_form_first", beat);

    const cplx a1m = (c.alpha_mech * c.alpha_plus + kI * hg2n) / denom * d.eps_p;
    const cplx x1 = -(c.alpha_plus + kI * dw) * d.hbar * d.g * std::conj(ss.field) / denom * d.eps_p;
    return {a1m, x1};
}

struct ClosedFormSecond
{
    cplx minus;            // A2- from the printed closed form
    cplx reference;        // A2- from the 3x3 solve with standard sources
    double relative_delta; // |minus - reference| / |reference|
};

// Printed closed form for A2- (hbar restored on the g^2 terms):
//   A2- = [g (l+ + i Dw) beta - (l0 l- + i hbar g^2 n)] / L A1- X1
//       + [-(2U l0 + hbar g^2) beta g a*] / L X1^2
//   L   = l0 l+ l- - Dw^2 l0 + 2 hbar g^2 n (Delta + Dw)
// Evaluated as written and compared against second_order; the delta is the
// output, it is not expected to vanish.
inline ClosedFormSecond closed_form_second(const SteadyState &ss, const SidebandAmplitudes &first, double beat)
{
    const auto c = coefficients(ss, beat);
    const auto &d = ss.params;
    const double n = ss.photons;
    const double dw = ss.kerr_shift;
    const double hg2 = d.hbar * d.g * d.g;

    const cplx t1 = c.lambda_mech * c.lambda_plus * c.lambda_minus;
    const cplx t2 = dw * dw * c.lambda_mech;
    const double t3 = 2.0 * hg2 * n * (ss.detuning + dw);
    const cplx denom = t1 - t2 + t3;
    detail::require_nonvanishing(denom, std::abs(t1) + std::abs(t2) + std::abs(t3), "closed_form_second", beat);

    const cplx upconverted =
        (d.g * (c.lambda_plus + kI * dw) * c.beta - (c.lambda_mech * c.lambda_minus + kI * hg2 * n)) / denom;
    const cplx direct = -(2.0 * d.kerr * c.lambda_mech + hg2) * c.beta * d.g * std::conj(ss.field) / denom;
    const cplx a2m = upconverted * first.minus * first.motion + direct * first.motion * first.motion;

    const cplx ref = second_order(ss, first, beat).minus;
    const double delta = std::abs(ref) > 0.0 ? std::abs(a2m - ref) / std::abs(ref) : std::abs(a2m);
    return {a2m, ref, delta};
}

enum class Method
{
    matrix,
    closed_form,
};

inline std::string_view to_string(Method m) { return m == Method::matrix ? "matrix" : "closed-form"; }

inline Method parse_method(std::string_view s)
{
    if (s == "matrix") return Method::matrix;
    if (s == "closed-form" || s == "closed_form") return Method::closed_form;
    throw ValidationError("unknown response method '" + std::string(s) + "'");
}

struct ResponseOptions
{
    Method method = Method::matrix;
    SecondOrderSources sources = SecondOrderSources::standard;
};

struct SidebandResponse
{
    double beat = 0.0;
    cplx a1_minus, a1_plus, x1;
    cplx a2_minus, a2_plus, x2;
    cplx transmission;     // t_p = 1 - kappa A1- / eps_p
    cplx second_sideband;  // s2 = -kappa A2- / eps_p
    double transmission_power = 0.0; // |t_p|^2
    double efficiency = 0.0;         // eta = |s2|
    cplx pump_output;      // s0 = eps_l / sqrt(kappa) - sqrt(kappa) a
    cplx probe_output;     // s1 = eps_p / sqrt(kappa) - sqrt(kappa) A1-
    Method method = Method::matrix;
    SecondOrderSources sources = SecondOrderSources::standard;
    std::optional<double> closed_form_delta; // set for Method::closed_form
    double eps_p = 0.0;
    double kappa = 0.0;
};

namespace detail
{
inline SidebandAmplitudes first_order_by(const SteadyState &ss, double beat, Method method)
{
    if (method == Method::matrix) return first_order(ss, beat);
    auto cf = closed_form_first(ss, beat);
    const auto c = coefficients(ss, beat);
    const auto &d = ss.params;
    const cplx ac = std::conj(ss.field);
    // second row of the first-order system solved for A1+*
    const cplx a1pc = (kI * d.g * ac * cf.motion - 2.0 * kI * d.kerr * ac * ac * cf.minus) / c.alpha_plus;
    return {cf.minus, std::conj(a1pc), cf.motion, 0.0};
}
} // namespace detail

inline SidebandResponse observables(const SteadyState &ss, double beat, const ResponseOptions &opt = {})
{
    const auto &d = ss.params;
    SidebandResponse r;
    r.beat = beat;
    r.method = opt.method;
    r.sources = opt.sources;
    r.eps_p = d.eps_p;
    r.kappa = d.kappa;
    r.pump_output = d.eps_l / std::sqrt(d.kappa) - std::sqrt(d.kappa) * ss.field;

    if (d.eps_p == 0.0) {
        // amplitudes vanish; t_p is probe-independent, take it from a unit probe
        SteadyState unit = ss;
        unit.params.eps_p = 1.0;
        auto first = detail::first_order_by(unit, beat, opt.method);
        r.transmission = 1.0 - d.kappa * first.minus;
        r.transmission_power = std::norm(r.transmission);
        r.probe_output = 0.0;
        return r;
    }

    const auto first = detail::first_order_by(ss, beat, opt.method);
    const auto second = second_order(ss, first, beat, opt.sources);
    r.a1_minus = first.minus;
    r.a1_plus = first.plus;
    r.x1 = first.motion;
    r.a2_minus = second.minus;
    r.a2_plus = second.plus;
    r.x2 = second.motion;
    if (opt.method == Method::closed_form) {
        auto cf = closed_form_second(ss, first, beat);
        r.a2_minus = cf.minus;
        r.closed_form_delta = cf.relative_delta;
    }

    r.transmission = 1.0 - d.kappa / d.eps_p * r.a1_minus;
    r.second_sideband = -d.kappa / d.eps_p * r.a2_minus;
    r.transmission_power = std::norm(r.transmission);
    r.efficiency = std::abs(r.second_sideband);
    r.probe_output = d.eps_p / std::sqrt(d.kappa) - std::sqrt(d.kappa) * r.a1_minus;
    return r;
}

struct GroupDelays
{
    double tau1 = 0.0;       // d arg(t_p)/dW, s (Richardson-extrapolated)
    double tau2 = 0.0;       // (1/2) d arg(s2)/dW, s
    double tau1_error = 0.0; // Richardson error estimate, s
    double tau2_error = 0.0;
    double tau1_coarse = 0.0; // central difference at step h
    double tau2_coarse = 0.0;
    double tau1_fine = 0.0;   // central difference at step h/2
    double tau2_fine = 0.0;
    double step = 0.0;        // h, rad/s
    double beat = 0.0;        // evaluation point, rad/s
};

struct DelayOptions
{
    double step_fraction = 1e-3; // h / Gamma (OMIT linewidth), clamped to [1e-6, 0.1]
    ResponseOptions response{};
    std::optional<double> beat;  // defaults to omega_m
};

namespace detail
{
// Phase increment from z_minus to z_plus, unwrapped into (-pi, pi].
inline double phase_step(cplx z_plus, cplx z_minus, double limit)
{
    const double dphi = std::arg(z_plus * std::conj(z_minus));
    if (std::abs(dphi) > limit)
        throw StepSizeError("phase changes by " + std::to_string(dphi) +
                            " rad across the difference stencil; use a smaller step");
    return dphi;
}
} // namespace detail

inline GroupDelays group_delays(const SteadyState &ss, const DelayOptions &opt = {})
{
    const auto &d = ss.params;
    SteadyState probe = ss;
    if (probe.params.eps_p == 0.0) probe.params.eps_p = 1.0; // phases do not depend on eps_p

    const double beat = opt.beat.value_or(d.omega_m);
    // the narrowest feature near W = omega_m is the transparency window
    const double frac = std::clamp(opt.step_fraction, 1e-6, 0.1);
    const double h = frac * ss.linewidth;
    constexpr double kJumpLimit = std::numbers::pi / 2.0;

    auto central = [&](double step) {
        auto up = observables(probe, beat + step, opt.response);
        auto dn = observables(probe, beat - step, opt.response);
        const double t1 = detail::phase_step(up.transmission, dn.transmission, kJumpLimit) / (2.0 * step);
        const double t2 = detail::phase_step(up.second_sideband, dn.second_sideband, kJumpLimit) / (4.0 * step);
        return std::pair{t1, t2};
    };

    auto [c1, c2] = central(h);
    auto [f1, f2] = central(0.5 * h);

    GroupDelays g;
    g.step = h;
    g.beat = beat;
    g.tau1_coarse = c1;
    g.tau2_coarse = c2;
    g.tau1_fine = f1;
    g.tau2_fine = f2;
    g.tau1 = f1 + (f1 - c1) / 3.0;
    g.tau2 = f2 + (f2 - c2) / 3.0;
    g.tau1_error = std::abs(f1 - c1) / 3.0;
    g.tau2_error = std::abs(f2 - c2) / 3.0;
    return g;
}

struct SpectrumRow
{
    double beat = 0.0;
    std::optional<SidebandResponse> response;
    std::string error; // non-empty when the point failed
};

struct Spectrum
{
    SteadyState steady;
    std::vector<SpectrumRow> rows;
};

// One steady-state solve, then independent per-point responses. Failures are
// recorded in the row and the sweep continues.
inline Spectrum spectrum(const DerivedParams &d, std::span<const double> beats, const ResponseOptions &opt = {},
                         Branch branch = Branch::lower, unsigned jobs = 1)
{
    if (beats.empty()) throw ValidationError("spectrum: grid is empty");
    for (std::size_t i = 0; i < beats.size(); ++i) {
        if (!(beats[i] > 0.0) || beats[i] > 2.0 * d.omega_m)
            throw ValidationError("spectrum: grid must lie in (0, 2 omega_m]");
        if (i > 0 && !(beats[i] > beats[i - 1]))
            throw ValidationError("spectrum: grid must be sorted ascending");
    }
    Spectrum s;
    s.steady = solve_steady_state(d, branch);
    s.rows.resize(beats.size());
    parallel_for(beats.size(), jobs, [&](std::size_t i) {
        SpectrumRow row;
        row.beat = beats[i];
        try {
            row.response = observables(s.steady, beats[i], opt);
        } catch (const std::exception &e) {
            row.error = e.what();
        }
        s.rows[i] = std::move(row);
    });
    return s;
}

// Uniform grid, inclusive of both ends.
inline std::vector<double> linspace(double lo, double hi, std::size_t count)
{
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    for (std::size_t i = 0; i < count; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    v.back() = hi;
    return v;
}
} // namespace kerromit

#endif
