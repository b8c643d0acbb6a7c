#ifndef KERROMIT_ORACLE_HPP
#define KERROMIT_ORACLE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kerromit/error.hpp"
#include "kerromit/response.hpp"
#include "kerromit/rk4.hpp"
#include "kerromit/steady_state.hpp"

namespace kerromit
{
// Classical state of the pumped resonator in the frame rotating at omega_l.
struct ResonatorState
{
    cplx field;              // a, sqrt(photons)
    double position = 0.0;   // x, m
    double momentum = 0.0;   // p, kg m/s

    friend ResonatorState operator+(const ResonatorState &l, const ResonatorState &r)
    {
        return {l.field + r.field, l.position + r.position, l.momentum + r.momentum};
    }
    friend ResonatorState operator*(double s, const ResonatorState &v)
    {
        return {s * v.field, s * v.position, s * v.momentum};
    }
};

// Full nonlinear equations of motion, no linearization:
//   da/dt = (i Delta_c - kappa) a - i g a x + 2 i U |a|^2 a + eps_l + eps_p e^{-i W t}
//   dx/dt = p / m
//   dp/dt = -m omega_m^2 x - gamma_m p - hbar g |a|^2
struct ResonatorEom
{
    DerivedParams params;
    double beat = 0.0;

    ResonatorState operator()(double t, const ResonatorState &s) const
    {
        const auto &d = params;
        const double n = std::norm(s.field);
        const cplx drive = d.eps_l + d.eps_p * std::polar(1.0, -beat * t);
        const cplx da = cplx(-d.kappa, d.detuning) * s.field - kI * d.g * s.field * s.position +
                        2.0 * kI * d.kerr * n * s.field + drive;
        const double dx = s.momentum / d.mass;
        const double dp = -d.mass * d.omega_m * d.omega_m * s.position - d.gamma_m * s.momentum -
                          d.hbar * d.g * n;
        return {da, dx, dp};
    }
};

enum class InitialCondition
{
    analytic, // (a, x, 0) of the selected steady-state branch
    zero,
};

struct OracleConfig
{
    int steps_per_period = 400;        // per fastest of 2pi/W, 2pi/omega_m, 1/kappa
    double burn_in_damping_times = 5.0; // in units of the slowest relaxation time
    double max_burn_in_s = 1e-4;       // cap on the damping-time rule
    std::optional<double> burn_in_s;   // overrides the damping-time rule
    double tolerance = 1e-3;           // successive-window agreement, relative
    int window_periods = 50;           // beat periods per demodulation window
    int max_windows = 40;
    InitialCondition initial = InitialCondition::analytic;
    double initial_perturbation = 0.0; // relative offset applied to the analytic start
    Branch branch = Branch::lower;
};

inline void validate(const OracleConfig &c)
{
    if (c.steps_per_period < 100) throw ValidationError("oracle: steps_per_period must be >= 100");
    if (c.window_periods < 20) throw ValidationError("oracle: window_periods must be >= 20");
    if (!(c.tolerance > 0.0 && c.tolerance <= 1e-2)) throw ValidationError("oracle: tolerance must lie in (0, 1e-2]");
    if (c.max_windows < 2) throw ValidationError("oracle: max_windows must be >= 2");
    if (!(c.burn_in_damping_times >= 0.0)) throw ValidationError("oracle: burn-in must be non-negative");
    if (c.burn_in_s && !(*c.burn_in_s >= 0.0)) throw ValidationError("oracle: burn-in must be non-negative");
    if (!(c.max_burn_in_s >= 0.0)) throw ValidationError("oracle: burn-in cap must be non-negative");
}

struct DemodResult
{
    double beat = 0.0;
    double eps_p = 0.0;
    double kappa = 0.0;
    std::array<cplx, 5> field{};   // a_k for k = -2..2, a(t) ~ sum a_k e^{-i k W t}
    std::array<cplx, 3> motion{};  // x_k for k = 0..2, x_{-k} = conj(x_k)
    double residual_fraction = 0.0; // fluctuation power outside |k| <= 2
    double convergence = 0.0;       // last successive-window metric
    double mean_photons = 0.0;      // <|a|^2> over the final window
    int windows = 0;
    double step = 0.0;              // s
    double burn_in = 0.0;           // s
    // branch metadata of the analytic steady state used to start
    std::string branch;
    std::size_t root_count = 0;
    std::vector<std::string> flags;

    cplx harmonic(int k) const { return field.at(static_cast<std::size_t>(k + 2)); }
    cplx transmission() const { return 1.0 - kappa / eps_p * harmonic(1); }
    double transmission_power() const { return std::norm(transmission()); }
    double efficiency() const { return kappa * std::abs(harmonic(2)) / eps_p; }
};

using TrajectoryObserver = std::function<void(double, const ResonatorState &)>;

struct StepPlan
{
    double step = 0.0;      // s
    long steps_per_beat = 0; // integer, so every window spans whole beat periods
};

inline StepPlan plan_steps(const DerivedParams &d, double beat, int steps_per_period)
{
    const double beat_period = kTwoPi / beat;
    const double fastest = std::min({beat_period, kTwoPi / d.omega_m, 1.0 / d.kappa});
    const long n = static_cast<long>(std::ceil(steps_per_period * beat_period / fastest));
    return {beat_period / static_cast<double>(n), n};
}

// Integrates the full equations at beat frequency W and demodulates the
// retained harmonics over whole beat periods (trapezoidal rule, which is
// spectrally accurate for periodic integrands).
inline DemodResult integrate(const DerivedParams &d, double beat, const OracleConfig &cfg = {},
                             const TrajectoryObserver &observer = {})
{
    validate(d);
    validate(cfg);
    require_beat(beat);

    const SteadyState ss = solve_steady_state(d, cfg.branch);
    const ResonatorEom eom{d, beat};
    const StepPlan plan = plan_steps(d, beat, cfg.steps_per_period);
    const long per_beat = plan.steps_per_beat;
    const double h = plan.step;

    ResonatorState state;
    if (cfg.initial == InitialCondition::analytic) {
        const double s = 1.0 + cfg.initial_perturbation;
        state = {s * ss.field, s * ss.displacement, 0.0};
    }

    // slowest relaxation: Gamma, or the least-damped linearized mode if slower
    const double relax = ss.growth_rate < 0.0 ? std::min(ss.linewidth, -ss.growth_rate) : ss.linewidth;
    const double burn_s =
        cfg.burn_in_s.value_or(std::min(cfg.burn_in_damping_times / relax, cfg.max_burn_in_s));
    const long burn_beats = static_cast<long>(std::ceil(burn_s * beat / kTwoPi));

    // a blow-up bound well above any attainable steady photon number
    const double photon_limit = 100.0 * std::pow(d.eps_l + d.eps_p, 2) / (d.kappa * d.kappa) + 1.0;

    long step_index = 0;
    auto advance = [&](long count, const std::function<void(long, const ResonatorState &)> &sample) {
        for (long i = 0; i < count; ++i) {
            const double t = static_cast<double>(step_index) * h;
            if (sample) sample(i, state);
            if (observer) observer(t, state);
            state = rk4_step(eom, t, state, h);
            ++step_index;
            if ((step_index % per_beat) == 0) {
                const double n = std::norm(state.field);
                if (!std::isfinite(n) || !std::isfinite(state.position) || n > photon_limit)
                    throw InstabilityError("oracle: state diverged at t = " + std::to_string(t) +
                                           " s (try another branch or a smaller step)");
            }
        }
    };

    advance(burn_beats * per_beat, {});

    // e^{i 2 pi j / N}: every sample sits on t = (integer) h, so the harmonic
    // phases are exact table lookups
    std::vector<cplx> unit(static_cast<std::size_t>(per_beat));
    for (long j = 0; j < per_beat; ++j)
        unit[static_cast<std::size_t>(j)] = std::polar(1.0, kTwoPi * static_cast<double>(j) / static_cast<double>(per_beat));

    const long window_steps = static_cast<long>(cfg.window_periods) * per_beat;
    std::vector<cplx> samples(static_cast<std::size_t>(window_steps) + 1);
    std::vector<double> positions(samples.size());

    DemodResult out;
    out.beat = beat;
    out.eps_p = d.eps_p;
    out.kappa = d.kappa;
    out.step = h;
    out.burn_in = static_cast<double>(burn_beats) * kTwoPi / beat;
    out.branch = std::string(to_string(ss.branch));
    out.root_count = ss.roots.size();
    out.flags = ss.flags;

    std::array<cplx, 5> previous{};
    double metric = std::numeric_limits<double>::infinity();
    const double floor = 1e-6 * (std::abs(ss.field) + d.eps_p / d.kappa);

    for (int w = 0; w < cfg.max_windows; ++w) {
        const long phase0 = step_index % per_beat;
        advance(window_steps, [&](long i, const ResonatorState &s) {
            samples[static_cast<std::size_t>(i)] = s.field;
            positions[static_cast<std::size_t>(i)] = s.position;
        });
        samples.back() = state.field;
        positions.back() = state.position;

        std::array<cplx, 5> field{};
        std::array<cplx, 3> motion{};
        double photons = 0.0;
        for (long i = 0; i <= window_steps; ++i) {
            const double weight = (i == 0 || i == window_steps) ? 0.5 : 1.0;
            const long j = (phase0 + i) % per_beat;
            const cplx a = samples[static_cast<std::size_t>(i)];
            const double x = positions[static_cast<std::size_t>(i)];
            photons += weight * std::norm(a);
            for (int k = -2; k <= 2; ++k) {
                const long idx = ((static_cast<long>(k) * j) % per_beat + per_beat) % per_beat;
                field[static_cast<std::size_t>(k + 2)] += weight * a * unit[static_cast<std::size_t>(idx)];
            }
            for (int k = 0; k <= 2; ++k)
                motion[static_cast<std::size_t>(k)] += weight * x * unit[static_cast<std::size_t>((k * j) % per_beat)];
        }
        const double norm = static_cast<double>(window_steps);
        for (auto &v : field) v /= norm;
        for (auto &v : motion) v /= norm;
        photons /= norm;

        if (w > 0) {
            metric = 0.0;
            for (std::size_t k = 0; k < field.size(); ++k) {
                const double scale = std::max(std::abs(field[k]), floor);
                metric = std::max(metric, std::abs(field[k] - previous[k]) / scale);
            }
        }
        previous = field;

        out.field = field;
        out.motion = motion;
        out.mean_photons = photons;
        out.windows = w + 1;
        out.convergence = metric;

        if (w > 0 && metric < cfg.tolerance) {
            double outside = 0.0, total = 0.0;
            for (long i = 0; i <= window_steps; ++i) {
                const double weight = (i == 0 || i == window_steps) ? 0.5 : 1.0;
                const long j = (phase0 + i) % per_beat;
                cplx model = 0.0;
                for (int k = -2; k <= 2; ++k) {
                    const long idx = ((static_cast<long>(-k) * j) % per_beat + per_beat) % per_beat;
                    model += field[static_cast<std::size_t>(k + 2)] * unit[static_cast<std::size_t>(idx)];
                }
                const cplx a = samples[static_cast<std::size_t>(i)];
                outside += weight * std::norm(a - model);
                total += weight * std::norm(a - field[2]);
            }
            out.residual_fraction = total > 0.0 ? outside / total : 0.0;
            return out;
        }
    }
    std::string why;
    if (ss.growth_rate > 0.0)
        why = "; the steady state is linearly unstable (growth rate " + std::to_string(ss.growth_rate) + " 1/s)";
    throw ConvergenceError("oracle: demodulated amplitudes did not settle within " +
                               std::to_string(cfg.max_windows) + " windows (last metric " +
                               std::to_string(metric) + ")" + why,
                           metric);
}

struct HarmonicDeviation
{
    std::string name;
    cplx analytic;
    cplx oracle;
    double relative = 0.0;
};

struct ComparisonTolerances
{
    double first_order = 0.01;
    double second_order = 0.10;
};

struct ComparisonReport
{
    double beat = 0.0;
    std::vector<HarmonicDeviation> harmonics;
    double tp_abs2_analytic = 0.0, tp_abs2_oracle = 0.0, tp_abs2_relative = 0.0;
    double eta_analytic = 0.0, eta_oracle = 0.0, eta_relative = 0.0;
    ComparisonTolerances tolerances;
    bool pass = false;
    std::string branch;
    std::vector<std::string> flags;

    const HarmonicDeviation &harmonic(const std::string &name) const
    {
        for (const auto &h : harmonics)
            if (h.name == name) return h;
        throw ValidationError("no harmonic named " + name);
    }
};

inline double relative_deviation(cplx value, cplx reference)
{
    const double scale = std::max(std::abs(reference), 1e-300);
    return std::abs(value - reference) / scale;
}

// Pass requires the two upper sidebands A1- and A2- within their tolerances.
// The remaining harmonics and the derived observables are reported.
inline ComparisonReport compare(const SidebandResponse &analytic, const DemodResult &oracle,
                                const ComparisonTolerances &tol = {})
{
    const double tol_beat = 1e-12 * std::max(std::abs(analytic.beat), 1.0);
    if (std::abs(analytic.beat - oracle.beat) > tol_beat || analytic.eps_p != oracle.eps_p ||
        analytic.kappa != oracle.kappa)
        throw ValidationError("compare: analytic and oracle results belong to different parameters");
    if (analytic.eps_p == 0.0) throw ValidationError("compare: probe amplitude is zero");

    ComparisonReport r;
    r.beat = analytic.beat;
    r.tolerances = tol;
    r.branch = oracle.branch;
    r.flags = oracle.flags;
    auto add = [&](const char *name, cplx a, cplx o) {
        r.harmonics.push_back({name, a, o, relative_deviation(a, o)});
    };
    add("A1-", analytic.a1_minus, oracle.harmonic(1));
    add("A1+", analytic.a1_plus, oracle.harmonic(-1));
    add("A2-", analytic.a2_minus, oracle.harmonic(2));
    add("A2+", analytic.a2_plus, oracle.harmonic(-2));
    add("X1", analytic.x1, oracle.motion[1]);
    add("X2", analytic.x2, oracle.motion[2]);

    r.tp_abs2_analytic = analytic.transmission_power;
    r.tp_abs2_oracle = oracle.transmission_power();
    r.tp_abs2_relative = std::abs(r.tp_abs2_analytic - r.tp_abs2_oracle) / std::max(r.tp_abs2_oracle, 1e-300);
    r.eta_analytic = analytic.efficiency;
    r.eta_oracle = oracle.efficiency();
    r.eta_relative = std::abs(r.eta_analytic - r.eta_oracle) / std::max(r.eta_oracle, 1e-300);

    r.pass = r.harmonic("A1-").relative <= tol.first_order && r.harmonic("A2-").relative <= tol.second_order;
    return r;
}

inline nlohmann::json to_json(const ComparisonReport &r)
{
    nlohmann::json h = nlohmann::json::array();
    for (const auto &d : r.harmonics) {
        h.push_back({{"name", d.name},
                     {"analytic", {d.analytic.real(), d.analytic.imag()}},
                     {"oracle", {d.oracle.real(), d.oracle.imag()}},
                     {"relative_deviation", d.relative}});
    }
    return {
        {"omega_rad_s", r.beat},
        {"harmonics", h},
        {"tp_abs2", {{"analytic", r.tp_abs2_analytic}, {"oracle", r.tp_abs2_oracle}, {"relative_deviation", r.tp_abs2_relative}}},
        {"eta", {{"analytic", r.eta_analytic}, {"oracle", r.eta_oracle}, {"relative_deviation", r.eta_relative}}},
        {"tolerances", {{"first_order", r.tolerances.first_order}, {"second_order", r.tolerances.second_order}}},
        {"branch", r.branch},
        {"flags", r.flags},
        {"pass", r.pass},
    };
}

inline nlohmann::json to_json(const DemodResult &d)
{
    nlohmann::json field = nlohmann::json::object();
    for (int k = -2; k <= 2; ++k) {
        auto v = d.harmonic(k);
        field[std::to_string(k)] = {v.real(), v.imag()};
    }
    nlohmann::json motion = nlohmann::json::object();
    for (int k = 0; k <= 2; ++k) motion[std::to_string(k)] = {d.motion[static_cast<std::size_t>(k)].real(), d.motion[static_cast<std::size_t>(k)].imag()};
    return {
        {"omega_rad_s", d.beat},      {"field_harmonics", field},      {"motion_harmonics", motion},
        {"residual_fraction", d.residual_fraction}, {"convergence", d.convergence},
        {"mean_photons", d.mean_photons}, {"windows", d.windows}, {"step_s", d.step},
        {"burn_in_s", d.burn_in},     {"branch", d.branch},            {"root_count", d.root_count},
        {"flags", d.flags},
    };
}
} // namespace kerromit

#endif
