#ifndef KERROMIT_SWEEPS_HPP
#define KERROMIT_SWEEPS_HPP

#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kerromit/config.hpp"
#include "kerromit/constants.hpp"
#include "kerromit/oracle.hpp"
#include "kerromit/parallel.hpp"
#include "kerromit/response.hpp"
#include "kerromit/steady_state.hpp"
#include "kerromit/table.hpp"

namespace kerromit
{
enum class Axis
{
    beat,        // Omega / omega_m
    pump_power,  // P_L, W
    kerr,        // U, in the unit tag of the base parameters
    detuning,    // Delta_c / omega_m
};

inline std::string_view to_string(Axis a)
{
    switch (a) {
    case Axis::beat: return "omega";
    case Axis::pump_power: return "P_L";
    case Axis::kerr: return "U";
    case Axis::detuning: return "Delta_c";
    }
    return "?";
}

inline Axis parse_axis(std::string_view s)
{
    if (s == "omega" || s == "Omega") return Axis::beat;
    if (s == "P_L") return Axis::pump_power;
    if (s == "U") return Axis::kerr;
    if (s == "Delta_c") return Axis::detuning;
    throw ValidationError("unknown sweep axis '" + std::string(s) + "' (expected omega, P_L, U or Delta_c)");
}

// Column name carrying the axis value in sweep tables.
inline std::string_view axis_column(Axis a)
{
    switch (a) {
    case Axis::beat: return "omega_over_omegam";
    case Axis::pump_power: return "P_L_W";
    case Axis::kerr: return "U";
    case Axis::detuning: return "Delta_c_over_omega_m";
    }
    return "?";
}

enum class SweepMethod
{
    matrix,
    closed_form,
    oracle,
};

inline std::string_view to_string(SweepMethod m)
{
    switch (m) {
    case SweepMethod::matrix: return "matrix";
    case SweepMethod::closed_form: return "closed-form";
    case SweepMethod::oracle: return "oracle";
    }
    return "?";
}

inline SweepMethod parse_sweep_method(std::string_view s)
{
    if (s == "oracle") return SweepMethod::oracle;
    return parse_method(s) == Method::matrix ? SweepMethod::matrix : SweepMethod::closed_form;
}

struct SweepSpec
{
    Axis axis = Axis::beat;
    double min = 0.8;
    double max = 1.2;
    std::size_t count = 2001;
    std::vector<std::string> overrides; // key=value, applied on top of the base parameters
    SweepMethod method = SweepMethod::matrix;
    SecondOrderSources sources = SecondOrderSources::standard;
    Format format = Format::csv;
    std::string output;
    Branch branch = Branch::lower;
    OracleConfig oracle{};
    unsigned jobs = 1;
    double beat_ratio = 1.0; // Omega / omega_m for the non-Omega axes
};

// Config key an axis would collide with when also given as a fixed override.
inline std::vector<std::string_view> axis_keys(Axis a)
{
    switch (a) {
    case Axis::beat: return {};
    case Axis::pump_power: return {"P_L_W"};
    case Axis::kerr: return {"U", "V_eff_m3"};
    case Axis::detuning: return {"Delta_c_rad_s"};
    }
    return {};
}

inline void validate(const SweepSpec &s)
{
    if (s.count < 1) throw ValidationError("sweep: point count must be >= 1");
    if (!std::isfinite(s.min) || !std::isfinite(s.max)) throw ValidationError("sweep: grid bounds must be finite");
    if (s.count > 1 && !(s.min < s.max)) throw ValidationError("sweep: min must be < max when count > 1");
    for (const auto &o : s.overrides) {
        const auto key = std::string_view(o).substr(0, o.find('='));
        for (auto k : axis_keys(s.axis))
            if (key == k)
                throw ValidationError("sweep: '" + std::string(key) + "' is the sweep axis and cannot also be fixed");
    }
    if (!(s.beat_ratio > 0.0 && s.beat_ratio <= 2.0))
        throw ValidationError("sweep: Omega/omega_m must lie in (0, 2]");
    if (s.jobs < 1) throw ValidationError("sweep: --jobs must be >= 1");
    validate(s.oracle);
}

inline std::vector<double> grid(const SweepSpec &s) { return linspace(s.min, s.max, s.count); }

// Base parameters with one axis value applied.
inline PhysicalParams at_axis_value(PhysicalParams p, Axis axis, double value)
{
    switch (axis) {
    case Axis::beat: break;
    case Axis::pump_power: p.pump_power = value; break;
    case Axis::kerr: {
        const KerrUnit unit = p.kerr_override ? p.kerr_override->unit : KerrUnit::rad_per_s;
        p.mode_volume.reset();
        p.kerr_override = KerrOverride{value, unit};
        break;
    }
    case Axis::detuning: p.pump_detuning = value * p.omega_m; break;
    }
    return p;
}

// ---- metadata -------------------------------------------------------------

inline std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Provenance
{
    std::string command;
    bool reproducible = false;
    std::optional<PhysicalParams> physical;
    std::optional<DerivedParams> derived;
    ordered_json extra = ordered_json::object();
};

inline ordered_json metadata(const Provenance &p, const std::vector<std::string> &columns)
{
    ordered_json m = ordered_json::object();
    m["code_version"] = std::string(kVersion);
    m["command"] = p.command;
    if (!p.reproducible) m["generated_utc"] = utc_timestamp();
    m["columns"] = columns;
    if (p.physical) m["parameters"] = ordered_json::parse(params_to_json(*p.physical).dump());
    if (p.derived) {
        m["derived"] = ordered_json::parse(derived_to_json(*p.derived).dump());
        m["kerr_unit_interpretation"] = p.derived->kerr_unit;
    }
    for (auto it = p.extra.begin(); it != p.extra.end(); ++it) m[it.key()] = it.value();
    return m;
}

namespace detail
{
inline ordered_json complex_pair(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

inline std::string join_flags(const std::vector<std::string> &flags)
{
    std::string s;
    for (const auto &f : flags) s += (s.empty() ? "" : ";") + f;
    return s;
}
} // namespace detail

// ---- steady state ---------------------------------------------------------

inline const std::vector<std::string> kSteadyColumns = {
    "P_L_W", "U_rad_s", "n", "dw_rad_s", "Delta_rad_s", "Gamma_rad_s", "branch",
    "Delta_over_omega_m", "Delta_c_over_omega_m", "root_count", "flags",
};

inline std::vector<Cell> steady_row(double pump_power, const SteadyState &ss)
{
    const auto &d = ss.params;
    return {pump_power, d.kerr, ss.photons, ss.kerr_shift, ss.detuning, ss.linewidth,
            std::string(to_string(ss.branch)), ss.detuning / d.omega_m, d.detuning / d.omega_m,
            static_cast<double>(ss.roots.size()), detail::join_flags(ss.flags)};
}

inline ordered_json steady_detail(const SteadyState &ss)
{
    return {{"field", detail::complex_pair(ss.field)},
            {"displacement_m", ss.displacement},
            {"roots", ss.roots},
            {"branch_index", ss.branch_index},
            {"growth_rate_s", ss.growth_rate}};
}

// ---- spectrum -------------------------------------------------------------

inline const std::vector<std::string> kSpectrumColumns = {
    "omega_over_omegam", "tp_abs2", "eta", "arg_tp_rad", "arg_s2_rad", "method", "omega_rad_s", "status",
};

inline ordered_json response_detail(const SidebandResponse &r)
{
    ordered_json j = {{"A1_minus", detail::complex_pair(r.a1_minus)}, {"A1_plus", detail::complex_pair(r.a1_plus)},
                      {"X1", detail::complex_pair(r.x1)},             {"A2_minus", detail::complex_pair(r.a2_minus)},
                      {"A2_plus", detail::complex_pair(r.a2_plus)},   {"X2", detail::complex_pair(r.x2)},
                      {"t_p", detail::complex_pair(r.transmission)},  {"s2", detail::complex_pair(r.second_sideband)},
                      {"s0", detail::complex_pair(r.pump_output)},    {"s1", detail::complex_pair(r.probe_output)},
                      {"second_order_sources", std::string(to_string(r.sources))}};
    if (r.closed_form_delta) j["closed_form_second_order_delta"] = *r.closed_form_delta;
    return j;
}

inline std::vector<Cell> failed_spectrum_row(double omega_m, double beat, std::string_view method,
                                             const std::string &error)
{
    return {beat / omega_m, kNaN, kNaN, kNaN, kNaN, std::string(method), beat, "error: " + error};
}

inline Table spectrum_table(const Spectrum &s, const Provenance &prov)
{
    Table t;
    t.name = "spectrum";
    t.columns = kSpectrumColumns;
    const double wm = s.steady.params.omega_m;
    for (const auto &row : s.rows) {
        if (!row.response) {
            t.add_row(failed_spectrum_row(wm, row.beat, "matrix", row.error));
            continue;
        }
        const auto &r = *row.response;
        t.add_row({row.beat / wm, r.transmission_power, r.efficiency, std::arg(r.transmission),
                   std::arg(r.second_sideband), std::string(to_string(r.method)), row.beat, "ok"},
                  response_detail(r));
    }
    Provenance p = prov;
    p.derived = s.steady.params;
    p.extra["steady_state"] = {{"n", s.steady.photons},
                               {"Delta_rad_s", s.steady.detuning},
                               {"Gamma_rad_s", s.steady.linewidth},
                               {"branch", std::string(to_string(s.steady.branch))},
                               {"root_count", s.steady.roots.size()},
                               {"growth_rate_s", s.steady.growth_rate},
                               {"flags", s.steady.flags}};
    t.metadata = metadata(p, t.columns);
    return t;
}

// Oracle-backed spectrum: one time-domain integration per point.
inline Table oracle_spectrum_table(const DerivedParams &d, std::span<const double> beats, const OracleConfig &cfg,
                                   unsigned jobs, const Provenance &prov,
                                   const std::function<TrajectoryObserver(std::size_t)> &observer = {})
{
    std::vector<std::optional<DemodResult>> results(beats.size());
    std::vector<std::string> errors(beats.size());
    parallel_for(beats.size(), jobs, [&](std::size_t i) {
        try {
            results[i] = integrate(d, beats[i], cfg, observer ? observer(i) : TrajectoryObserver{});
        } catch (const NumericalError &e) {
            errors[i] = e.what();
        }
    });
    Table t;
    t.name = "spectrum";
    t.columns = kSpectrumColumns;
    for (std::size_t i = 0; i < beats.size(); ++i) {
        if (!results[i]) {
            t.add_row(failed_spectrum_row(d.omega_m, beats[i], "oracle", errors[i]));
            continue;
        }
        const auto &r = *results[i];
        const cplx s2 = -d.kappa / d.eps_p * r.harmonic(2);
        t.add_row({beats[i] / d.omega_m, r.transmission_power(), r.efficiency(), std::arg(r.transmission()),
                   std::arg(s2), "oracle", beats[i], "ok"},
                  ordered_json::parse(to_json(r).dump()));
    }
    Provenance p = prov;
    p.derived = d;
    p.extra["oracle"] = {{"steps_per_period", cfg.steps_per_period},
                         {"tolerance", cfg.tolerance},
                         {"window_periods", cfg.window_periods},
                         {"max_windows", cfg.max_windows}};
    t.metadata = metadata(p, t.columns);
    return t;
}

// ---- axis sweeps at fixed Omega (group delays) -----------------------------

struct DelayPoint
{
    double axis_value = 0.0;
    std::optional<SteadyState> steady;
    std::optional<GroupDelays> delays;
    std::optional<SidebandResponse> response;
    std::string error;
};

inline std::vector<DelayPoint> delay_sweep(const PhysicalParams &base, KerrUnit paper_tag_as, Axis axis,
                                           std::span<const double> values, double beat_ratio,
                                           const ResponseOptions &opt, Branch branch, unsigned jobs)
{
    if (axis == Axis::beat) throw ValidationError("delay sweeps run at fixed Omega; choose P_L, U or Delta_c");
    std::vector<DelayPoint> out(values.size());
    // validation problems surface before any work is scheduled
    for (double v : values) (void)derive(at_axis_value(base, axis, v), paper_tag_as);
    parallel_for(values.size(), jobs, [&](std::size_t i) {
        DelayPoint pt;
        pt.axis_value = values[i];
        try {
            const auto d = derive(at_axis_value(base, axis, values[i]), paper_tag_as);
            pt.steady = solve_steady_state(d, branch);
            const double beat = beat_ratio * d.omega_m;
            pt.delays = group_delays(*pt.steady, {.response = opt, .beat = beat});
            pt.response = observables(*pt.steady, beat, opt);
        } catch (const NumericalError &e) {
            pt.error = e.what();
        } catch (const ValidationError &e) {
            pt.error = e.what();
        }
        out[i] = std::move(pt);
    });
    return out;
}

inline std::vector<std::string> delay_columns(Axis axis)
{
    return {std::string(axis_column(axis)), "tau1_s", "tau2_s", "tau1_err_s", "tau2_err_s", "tp_abs2", "eta",
            "n", "Delta_rad_s", "Delta_over_omega_m", "Delta_c_over_omega_m", "omega_over_omegam",
            "step_rad_s", "status"};
}

inline Table delay_table(Axis axis, const std::vector<DelayPoint> &points, double beat_ratio,
                         const Provenance &prov)
{
    Table t;
    t.name = "delay";
    t.columns = delay_columns(axis);
    for (const auto &pt : points) {
        if (!pt.delays) {
            t.add_row({pt.axis_value, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, beat_ratio, kNaN,
                       "error: " + pt.error});
            continue;
        }
        const auto &ss = *pt.steady;
        const auto &g = *pt.delays;
        const auto &r = *pt.response;
        const double wm = ss.params.omega_m;
        t.add_row({pt.axis_value, g.tau1, g.tau2, g.tau1_error, g.tau2_error, r.transmission_power, r.efficiency,
                   ss.photons, ss.detuning, ss.detuning / wm, ss.params.detuning / wm, beat_ratio, g.step, "ok"},
                  {{"tau1_coarse_s", g.tau1_coarse},
                   {"tau1_fine_s", g.tau1_fine},
                   {"tau2_coarse_s", g.tau2_coarse},
                   {"tau2_fine_s", g.tau2_fine},
                   {"U_rad_s", ss.params.kerr},
                   {"flags", ss.flags}});
    }
    t.metadata = metadata(prov, t.columns);
    return t;
}

// ---- Kerr shift grid --------------------------------------------------------

inline Table kerr_shift_table(const std::vector<KerrShiftRow> &rows, const Provenance &prov)
{
    Table t;
    t.name = "kerr-shift";
    t.columns = kSteadyColumns;
    for (const auto &r : rows) t.add_row(steady_row(r.pump_power, r.state), steady_detail(r.state));
    t.metadata = metadata(prov, t.columns);
    return t;
}

// ---- oracle check -----------------------------------------------------------

inline const std::vector<std::string> kOracleCheckColumns = {
    "omega_over_omegam", "tp_abs2_analytic", "tp_abs2_oracle", "tp_abs2_rel_dev", "eta_analytic", "eta_oracle",
    "eta_rel_dev", "A1m_rel_dev", "A2m_rel_dev", "windows", "pass", "status",
};

struct OracleCheckPoint
{
    double beat = 0.0;
    std::optional<ComparisonReport> report;
    int windows = 0;
    std::string error;
};

inline std::vector<OracleCheckPoint> oracle_check(const DerivedParams &d, std::span<const double> beats,
                                                  const OracleConfig &cfg, const ResponseOptions &opt,
                                                  const ComparisonTolerances &tol, unsigned jobs,
                                                  const std::function<TrajectoryObserver(std::size_t)> &observer = {})
{
    const SteadyState ss = solve_steady_state(d, cfg.branch);
    std::vector<OracleCheckPoint> out(beats.size());
    parallel_for(beats.size(), jobs, [&](std::size_t i) {
        OracleCheckPoint pt;
        pt.beat = beats[i];
        try {
            const auto analytic = observables(ss, beats[i], opt);
            const auto demod = integrate(d, beats[i], cfg, observer ? observer(i) : TrajectoryObserver{});
            pt.windows = demod.windows;
            pt.report = compare(analytic, demod, tol);
        } catch (const NumericalError &e) {
            pt.error = e.what();
        }
        out[i] = std::move(pt);
    });
    return out;
}

inline bool all_pass(const std::vector<OracleCheckPoint> &pts)
{
    for (const auto &p : pts)
        if (!p.report || !p.report->pass) return false;
    return true;
}

inline Table oracle_check_table(const DerivedParams &d, const std::vector<OracleCheckPoint> &pts,
                                const Provenance &prov)
{
    Table t;
    t.name = "oracle-check";
    t.columns = kOracleCheckColumns;
    for (const auto &p : pts) {
        if (!p.report) {
            t.add_row({p.beat / d.omega_m, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN,
                       static_cast<double>(p.windows), "fail", "error: " + p.error});
            continue;
        }
        const auto &r = *p.report;
        t.add_row({p.beat / d.omega_m, r.tp_abs2_analytic, r.tp_abs2_oracle, r.tp_abs2_relative, r.eta_analytic,
                   r.eta_oracle, r.eta_relative, r.harmonic("A1-").relative, r.harmonic("A2-").relative,
                   static_cast<double>(p.windows), r.pass ? "pass" : "fail", "ok"},
                  ordered_json::parse(to_json(r).dump()));
    }
    Provenance pr = prov;
    pr.derived = d;
    t.metadata = metadata(pr, t.columns);
    return t;
}
} // namespace kerromit

#endif
