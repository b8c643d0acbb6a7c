#ifndef KERROMIT_CLI_HPP
#define KERROMIT_CLI_HPP

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kerromit/config.hpp"
#include "kerromit/oracle.hpp"
#include "kerromit/presets.hpp"
#include "kerromit/sweeps.hpp"
#include "kerromit/table.hpp"

namespace kerromit
{
enum ExitCode : int
{
    kExitOk = 0,
    kExitValidation = 1,
    kExitNumerical = 2,
    kExitOracleFailed = 3,
};

// Default directory for preset output when --output is absent.
inline constexpr const char *kOutputDirEnv = "KERROMIT_OUTPUT_DIR";

namespace detail
{
struct CliOptions
{
    std::string config;
    std::vector<std::string> params;
    std::string branch = "lower";
    std::string method = "matrix";
    std::string sources = "standard";
    unsigned jobs = 1;
    std::string output;
    std::string format = "csv";
    bool reproducible = false;
    std::string dump_trajectory;
    long dump_every = 1;

    // oracle
    int steps_per_period = 400;
    double burn_in_damping_times = 5.0;
    double max_burn_in_s = 1e-4;
    std::optional<double> burn_in_s;
    double oracle_tolerance = 1e-3;
    int window_periods = 50;
    int max_windows = 40;
    std::string initial = "analytic";
    double perturbation = 0.0;
    double first_order_tol = 0.01;
    double second_order_tol = 0.10;

    // grids
    std::optional<double> min, max;
    std::optional<std::size_t> points;
    std::string axis = "P_L";
    double omega_ratio = 1.0;
    double pl_min = 0.0, pl_max = 10e-3;
    std::size_t pl_points = 41;
    std::vector<double> kerr_values;
    std::string preset;
};

inline OracleConfig oracle_config(const CliOptions &o)
{
    OracleConfig c;
    c.steps_per_period = o.steps_per_period;
    c.burn_in_damping_times = o.burn_in_damping_times;
    c.max_burn_in_s = o.max_burn_in_s;
    c.burn_in_s = o.burn_in_s;
    c.tolerance = o.oracle_tolerance;
    c.window_periods = o.window_periods;
    c.max_windows = o.max_windows;
    if (o.initial == "analytic") c.initial = InitialCondition::analytic;
    else if (o.initial == "zero") c.initial = InitialCondition::zero;
    else throw ValidationError("unknown initial condition '" + o.initial + "' (expected analytic or zero)");
    c.initial_perturbation = o.perturbation;
    c.branch = parse_branch(o.branch);
    validate(c);
    return c;
}

struct Context
{
    CliOptions opt;
    std::string command_line;
    PhysicalParams params;
    KerrUnit paper_tag_as = KerrUnit::rad_per_s;
    ordered_json calibration = nullptr;
    std::ostream *out = &std::cout;
    std::ostream *err = &std::cerr;

    Provenance provenance() const
    {
        Provenance p;
        p.command = command_line;
        p.reproducible = opt.reproducible;
        p.physical = params;
        p.derived = derive(params, paper_tag_as);
        if (!calibration.is_null()) p.extra["kerr_unit_calibration"] = calibration;
        return p;
    }
    DerivedParams derived() const { return derive(params, paper_tag_as); }
    Format format() const { return parse_format(opt.format); }
    ResponseOptions response() const
    {
        const auto m = parse_sweep_method(opt.method);
        return {m == SweepMethod::closed_form ? Method::closed_form : Method::matrix,
                parse_second_order_sources(opt.sources)};
    }
};

// Base parameters: the config file if given, else the reference set; then the
// --param overrides in order.
inline void load_base(Context &ctx)
{
    ctx.params = ctx.opt.config.empty() ? paper_params() : load_params(ctx.opt.config);
    for (const auto &a : ctx.opt.params) apply_override(ctx.params, a);
    validate(ctx.params);
    if (ctx.params.kerr_override && ctx.params.kerr_override->unit == KerrUnit::hz_paper) {
        const auto cal = calibrate(ctx.opt.jobs);
        ctx.paper_tag_as = cal.selected;
        ctx.calibration = to_json(cal);
    }
}

// One file per oracle point: the path itself for a single point, else
// <stem>_<index><ext>.
inline std::function<TrajectoryObserver(std::size_t)> trajectory_dumper(const CliOptions &o, std::size_t points)
{
    if (o.dump_trajectory.empty()) return {};
    const std::filesystem::path base(o.dump_trajectory);
    const long every = std::max(1L, o.dump_every);
    return [base, points, every](std::size_t i) -> TrajectoryObserver {
        auto path = base;
        if (points > 1)
            path = base.parent_path() / (base.stem().string() + "_" + std::to_string(i) + base.extension().string());
        auto file = std::make_shared<std::ofstream>(path);
        if (!*file) throw IoError("cannot open '" + path.string() + "' for writing");
        *file << "t_s,re_a,im_a,x_m,p_kg_m_s\n";
        auto counter = std::make_shared<long>(0);
        return [file, counter, every](double t, const ResonatorState &s) {
            if ((*counter)++ % every != 0) return;
            *file << format_number(t) << ',' << format_number(s.field.real()) << ','
                  << format_number(s.field.imag()) << ',' << format_number(s.position) << ','
                  << format_number(s.momentum) << '\n';
        };
    };
}

inline int cmd_steady(Context &ctx)
{
    const auto d = ctx.derived();
    const auto ss = solve_steady_state(d, parse_branch(ctx.opt.branch));
    Table t;
    t.name = "steady";
    t.columns = kSteadyColumns;
    t.add_row(steady_row(ctx.params.pump_power, ss), steady_detail(ss));
    t.metadata = metadata(ctx.provenance(), t.columns);
    emit(t, ctx.format(), ctx.opt.output, *ctx.out);
    return kExitOk;
}

inline SweepSpec sweep_spec(const Context &ctx, Axis axis, double min, double max, std::size_t count)
{
    SweepSpec s;
    s.axis = axis;
    s.min = min;
    s.max = max;
    s.count = count;
    s.overrides = ctx.opt.params;
    s.method = parse_sweep_method(ctx.opt.method);
    s.sources = parse_second_order_sources(ctx.opt.sources);
    s.format = ctx.format();
    s.output = ctx.opt.output;
    s.branch = parse_branch(ctx.opt.branch);
    s.oracle = oracle_config(ctx.opt);
    s.jobs = ctx.opt.jobs;
    s.beat_ratio = ctx.opt.omega_ratio;
    validate(s);
    return s;
}

inline int cmd_spectrum(Context &ctx)
{
    const auto spec = sweep_spec(ctx, Axis::beat, ctx.opt.min.value_or(0.8), ctx.opt.max.value_or(1.2),
                                 ctx.opt.points.value_or(kFigureGridPoints));
    const auto d = ctx.derived();
    auto beats = grid(spec);
    for (auto &b : beats) b *= d.omega_m;
    if (spec.count > 1) beats.back() = spec.max * d.omega_m;

    Table t;
    if (spec.method == SweepMethod::oracle) {
        const auto dumper = trajectory_dumper(ctx.opt, beats.size());
        t = oracle_spectrum_table(d, beats, spec.oracle, dumper ? 1u : spec.jobs, ctx.provenance(), dumper);
    } else {
        const auto s = spectrum(d, beats, ctx.response(), spec.branch, spec.jobs);
        t = spectrum_table(s, ctx.provenance());
    }
    emit(t, spec.format, spec.output, *ctx.out);
    return kExitOk;
}

inline int cmd_delay(Context &ctx)
{
    const Axis axis = parse_axis(ctx.opt.axis);
    if (axis == Axis::beat) throw ValidationError("delay: the axis must be P_L, U or Delta_c");
    double lo = 0.1e-3, hi = 10e-3;
    std::size_t n = 100;
    if (axis == Axis::kerr) lo = 0.0, hi = 8.0, n = 81;
    if (axis == Axis::detuning) lo = -1.5, hi = -0.5, n = 101;
    const auto spec = sweep_spec(ctx, axis, ctx.opt.min.value_or(lo), ctx.opt.max.value_or(hi),
                                 ctx.opt.points.value_or(n));
    if (spec.method == SweepMethod::oracle)
        throw ValidationError("delay: group delays use the analytic response (matrix or closed-form)");
    const auto values = grid(spec);
    const auto pts = delay_sweep(ctx.params, ctx.paper_tag_as, axis, values, spec.beat_ratio, ctx.response(),
                                 spec.branch, spec.jobs);
    auto prov = ctx.provenance();
    prov.extra["axis"] = std::string(to_string(axis));
    emit(delay_table(axis, pts, spec.beat_ratio, prov), spec.format, spec.output, *ctx.out);
    return kExitOk;
}

inline int cmd_kerr_shift(Context &ctx)
{
    if (ctx.opt.pl_points < 1) throw ValidationError("kerr-shift: --pl-points must be >= 1");
    if (ctx.opt.pl_points > 1 && !(ctx.opt.pl_min < ctx.opt.pl_max))
        throw ValidationError("kerr-shift: --pl-min must be < --pl-max");
    const auto powers = linspace(ctx.opt.pl_min, ctx.opt.pl_max, ctx.opt.pl_points);
    std::vector<double> kerr;
    if (ctx.opt.kerr_values.empty()) {
        kerr.push_back(ctx.derived().kerr);
    } else {
        // values carry the unit tag of the base parameters
        for (double v : ctx.opt.kerr_values)
            kerr.push_back(derive(at_axis_value(ctx.params, Axis::kerr, v), ctx.paper_tag_as).kerr);
    }
    const auto rows = kerr_shift_curve(ctx.derived(), powers, kerr, parse_branch(ctx.opt.branch));
    emit(kerr_shift_table(rows, ctx.provenance()), ctx.format(), ctx.opt.output, *ctx.out);
    return kExitOk;
}

inline int cmd_oracle_check(Context &ctx)
{
    const auto spec = sweep_spec(ctx, Axis::beat, ctx.opt.min.value_or(0.8), ctx.opt.max.value_or(1.2),
                                 ctx.opt.points.value_or(11));
    const auto d = ctx.derived();
    auto beats = grid(spec);
    for (auto &b : beats) b *= d.omega_m;
    const ComparisonTolerances tol{ctx.opt.first_order_tol, ctx.opt.second_order_tol};
    const auto dumper = trajectory_dumper(ctx.opt, beats.size());
    const unsigned jobs = dumper ? 1u : spec.jobs;
    const auto pts = oracle_check(d, beats, spec.oracle, ctx.response(), tol, jobs, dumper);
    emit(oracle_check_table(d, pts, ctx.provenance()), spec.format, spec.output, *ctx.out);
    if (!all_pass(pts)) {
        *ctx.err << "oracle-check: at least one point failed\n";
        return kExitOracleFailed;
    }
    return kExitOk;
}

inline int cmd_preset(Context &ctx)
{
    if (!ctx.opt.config.empty() || !ctx.opt.params.empty())
        throw ValidationError("preset: --config and --param do not apply; presets use the reference parameters");
    const auto cal = calibrate(ctx.opt.jobs);
    PresetOptions po;
    po.reproducible = ctx.opt.reproducible;
    po.jobs = ctx.opt.jobs;
    po.paper_tag_as = cal.selected;
    po.calibration = to_json(cal);
    po.sources = parse_second_order_sources(ctx.opt.sources);
    po.branch = parse_branch(ctx.opt.branch);
    if (parse_sweep_method(ctx.opt.method) != SweepMethod::matrix)
        throw ValidationError("preset: figures use the matrix method");

    std::string dir = ctx.opt.output;
    if (dir.empty()) {
        const char *env = std::getenv(kOutputDirEnv);
        dir = env && *env ? env : ".";
    }
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());

    const auto fmt = ctx.format();
    const auto outputs = run_preset(ctx.opt.preset, po);
    for (const auto &o : outputs) {
        auto table = o.table;
        table.metadata["command"] = ctx.command_line;
        const auto path = (std::filesystem::path(dir) / (o.file_stem + (fmt == Format::csv ? ".csv" : ".json"))).string();
        emit(table, fmt, path, *ctx.out);
        *ctx.out << path << '\n';
    }
    return kExitOk;
}

inline std::string join_args(const std::vector<std::string> &args)
{
    std::string s = "kerromit";
    for (const auto &a : args) s += " " + a;
    return s;
}
} // namespace detail

// Entry point shared by the executable and the tests. `args` excludes argv[0].
inline int run_command(const std::vector<std::string> &args, std::ostream &out = std::cout,
                       std::ostream &err = std::cerr)
{
    detail::Context ctx;
    ctx.out = &out;
    ctx.err = &err;
    ctx.command_line = detail::join_args(args);
    auto &o = ctx.opt;

    CLI::App app{"Kerr optomechanical OMIT: sidebands, group delays and a time-domain oracle", "kerromit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    app.add_option("--config", o.config, "JSON parameter file");
    app.add_option("--param", o.params, "override one parameter, key=value (repeatable)");
    app.add_option("--branch", o.branch, "steady-state branch")->check(CLI::IsMember({"lower", "middle", "upper"}));
    app.add_option("--method", o.method, "response method")->check(CLI::IsMember({"matrix", "closed-form", "oracle"}));
    app.add_option("--second-order-sources", o.sources, "second-order source model")
        ->check(CLI::IsMember({"standard", "with_kerr"}));
    app.add_option("--jobs", o.jobs, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--output", o.output, "output file (directory for preset); default stdout");
    app.add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--reproducible", o.reproducible, "omit the timestamp from metadata");
    app.add_option("--dump-trajectory", o.dump_trajectory, "write oracle trajectories as CSV");
    app.add_option("--dump-every", o.dump_every, "keep every Nth trajectory sample")->check(CLI::PositiveNumber);

    app.add_option("--steps-per-period", o.steps_per_period, "oracle steps per fastest period");
    app.add_option("--burn-in-damping-times", o.burn_in_damping_times, "oracle burn-in in units of the slowest relaxation time");
    app.add_option("--max-burn-in-s", o.max_burn_in_s, "cap on the damping-time burn-in, seconds");
    app.add_option("--burn-in-s", o.burn_in_s, "oracle burn-in, seconds");
    app.add_option("--oracle-tolerance", o.oracle_tolerance, "successive-window agreement");
    app.add_option("--window-periods", o.window_periods, "beat periods per demodulation window");
    app.add_option("--max-windows", o.max_windows, "maximum demodulation windows");
    app.add_option("--initial", o.initial, "analytic or zero")->check(CLI::IsMember({"analytic", "zero"}));
    app.add_option("--initial-perturbation", o.perturbation, "relative offset of the analytic start");

    auto *steady = app.add_subcommand("steady", "steady state of the pumped cavity");
    auto *spectrum_cmd = app.add_subcommand("spectrum", "|t_p|^2 and eta over Omega");
    auto *delay = app.add_subcommand("delay", "group delays over P_L, U or Delta_c");
    auto *kerr_shift = app.add_subcommand("kerr-shift", "Kerr shift over a (P_L, U) grid");
    auto *oracle_cmd = app.add_subcommand("oracle-check", "compare analytic sidebands with the time-domain oracle");
    auto *preset = app.add_subcommand("preset", "reference figure sweeps");
    for (auto *sub : {steady, spectrum_cmd, delay, kerr_shift, oracle_cmd, preset}) sub->fallthrough();

    for (auto *sub : {spectrum_cmd, oracle_cmd}) {
        sub->add_option("--min", o.min, "lowest Omega / omega_m");
        sub->add_option("--max", o.max, "highest Omega / omega_m");
        sub->add_option("--points", o.points, "grid points");
    }
    oracle_cmd->add_option("--first-order-tol", o.first_order_tol, "A1- relative tolerance");
    oracle_cmd->add_option("--second-order-tol", o.second_order_tol, "A2- relative tolerance");
    delay->add_option("--axis", o.axis, "P_L, U or Delta_c")->check(CLI::IsMember({"P_L", "U", "Delta_c"}));
    delay->add_option("--min", o.min, "axis start (W, U unit, or Delta_c / omega_m)");
    delay->add_option("--max", o.max, "axis end");
    delay->add_option("--points", o.points, "grid points");
    delay->add_option("--omega", o.omega_ratio, "Omega / omega_m at which delays are taken");
    kerr_shift->add_option("--pl-min", o.pl_min, "lowest P_L, W");
    kerr_shift->add_option("--pl-max", o.pl_max, "highest P_L, W");
    kerr_shift->add_option("--pl-points", o.pl_points, "P_L points");
    kerr_shift->add_option("--u", o.kerr_values, "U values in the unit of the base parameters");
    preset->add_option("name", o.preset, "fig1c, fig2, fig3 or fig4")
        ->required()
        ->check(CLI::IsMember({"fig1c", "fig2", "fig3", "fig4"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (preset->parsed()) return detail::cmd_preset(ctx);
        detail::load_base(ctx);
        if (steady->parsed()) return detail::cmd_steady(ctx);
        if (spectrum_cmd->parsed()) return detail::cmd_spectrum(ctx);
        if (delay->parsed()) return detail::cmd_delay(ctx);
        if (kerr_shift->parsed()) return detail::cmd_kerr_shift(ctx);
        if (oracle_cmd->parsed()) return detail::cmd_oracle_check(ctx);
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError &e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitValidation;
}
} // namespace kerromit

#endif
