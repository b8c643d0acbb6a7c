#include <catch_amalgamated.hpp>

#include <sstream>

#include "kerromit/sweeps.hpp"
#include "support.hpp"

using namespace kerromit;
using Catch::Matchers::ContainsSubstring;

namespace
{
kerromit::PhysicalParams base()
{
    auto p = paper_params(0.0);
    p.kerr_override->unit = KerrUnit::rad_per_s;
    return p;
}

std::string csv(const Table &t)
{
    std::ostringstream out;
    write_csv(out, t);
    return out.str();
}
} // namespace

TEST_CASE("axis and method names")
{
    for (auto a : {Axis::beat, Axis::pump_power, Axis::kerr, Axis::detuning}) CHECK(parse_axis(to_string(a)) == a);
    CHECK(axis_column(Axis::pump_power) == "P_L_W");
    CHECK(axis_column(Axis::detuning) == "Delta_c_over_omega_m");
    CHECK_THROWS_AS(parse_axis("mass"), ValidationError);
    CHECK(parse_sweep_method("closed-form") == SweepMethod::closed_form);
    CHECK(parse_sweep_method("oracle") == SweepMethod::oracle);
    CHECK_THROWS_AS(parse_sweep_method("euler"), ValidationError);
}

TEST_CASE("sweep specification validation")
{
    SweepSpec s;
    CHECK_NOTHROW(validate(s));
    CHECK(grid(s).size() == 2001);

    auto bad = s;
    bad.count = 0;
    CHECK_THROWS_WITH(validate(bad), ContainsSubstring(">= 1"));
    bad = s;
    bad.min = 1.3;
    CHECK_THROWS_WITH(validate(bad), ContainsSubstring("min must be < max"));
    bad.count = 1; // a single point needs no ordering
    CHECK_NOTHROW(validate(bad));
    bad = s;
    bad.max = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = s;
    bad.axis = Axis::pump_power;
    bad.min = 1e-3;
    bad.max = 2e-3;
    bad.overrides = {"P_L_W=5e-3"};
    CHECK_THROWS_WITH(validate(bad), ContainsSubstring("sweep axis"));
    bad.overrides = {"U=3"};
    CHECK_NOTHROW(validate(bad));
    bad.axis = Axis::kerr;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad.overrides = {"V_eff_m3=1e-16"};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = s;
    bad.beat_ratio = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = s;
    bad.jobs = 0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = s;
    bad.oracle.steps_per_period = 5;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("axis values land on the right parameter")
{
    const auto p = base();
    CHECK(at_axis_value(p, Axis::pump_power, 3e-3).pump_power == 3e-3);
    const auto k = at_axis_value(p, Axis::kerr, 2.5);
    REQUIRE(k.kerr_override);
    CHECK(k.kerr_override->value == 2.5);
    CHECK(k.kerr_override->unit == KerrUnit::rad_per_s);
    CHECK(!k.mode_volume);
    CHECK(at_axis_value(p, Axis::detuning, -0.5).pump_detuning == Catch::Approx(-0.5 * p.omega_m));
    CHECK(derive(at_axis_value(p, Axis::kerr, 2.5)).kerr == 2.5);
}

TEST_CASE("delay sweep: threaded equals serial and reruns are identical")
{
    const auto values = linspace(1e-3, 10e-3, 12);
    const auto serial = delay_sweep(base(), KerrUnit::rad_per_s, Axis::pump_power, values, 1.0, {}, Branch::lower, 1);
    const auto threaded =
        delay_sweep(base(), KerrUnit::rad_per_s, Axis::pump_power, values, 1.0, {}, Branch::lower, 4);
    Provenance prov;
    prov.reproducible = true;
    prov.command = "delay";
    const auto a = csv(delay_table(Axis::pump_power, serial, 1.0, prov));
    CHECK(a == csv(delay_table(Axis::pump_power, threaded, 1.0, prov)));
    CHECK(a == csv(delay_table(Axis::pump_power,
                               delay_sweep(base(), KerrUnit::rad_per_s, Axis::pump_power, values, 1.0, {},
                                           Branch::lower, 1),
                               1.0, prov)));
    for (const auto &pt : serial) {
        REQUIRE(pt.delays);
        CHECK(pt.error.empty());
    }
    // the single-point response agrees with a direct evaluation
    const auto ss = solve_steady_state(test::paper(values.back()));
    CHECK(serial.back().delays->tau1 == group_delays(ss).tau1);
}

TEST_CASE("delay sweep over U and Delta_c")
{
    const auto kerr = linspace(0.0, 8.0, 5);
    const auto pts = delay_sweep(base(), KerrUnit::rad_per_s, Axis::kerr, kerr, 1.0, {}, Branch::lower, 1);
    REQUIRE(pts.size() == 5);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i].steady->params.kerr == kerr[i]);

    const auto dc = linspace(-1.5, -0.5, 3);
    const auto det = delay_sweep(base(), KerrUnit::rad_per_s, Axis::detuning, dc, 1.0, {}, Branch::lower, 1);
    CHECK(det[0].steady->params.detuning == Catch::Approx(-1.5 * det[0].steady->params.omega_m));

    CHECK_THROWS_AS(delay_sweep(base(), KerrUnit::rad_per_s, Axis::beat, dc, 1.0, {}, Branch::lower, 1),
                    ValidationError);
    const std::vector<double> negative = {-1.0};
    CHECK_THROWS_AS(delay_sweep(base(), KerrUnit::rad_per_s, Axis::pump_power, negative, 1.0, {}, Branch::lower, 1),
                    ValidationError);
}

TEST_CASE("failed points are recorded in the row and the sweep continues")
{
    // middle branch exists only where the response is bistable
    const auto values = std::vector<double>{1e-3, 2e-3};
    auto p = paper_params(8.0, 2e-3);
    p.kerr_override->unit = KerrUnit::rad_per_s;
    const auto pts = delay_sweep(p, KerrUnit::rad_per_s, Axis::pump_power, values, 1.0, {}, Branch::middle, 1);
    REQUIRE(pts.size() == 2);
    CHECK(!pts[0].error.empty());
    CHECK(pts[1].steady);
    const auto t = delay_table(Axis::pump_power, pts, 1.0, {});
    CHECK(std::get<std::string>(t.rows[0].back()).starts_with("error: "));
    CHECK(std::isnan(std::get<double>(t.rows[0][1])));
}

TEST_CASE("oracle check rows carry the comparison")
{
    const auto d = test::paper();
    const std::vector<double> beats = {0.99 * d.omega_m, 1.01 * d.omega_m};
    OracleConfig cfg;
    cfg.tolerance = 1e-5;
    const auto pts = oracle_check(d, beats, cfg, {}, {}, 2);
    REQUIRE(pts.size() == 2);
    CHECK(all_pass(pts));
    const auto t = oracle_check_table(d, pts, {});
    CHECK(t.columns == kOracleCheckColumns);
    CHECK(std::get<std::string>(t.rows[0][10]) == "pass");
    CHECK(std::get<double>(t.rows[1][7]) < 0.01);
    CHECK(t.details[0]["harmonics"].size() == 6);

    const auto strict = oracle_check(d, beats, cfg, {}, {1e-9, 1e-9}, 1);
    CHECK(!all_pass(strict));
}

TEST_CASE("oracle spectrum table")
{
    const auto d = test::paper();
    const std::vector<double> beats = {d.omega_m};
    const auto t = oracle_spectrum_table(d, beats, {}, 1, {});
    REQUIRE(t.rows.size() == 1);
    CHECK(std::get<std::string>(t.rows[0][5]) == "oracle");
    const double analytic = observables(solve_steady_state(d), d.omega_m).transmission_power;
    CHECK(std::get<double>(t.rows[0][1]) == Catch::Approx(analytic).epsilon(0.01));
    CHECK(t.metadata["oracle"]["steps_per_period"] == 400);
}
