#include <catch_amalgamated.hpp>

#include "kerromit/response.hpp"
#include "support.hpp"

using namespace kerromit;
using Catch::Matchers::ContainsSubstring;

TEST_CASE("sideband amplitudes match the high-precision reference")
{
    for (const auto &c : test::reference()["response"]) {
        const auto ss = solve_steady_state(test::paper_for(c));
        const double beat = c["omega_over_omegam"].get<double>() * ss.params.omega_m;
        INFO("P_L=" << c["P_L_W"] << " U=" << c["U_rad_s"] << " W/wm=" << c["omega_over_omegam"]);
        const auto r = observables(ss, beat);
        CHECK(test::rel(r.a1_minus, test::cplx(c["A1_minus"])) < 1e-8);
        CHECK(test::rel(r.a1_plus, test::cplx(c["A1_plus"])) < 1e-8);
        CHECK(test::rel(r.x1, test::cplx(c["X1"])) < 1e-8);
        CHECK(test::rel(r.a2_minus, test::cplx(c["A2_minus"])) < 1e-8);
        CHECK(test::rel(r.a2_plus, test::cplx(c["A2_plus"])) < 1e-8);
        CHECK(test::rel(r.x2, test::cplx(c["X2"])) < 1e-8);
        CHECK(test::rel(r.transmission_power, c["tp_abs2"].get<double>()) < 1e-8);
        CHECK(test::rel(r.efficiency, c["eta"].get<double>()) < 1e-8);

        const auto k = observables(ss, beat, {Method::matrix, SecondOrderSources::with_kerr});
        CHECK(test::rel(k.a2_minus, test::cplx(c["A2_minus_with_kerr"])) < 1e-8);
        CHECK(k.a1_minus == r.a1_minus);
    }
}

TEST_CASE("Kerr sources vanish without Kerr")
{
    const auto ss = solve_steady_state(test::paper());
    const double w = 0.97 * ss.params.omega_m;
    const auto a = observables(ss, w);
    const auto b = observables(ss, w, {Method::matrix, SecondOrderSources::with_kerr});
    CHECK(test::rel(b.a2_minus, a.a2_minus) < 1e-14);
}

TEST_CASE("bare cavity transmission is a Lorentzian")
{
    DerivedParams d = test::paper();
    d.g = 0.0;
    const auto ss = solve_steady_state(d);
    for (double ratio : {0.5, 0.9, 1.0, 1.1, 1.7}) {
        const double w = ratio * d.omega_m;
        const auto r = observables(ss, w);
        const cplx expected = 1.0 - d.kappa / cplx(d.kappa, -(w + d.detuning));
        CHECK(std::abs(r.transmission - expected) < 1e-12);
        CHECK(r.efficiency == 0.0);
    }
}

TEST_CASE("closed-form first order equals the matrix solve")
{
    for (double u : {0.0, 0.3, 3.0, 8.0}) {
        for (double dc : {-1.5, -1.0, -0.5}) {
            const auto ss = solve_steady_state(test::paper(10e-3, u, dc));
            for (double ratio : {0.8, 0.95, 1.0, 1.03, 1.2}) {
                const double w = ratio * ss.params.omega_m;
                INFO("U=" << u << " Dc=" << dc << " W=" << ratio);
                const auto m = first_order(ss, w);
                const auto cf = closed_form_first(ss, w);
                CHECK(test::rel(cf.minus, m.minus) < 1e-9);
                CHECK(test::rel(cf.motion, m.motion) < 1e-9);
                const auto r = observables(ss, w, {Method::closed_form});
                CHECK(test::rel(r.a1_plus, m.plus) < 1e-9);
            }
        }
    }
}

TEST_CASE("printed second-order closed form is evaluated and its delta reported")
{
    const auto ss = solve_steady_state(test::paper());
    const double w = ss.params.omega_m;
    const auto r = observables(ss, w, {Method::closed_form});
    REQUIRE(r.closed_form_delta.has_value());
    CHECK(std::isfinite(*r.closed_form_delta));
    const auto cf = closed_form_second(ss, first_order(ss, w), w);
    CHECK(cf.relative_delta == Catch::Approx(*r.closed_form_delta).epsilon(1e-9));
    CHECK(test::rel(cf.reference, observables(ss, w).a2_minus) < 1e-12);
    CHECK(!observables(ss, w).closed_form_delta.has_value());
}

TEST_CASE("sideband amplitudes scale with the probe")
{
    const auto base = solve_steady_state(test::paper(10e-3, 0.3, -1.0));
    SteadyState doubled = base;
    doubled.params.eps_p *= 2.0;
    const double w = 1.01 * base.params.omega_m;
    const auto a = observables(base, w);
    const auto b = observables(doubled, w);
    CHECK(test::rel(b.a1_minus, 2.0 * a.a1_minus) < 1e-12);
    CHECK(test::rel(b.x1, 2.0 * a.x1) < 1e-12);
    CHECK(test::rel(b.a2_minus, 4.0 * a.a2_minus) < 1e-12);
    CHECK(test::rel(b.transmission, a.transmission) < 1e-12);
    CHECK(test::rel(b.efficiency, 2.0 * a.efficiency) < 1e-12);
}

TEST_CASE("zero probe keeps the transmission and silences the sidebands")
{
    const auto ss = solve_steady_state(test::paper());
    SteadyState silent = ss;
    silent.params.eps_p = 0.0;
    const double w = 0.99 * ss.params.omega_m;
    const auto r = observables(silent, w);
    CHECK(r.a1_minus == 0.0);
    CHECK(r.a2_minus == 0.0);
    CHECK(r.efficiency == 0.0);
    CHECK(test::rel(r.transmission, observables(ss, w).transmission) < 1e-12);
}

TEST_CASE("group delays match the exact derivative")
{
    for (const auto &c : test::reference()["delays"]) {
        const auto ss = solve_steady_state(test::paper_for(c));
        INFO("P_L=" << c["P_L_W"] << " U=" << c["U_rad_s"]);
        const auto g = group_delays(ss);
        CHECK(test::rel(g.tau1, c["tau1_s"].get<double>()) < 1e-6);
        CHECK(test::rel(g.tau2, c["tau2_s"].get<double>()) < 1e-6);
        CHECK(g.tau1_error < 1e-4 * std::abs(g.tau1));
        CHECK(g.tau2_error < 1e-4 * std::abs(g.tau2));
        CHECK(g.step == Catch::Approx(1e-3 * ss.linewidth));
    }
}

TEST_CASE("group delay step is clamped and oversized steps are rejected")
{
    const auto ss = solve_steady_state(test::paper(1e-3));
    DelayOptions tiny;
    tiny.step_fraction = 1e-12;
    CHECK(group_delays(ss, tiny).step == Catch::Approx(1e-6 * ss.linewidth));
    DelayOptions huge;
    huge.step_fraction = 1.0;
    huge.beat = 1.1 * ss.params.omega_m; // far from the window, phases are smooth
    CHECK(group_delays(ss, huge).step == Catch::Approx(0.1 * ss.linewidth));
    // a step of many linewidths jumps the phase across the window
    DelayOptions coarse;
    coarse.step_fraction = 0.1;
    coarse.beat = ss.params.omega_m;
    SteadyState narrow = ss;
    narrow.linewidth *= 100.0;
    CHECK_THROWS_AS(group_delays(narrow, coarse), StepSizeError);
}

TEST_CASE("spectrum grid validation and per-point results")
{
    const auto d = test::paper();
    CHECK_THROWS_AS(spectrum(d, std::vector<double>{}), ValidationError);
    CHECK_THROWS_WITH(spectrum(d, std::vector<double>{1.0, -1.0}), ContainsSubstring("(0, 2 omega_m]"));
    CHECK_THROWS_WITH(spectrum(d, std::vector<double>{2.0, 1.0}), ContainsSubstring("sorted"));
    CHECK_THROWS_AS(spectrum(d, std::vector<double>{3.0 * d.omega_m}), ValidationError);
    CHECK_THROWS_AS(observables(solve_steady_state(d), 0.0), ValidationError);

    const auto grid = linspace(0.9 * d.omega_m, 1.1 * d.omega_m, 21);
    const auto serial = spectrum(d, grid);
    const auto threaded = spectrum(d, grid, {}, Branch::lower, 4);
    REQUIRE(serial.rows.size() == 21);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        REQUIRE(serial.rows[i].response);
        CHECK(serial.rows[i].error.empty());
        CHECK(serial.rows[i].response->transmission == threaded.rows[i].response->transmission);
        CHECK(serial.rows[i].response->a2_minus == threaded.rows[i].response->a2_minus);
    }
}

TEST_CASE("linspace is inclusive")
{
    const auto v = linspace(1.0, 2.0, 5);
    CHECK(v == std::vector<double>{1.0, 1.25, 1.5, 1.75, 2.0});
    CHECK(linspace(3.0, 4.0, 1) == std::vector<double>{3.0});
    CHECK(linspace(0.8, 1.2, 2001).back() == 1.2);
}
