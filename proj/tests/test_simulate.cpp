#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "carlin/models.hpp"
#include "carlin/presets.hpp"
#include "carlin/simulate.hpp"
#include "carlin/trajectory_io.hpp"

using namespace carlin;

namespace {

double max_err_vs_analytic(const Trajectory& traj, double x0) {
    double m = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        m = std::max(m, std::abs(traj.states[i][0] -
                                 logistic_analytic(x0, traj.times[i])));
    return m;
}

} // namespace

TEST_SUITE("integration basics") {
    TEST_CASE("euler_step advances the lifted state") {
        // dx/dt = x at order 1: y = (1, x) -> (1, x + dt x).
        const PolyODE ode(1, 1, {{1, 0, {0}, 1.0}});
        const LiftedSystem sys = build_carleman(ode, 1);
        BlockVec y = lift_state(std::vector<double>{1.0}, sys);
        BlockVec deriv(y.dims());
        ApplyWorkspace ws;
        euler_step(sys, y, 0.01, deriv, ws);
        CHECK(y.raw()[0] == 1.0);
        CHECK(y.raw()[1] == doctest::Approx(1.01).epsilon(1e-15));
    }

    TEST_CASE("the constant block is conserved bitwise") {
        const LiftedSystem sys = build_carleman(build_logistic().ode, 4);
        BlockVec y = lift_state(std::vector<double>{0.1}, sys);
        BlockVec deriv(y.dims());
        ApplyWorkspace ws;
        for (int i = 0; i < 500; ++i) euler_step(sys, y, 0.01, deriv, ws);
        CHECK(y.raw()[0] == 1.0);
    }

    TEST_CASE("readout pivot: zero noise is the identity, bitwise") {
        Rng rng(42);
        const std::vector<double> x{0.123456789, -0.5};
        const std::vector<double> s = readout_pivot(x, 0.0, rng);
        CHECK(s == x);
    }

    TEST_CASE("readout pivot: noise is bounded and seed-reproducible") {
        const std::vector<double> x(8, 0.25);
        Rng rng_a(7);
        Rng rng_b(7);
        const std::vector<double> a = readout_pivot(x, 0.1, rng_a);
        const std::vector<double> b = readout_pivot(x, 0.1, rng_b);
        CHECK(a == b);
        bool any_moved = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            CHECK(std::abs(a[i] - x[i]) <= 0.1);
            if (a[i] != x[i]) any_moved = true;
        }
        CHECK(any_moved);
        CHECK_THROWS_AS(readout_pivot(x, -0.5, rng_a), InputError);
    }
}

TEST_SUITE("run_lifted") {
    TEST_CASE("validation") {
        const PolyODE& ode = build_logistic().ode;
        SimConfig cfg;

        // Carleman cannot switch pivots.
        CHECK_THROWS_AS(run_lifted(ode, LiftMethod::Carleman, 2,
                                   std::vector<double>{0.1}, {},
                                   SwitchPolicy::every(1.0), cfg),
                        InputError);
        PivotSchedule sched;
        sched.entries.push_back({1.0, {1.0}});
        CHECK_THROWS_AS(run_lifted(ode, LiftMethod::Carleman, 2,
                                   std::vector<double>{0.1}, {},
                                   SwitchPolicy::never(), cfg, sched),
                        InputError);

        // Malformed policies and schedules.
        CHECK_THROWS_AS(SwitchPolicy::every(0.0).validate(), InputError);
        CHECK_THROWS_AS(SwitchPolicy::drift(-1.0).validate(), InputError);
        CHECK_THROWS_AS(SwitchPolicy::at_times({2.0, 1.0}).validate(), InputError);

        PivotSchedule bad;
        bad.entries.push_back({2.0, {1.0}});
        bad.entries.push_back({1.0, {1.0}});
        CHECK_THROWS_AS(run_lifted(ode, LiftMethod::PSC, 3, std::vector<double>{0.1},
                                   {}, SwitchPolicy::never(), cfg, bad),
                        InputError);

        SimConfig bad_cfg;
        bad_cfg.dt = 0.0;
        CHECK_THROWS_AS(run_lifted(ode, LiftMethod::PS, 1, std::vector<double>{0.1},
                                   {}, SwitchPolicy::never(), bad_cfg),
                        InputError);
    }

    TEST_CASE("pivot defaults to x0 and is recorded") {
        const PolyODE& ode = build_logistic().ode;
        SimConfig cfg;
        cfg.t_end = 0.05;
        const Trajectory traj = run_lifted(ode, LiftMethod::PSC, 2,
                                           std::vector<double>{0.3}, {},
                                           SwitchPolicy::never(), cfg);
        REQUIRE(!traj.pivots.empty());
        CHECK(traj.pivots[0].first == 0.0);
        CHECK(traj.pivots[0].second == std::vector<double>{0.3});
        CHECK(traj.row_pivots[0] == std::vector<double>{0.3});
        CHECK(traj.dim == 1);
        CHECK(traj.times.size() == 6); // t = 0, 0.01, ..., 0.05
    }

    TEST_CASE("runs are deterministic bit for bit") {
        const PolyODE& ode = build_logistic().ode;
        SimConfig cfg;
        cfg.t_end = 3.0;
        cfg.readout_noise = 0.05;
        const Trajectory a = run_lifted(ode, LiftMethod::PSC, 3,
                                        std::vector<double>{0.1}, {},
                                        SwitchPolicy::every(0.5), cfg);
        const Trajectory b = run_lifted(ode, LiftMethod::PSC, 3,
                                        std::vector<double>{0.1}, {},
                                        SwitchPolicy::every(0.5), cfg);
        REQUIRE(a.times.size() == b.times.size());
        for (std::size_t i = 0; i < a.times.size(); ++i) {
            CHECK(a.times[i] == b.times[i]);
            CHECK(a.states[i] == b.states[i]);
            CHECK(a.row_pivots[i] == b.row_pivots[i]);
        }
        CHECK(a.switch_events == b.switch_events);
    }

    TEST_CASE("switching leaves the state estimate continuous") {
        // With zero readout noise the pivot lands exactly on the estimate,
        // so re-lifting does not move block 1 at all.
        const PolyODE& ode = build_logistic().ode;
        const LiftedSystem sys = build_psc(ode, std::vector<double>{0.1}, 3);
        BlockVec y = lift_state(std::vector<double>{0.1}, sys);
        BlockVec deriv(y.dims());
        ApplyWorkspace ws;
        for (int i = 0; i < 50; ++i) euler_step(sys, y, 0.01, deriv, ws);
        const std::vector<double> before = read_x(y, sys);

        const LiftedSystem moved = build_psc(ode, before, 3);
        const std::vector<double> after = read_x(lift_state(before, moved), moved);
        CHECK(after == before);
    }

    TEST_CASE("ideal pivot switching reproduces direct Euler") {
        const PolyODE& ode = build_logistic().ode;
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory lifted = run_lifted(ode, LiftMethod::PS, 1,
                                             std::vector<double>{0.1}, {},
                                             SwitchPolicy::every(cfg.dt), cfg);
        const Trajectory direct = reference_solve(ode, std::vector<double>{0.1}, cfg);
        REQUIRE(lifted.times.size() == direct.times.size());
        double m = 0.0;
        for (std::size_t i = 0; i < lifted.times.size(); ++i)
            m = std::max(m, std::abs(lifted.states[i][0] - direct.states[i][0]));
        CHECK(m <= 1e-9);
        CHECK(!lifted.divergence_time.has_value());
    }

    TEST_CASE("switching every 1 keeps the logistic run accurate") {
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::PS, 1,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::every(1.0), cfg);
        CHECK(!traj.divergence_time.has_value());
        CHECK(max_err_vs_analytic(traj, 0.1) <= 0.05);
        CHECK(std::abs(traj.states.back()[0] - 1.0) <= 0.01);
        // Nine switches: t = 1..9; the t = 10 boundary is the last step.
        CHECK(traj.switch_events.size() >= 9);
    }

    TEST_CASE("at-times policy fires exactly at the listed times") {
        SimConfig cfg;
        cfg.t_end = 5.0;
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::PS, 1,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::at_times({1.0, 2.5}), cfg);
        REQUIRE(traj.switch_events.size() == 2);
        CHECK(traj.switch_events[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(traj.switch_events[1] == doctest::Approx(2.5).epsilon(1e-12));
    }

    TEST_CASE("drift policy switches only when the estimate wanders") {
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::PSC, 3,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::drift(0.2), cfg);
        CHECK(!traj.divergence_time.has_value());
        CHECK(!traj.switch_events.empty());
        // After every switch the new pivot equals the estimate, so the
        // recorded drift at switch rows is bounded by the threshold plus
        // one step.
        CHECK(max_err_vs_analytic(traj, 0.1) <= 0.05);
    }

    TEST_CASE("scheduled pivots override the readout") {
        SimConfig cfg;
        cfg.t_end = 3.0;
        PivotSchedule sched;
        sched.entries.push_back({1.0, {0.75}});
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::PSC, 3,
                                           std::vector<double>{0.1},
                                           std::vector<double>{0.0},
                                           SwitchPolicy::never(), cfg, sched);
        REQUIRE(traj.pivots.size() == 2);
        CHECK(traj.pivots[1].first == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(traj.pivots[1].second == std::vector<double>{0.75});
        // The pivot column flips at the switch row.
        bool seen = false;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            if (traj.times[i] < 1.0 - 1e-9) CHECK(traj.row_pivots[i][0] == 0.0);
            else seen = true;
        }
        CHECK(seen);
    }

    TEST_CASE("output stride records every k-th step") {
        SimConfig cfg;
        cfg.t_end = 1.0;
        cfg.output_stride = 10;
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::PS, 1,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::never(), cfg);
        REQUIRE(traj.times.size() == 11);
        CHECK(traj.times[1] == doctest::Approx(0.1).epsilon(1e-12));
    }

    TEST_CASE("divergence is detected and timed") {
        // Truncated Carleman on the logistic equation blows past any tight
        // threshold within the window where the truncation error takes over.
        SimConfig cfg;
        cfg.t_end = 4.0;
        cfg.divergence_threshold = 2.0;
        for (int k : {2, 3, 4, 5}) {
            const Trajectory traj = run_lifted(build_logistic().ode,
                                               LiftMethod::Carleman, k,
                                               std::vector<double>{0.1}, {},
                                               SwitchPolicy::never(), cfg);
            REQUIRE(traj.divergence_time.has_value());
            CHECK(*traj.divergence_time >= 1.5);
            CHECK(*traj.divergence_time <= 3.5);
            // The crossing sample is not recorded.
            CHECK(traj.times.back() < *traj.divergence_time);
            for (const auto& row : traj.states)
                CHECK(std::abs(row[0]) <= 2.0);
        }
    }

    TEST_CASE("carrying higher blocks across switches is a valid mode") {
        SimConfig cfg;
        cfg.t_end = 6.0;
        SimConfig cfg_carry = cfg;
        cfg_carry.carry_higher_blocks = true;

        // PS: the monomial tower is pivot-independent, so carrying changes
        // nothing at all.
        const Trajectory ps_a = run_lifted(build_logistic().ode, LiftMethod::PS, 1,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::every(1.0), cfg);
        const Trajectory ps_b = run_lifted(build_logistic().ode, LiftMethod::PS, 1,
                                           std::vector<double>{0.1}, {},
                                           SwitchPolicy::every(1.0), cfg_carry);
        REQUIRE(ps_a.times.size() == ps_b.times.size());
        for (std::size_t i = 0; i < ps_a.times.size(); ++i)
            CHECK(ps_a.states[i] == ps_b.states[i]);

        // PSC: carrying re-expresses the evolved tower; the run must stay
        // bounded and land on the same attractor.
        const Trajectory psc = run_lifted(build_logistic().ode, LiftMethod::PSC, 3,
                                          std::vector<double>{0.1}, {},
                                          SwitchPolicy::every(1.0), cfg_carry);
        CHECK(!psc.divergence_time.has_value());
        CHECK(std::abs(psc.states.back()[0] - logistic_analytic(0.1, 6.0)) <= 0.1);
    }
}

TEST_SUITE("reference solver") {
    TEST_CASE("euler on the logistic equation tracks the analytic solution") {
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = reference_solve(build_logistic().ode,
                                                std::vector<double>{0.1}, cfg);
        const double err = max_err_vs_analytic(traj, 0.1);
        CHECK(err <= 5e-3);
        CHECK(err >= 1e-5); // sanity: it is a first-order method, not magic
    }

    TEST_CASE("rk4 is far more accurate than euler at the same step") {
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = reference_solve(build_logistic().ode,
                                                std::vector<double>{0.1}, cfg,
                                                RefMethod::RungeKutta4);
        CHECK(max_err_vs_analytic(traj, 0.1) <= 1e-9);
    }

    TEST_CASE("kpp relaxes to the uniform invaded state") {
        const NamedModel m = build_kpp(8);
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = reference_solve(m.ode, m.default_x0, cfg);
        REQUIRE(!traj.divergence_time.has_value());

        double prev_min = -1e300;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            double lo = 1e300;
            for (double v : traj.states[i]) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.001);
                lo = std::min(lo, v);
            }
            // The slowest site climbs monotonically toward 1 (individual
            // sites may transiently dip while the bump spreads).
            CHECK(lo >= prev_min - 1e-12);
            prev_min = std::max(prev_min, lo);
        }
        for (double v : traj.states.back())
            CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
    }

    TEST_CASE("phase-field fronts collapse to the favoured phase") {
        const NamedModel m = build_phase_field();
        SimConfig cfg;
        cfg.t_end = 10.0;
        const Trajectory traj = reference_solve(m.ode, m.default_x0, cfg);
        REQUIRE(!traj.divergence_time.has_value());
        for (const auto& row : traj.states)
            for (double v : row) CHECK(std::abs(v) <= 1.05);
        for (double v : traj.states.back())
            CHECK(v == doctest::Approx(-1.0).epsilon(1e-3));
    }
}

TEST_SUITE("trajectory comparison") {
    TEST_CASE("a trajectory compared with itself is exactly zero") {
        SimConfig cfg;
        cfg.t_end = 2.0;
        const Trajectory traj = reference_solve(build_logistic().ode,
                                                std::vector<double>{0.1}, cfg);
        const CompareReport rep = compare(traj, traj);
        CHECK(rep.max_abs == 0.0);
        CHECK(rep.rms == 0.0);
        CHECK(rep.samples == traj.times.size());
    }

    TEST_CASE("a constant offset is reported exactly") {
        SimConfig cfg;
        cfg.t_end = 1.0;
        const Trajectory a = reference_solve(build_logistic().ode,
                                             std::vector<double>{0.1}, cfg);
        Trajectory b = a;
        for (auto& row : b.states) row[0] += 0.25;
        const CompareReport rep = compare(a, b);
        CHECK(rep.max_abs == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(rep.rms == doctest::Approx(0.25).epsilon(1e-12));
    }

    TEST_CASE("nearest-time matching handles different grids") {
        SimConfig fine;
        fine.t_end = 2.0;
        SimConfig coarse = fine;
        coarse.output_stride = 10;
        const Trajectory a = reference_solve(build_logistic().ode,
                                             std::vector<double>{0.1}, fine);
        const Trajectory b = reference_solve(build_logistic().ode,
                                             std::vector<double>{0.1}, coarse);
        const CompareReport rep = compare(a, b);
        // Nearest sample is at most 5 steps (0.05 time units) away and the
        // logistic rhs is below 0.25, so the mismatch stays tiny.
        CHECK(rep.max_abs <= 0.05 * 0.25 + 1e-9);
    }

    TEST_CASE("disjoint time ranges are an input error") {
        Trajectory a, b;
        a.dim = b.dim = 1;
        a.times = {0.0, 1.0};
        a.states = {{0.0}, {0.0}};
        b.times = {5.0, 6.0};
        b.states = {{0.0}, {0.0}};
        CHECK_THROWS_AS(compare(a, b), InputError);
        b.dim = 2;
        CHECK_THROWS_AS(compare(a, b), InputError);
    }
}

TEST_SUITE("trajectory CSV") {
    TEST_CASE("write-read round trip is bitwise") {
        SimConfig cfg;
        cfg.t_end = 1.0;
        cfg.readout_noise = 0.01;
        const Trajectory traj = run_lifted(build_kpp(4).ode, LiftMethod::PSC, 2,
                                           std::vector<double>{0.9, 0.9, 0.1, 0.1}, {},
                                           SwitchPolicy::every(0.25), cfg);
        std::ostringstream out;
        write_trajectory_csv(traj, out);
        std::istringstream in(out.str());
        const Trajectory back = read_trajectory_csv(in);

        CHECK(back.dim == traj.dim);
        REQUIRE(back.times.size() == traj.times.size());
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            CHECK(back.times[i] == traj.times[i]);
            CHECK(back.states[i] == traj.states[i]);
            CHECK(back.row_pivots[i] == traj.row_pivots[i]);
            CHECK(back.row_switched[i] == traj.row_switched[i]);
        }
        CHECK(back.divergence_time == traj.divergence_time);
    }

    TEST_CASE("divergence marker survives the round trip") {
        SimConfig cfg;
        cfg.t_end = 4.0;
        cfg.divergence_threshold = 2.0;
        const Trajectory traj = run_lifted(build_logistic().ode, LiftMethod::Carleman,
                                           3, std::vector<double>{0.1}, {},
                                           SwitchPolicy::never(), cfg);
        REQUIRE(traj.divergence_time.has_value());
        std::ostringstream out;
        write_trajectory_csv(traj, out);
        CHECK(out.str().find("# diverged at t=") != std::string::npos);
        std::istringstream in(out.str());
        const Trajectory back = read_trajectory_csv(in);
        REQUIRE(back.divergence_time.has_value());
        CHECK(*back.divergence_time == *traj.divergence_time);
    }

    TEST_CASE("header or field damage is a parse error") {
        std::istringstream bad_header("time,x0,s0,switched\n0,0,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(bad_header), ParseError);
        std::istringstream bad_field("t,x0,s0,switched\n0,zero,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(bad_field), ParseError);
        std::istringstream bad_count("t,x0,s0,switched\n0,0,0\n");
        CHECK_THROWS_AS(read_trajectory_csv(bad_count), ParseError);
    }
}

TEST_SUITE("figure presets") {
    TEST_CASE("the preset table is complete and self-consistent") {
        const auto& table = figure_presets();
        for (const char* name :
             {"fig1a-K2", "fig1a-K3", "fig1a-K4", "fig1a-K5", "fig2a", "fig2b",
              "fig2c", "fig2d", "fig2e", "fig2d-switch", "fig2e-switch", "fig3b",
              "fig3c", "fig3d", "fig3e", "fig3f", "fig4b", "fig4c", "fig4d",
              "fig4e", "fig4f"}) {
            INFO(name);
            REQUIRE(table.count(name) == 1);
            CHECK_NOTHROW(table.at(name).validate());
        }
        CHECK(table.at("fig1a-K3").method == LiftMethod::Carleman);
        CHECK(table.at("fig1a-K3").order == 3);
        CHECK(table.at("fig2a").policy.kind == SwitchPolicy::Kind::Every);
        CHECK(table.at("fig4f").schedule.entries.size() == 1);
        CHECK(table.at("fig4f").schedule.entries[0].time == 2.9);
    }

    TEST_CASE("run_spec executes a preset end to end") {
        const Trajectory traj = run_spec(figure_presets().at("fig2b"));
        CHECK(!traj.divergence_time.has_value());
        CHECK(std::abs(traj.states.back()[0] - 1.0) <= 0.05);
    }

    TEST_CASE("invalid spec combinations are rejected") {
        RunSpec s;
        s.model = "logistic";
        s.method = LiftMethod::Carleman;
        s.order = 3;
        s.pivot = {1.0};
        CHECK_THROWS_AS(s.validate(), InputError);
        s.pivot.clear();
        s.policy = SwitchPolicy::every(1.0);
        CHECK_THROWS_AS(s.validate(), InputError);
        s.policy = SwitchPolicy::never();
        s.order = 0;
        CHECK_THROWS_AS(s.validate(), InputError);
        s.order = 3;
        CHECK_NOTHROW(s.validate());
        s.model = "unknown-model";
        CHECK_THROWS_AS(s.validate(), InputError);
    }
}
