#include <doctest.h>

#include <cmath>
#include <numbers>

#include "opinion_lab/counterexample.hpp"
#include "oracles.hpp"

using namespace opinion_lab;
using cycling::Agent;
using cycling::Population;

namespace {

// An interval agent whose folded argument index + phase equals u.
Agent interval_at(double u, double phase) { return {Population::Interval, u - phase}; }

}  // namespace

TEST_CASE("closed-form pieces") {
    const cycling::Params p;
    CHECK(cycling::fold(0.5) == 0.0);
    CHECK(cycling::fold(0.0) == 0.5);
    CHECK(cycling::fold(1.0) == -0.5);
    CHECK(cycling::fold(2.25) == cycling::fold(0.25));
    CHECK(cycling::phase(p, 80.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(cycling::total_cluster_drift(p) == doctest::Approx(16.0 * std::numbers::sqrt2 / 3.0));
    CHECK(cycling::window(p, 0.0) == doctest::Approx(std::sqrt(2.0)));

    const double drift80 = oracle::simpson([&](double s) { return cycling::cluster_speed(p, s); }, 0.0, 80.0);
    CHECK(cycling::cluster_drift(p, 80.0) == doctest::Approx(drift80).epsilon(1e-10));
    CHECK(cycling::cluster_drift(p, 80.0) ==
          doctest::Approx(2.0 * std::numbers::sqrt2 / 3.0 * 8.0 * (1.0 - std::pow(81.0, -0.125))));

    const cycling::Params q{0.8, 9.0};
    const double phase_q = oracle::simpson([&](double s) { return cycling::speed(q, s); }, 0.0, 30.0);
    CHECK(cycling::phase(q, 30.0) == doctest::Approx(phase_q).epsilon(1e-10));
}

TEST_CASE("parameter validation") {
    CHECK_NOTHROW(cycling::Params{}.validate());
    CHECK_THROWS_AS((cycling::Params{0.6, 8.05}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((cycling::Params{1.0, 8.05}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((cycling::Params{0.75, 8.0}.validate()), std::invalid_argument);
}

TEST_CASE("analytic state") {
    const cycling::Params p;
    const auto s0 = analytic_state(p, 0.0, 4);
    CHECK(s0.cluster_right == 8.05);
    CHECK(s0.cluster_left == -8.05);
    CHECK(s0.interval_index == std::vector<double>{0.25, 0.75, 1.25, 1.75});
    CHECK(s0.interval_positions[1] == doctest::Approx(-0.25));
    CHECK(cycling::fold(0.5) == 0.0);

    const auto s = analytic_state(p, 13.7, 501);
    CHECK(s.cluster_left == -s.cluster_right);
    CHECK(s.cluster_right - 0.5 >= 8.05 - 0.5 - cycling::total_cluster_drift(p));
    for (double x : s.interval_positions) {
        CHECK(x >= -0.5);
        CHECK(x <= 0.5);
    }
}

TEST_CASE("analytic velocity") {
    const cycling::Params p;
    const double t = 3.0, phi = cycling::phase(p, t), v = cycling::speed(p, t);
    CHECK(analytic_velocity(p, t, interval_at(1.3, phi)) == doctest::Approx(v));   // floor odd
    CHECK(analytic_velocity(p, t, interval_at(2.3, phi)) == doctest::Approx(-v));  // floor even
    CHECK(analytic_velocity(p, t, {Population::ClusterRight, 0}) ==
          doctest::Approx(-2.0 * std::numbers::sqrt2 / 3.0 * std::pow(v, 1.5)));
    CHECK(analytic_velocity(p, t, {Population::ClusterLeft, 0}) ==
          doctest::Approx(2.0 * std::numbers::sqrt2 / 3.0 * std::pow(v, 1.5)));
    CHECK_THROWS_AS(analytic_velocity(p, 0.0, {Population::Interval, 1.0}), FoldPointError);
}

TEST_CASE("construction weights") {
    const cycling::Params p;
    const double t = 5.0, phi = cycling::phase(p, t), eps = cycling::window(p, t);
    const Agent right = interval_at(1.3, phi);  // moving right, at fold(1.3) = -0.2
    const Agent left = interval_at(0.6, phi);   // moving left
    const double xr = cycling::fold(1.3);

    CHECK(counterexample_weight(p, t, right, left, xr, xr + eps / 2) == 1.0);
    CHECK(counterexample_weight(p, t, left, right, xr + eps / 2, xr) == 1.0);
    CHECK(counterexample_weight(p, t, right, left, xr, xr + 1.5 * eps) == 0.0);
    CHECK(counterexample_weight(p, t, right, left, xr, xr - eps / 2) == 0.0);

    const Agent cr{Population::ClusterRight, 0};
    const double c = cycling::cluster_right_position(p, t);
    CHECK(counterexample_weight(p, t, right, cr, 0.5 - eps, c) == 0.0);
    const double inside = 0.5 - eps / 2;
    CHECK(counterexample_weight(p, t, right, cr, inside, c) ==
          doctest::Approx((eps * eps - (0.5 - inside) * (0.5 - inside)) / (2.0 * (c - inside))));
    CHECK(counterexample_weight(p, t, cr, right, c, inside) == counterexample_weight(p, t, right, cr, inside, c));
    CHECK(counterexample_weight(p, t, left, cr, inside, c) == 0.0);
}

TEST_CASE("quadrature of the interaction integral") {
    const cycling::Params p;
    const auto late = verify_rhs(p, 50.0, 2000, 0.01);
    CHECK(late.max_abs_error <= 0.02);
    CHECK(late.excluded > 0);
    CHECK(late.evaluated + late.excluded == 2002);

    const auto finer = verify_rhs(p, 50.0, 4000, 0.01);
    CHECK(finer.max_abs_error < late.max_abs_error);

    // the construction needs a window below 1; at t = 0.5 it is wider
    CHECK(cycling::window(p, 0.5) > 1.0);
    CHECK(verify_rhs(p, 0.5, 2000, 0.01).cluster_error > 0.02);
}

TEST_CASE("packed system") {
    const cycling::Params p;
    const auto e = packed_ensemble(p, 2.0, 100, 4);
    CHECK(e.size() == 108);
    double total = 0;
    for (double m : e.mass()) total += m;
    CHECK(total == doctest::Approx(1.0));
    CHECK(e.opinion().back() == doctest::Approx(cycling::cluster_right_position(p, 2.0)));

    const auto kernel = Kernel::cycle_weights(p);
    CHECK(kernel.symmetric());
    const auto v = rhs(e, kernel);
    const double t = 2.0;
    CHECK(v.back() == doctest::Approx(analytic_velocity(p, t, {Population::ClusterRight, 0})).epsilon(0.05));
}

TEST_CASE("cycling report") {
    const cycling::Params p;
    CounterexampleOptions o;
    o.n_interval = 1000;
    o.rhs_times = {50.0};
    const auto r = run_counterexample_report(p, o);
    CHECK(r.final_phase == doctest::Approx(8.0));
    REQUIRE_FALSE(r.tracked.empty());
    for (const auto& a : r.tracked) {
        CHECK(a.observed_reversals == a.expected_folds);
        CHECK(a.observed_reversals >= 4);
    }
    CHECK(r.max_w1_to_uniform < 10.0 / 1000);
    CHECK(r.max_mirror_defect == 0.0);
    CHECK(r.cluster_monotone);
    CHECK(r.min_cluster_gap >= r.gap_bound - 1e-12);
    CHECK(r.gap_bound >= 0.007);
    CHECK(r.order_flips >= 1);
    REQUIRE(r.rhs.size() == 1);
    CHECK(r.rhs[0].fine.n_interval == 2000);
}
