#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "opinion_lab/ensemble.hpp"
#include "opinion_lab/kernels.hpp"
#include "oracles.hpp"

using namespace opinion_lab;

TEST_CASE("kernel evaluation examples") {
    CHECK(Kernel::hegselmann_krause(0.25)(0, 0.1, 0.7, 0.1, 0.3) == 1.0);
    CHECK(Kernel::gaussian_decay(PiecewiseConstant(1.0))(0, 0.2, 0.9, 0.4, 0.4) == 1.0);
    CHECK(Kernel::ring_sensing(0.1, 0.3)(0, 0.0, 1.0, 0.4, 0.45) == 0.0);
    CHECK(Kernel::typed_confidence(0.2, 0.3)(0, 0.1, 0.6, 0.4, 0.5) == 0.0);
    CHECK(Kernel::typed_confidence(0.2, 0.3)(0, 0.1, 0.3, 0.4, 0.5) == 1.0);
}

TEST_CASE("confidence boundary ties carry no weight") {
    const auto hk = Kernel::hegselmann_krause(0.25);
    CHECK(hk(0, 0, 0, 0.0, 0.25) == 0.0);
    CHECK(hk(0, 0, 0, 0.0, std::nextafter(0.25, 0.0)) == 1.0);
}

TEST_CASE("agent-dependent radii") {
    const PiecewiseConstant radius({0.5}, {0.1, 0.3});
    const auto listen = Kernel::bounded_confidence(radius);
    const auto speak = Kernel::bounded_influence(radius);
    CHECK(listen(0, 0.2, 0.8, 0.0, 0.2) == 0.0);
    CHECK(listen(0, 0.8, 0.2, 0.0, 0.2) == 1.0);
    CHECK(speak(0, 0.2, 0.8, 0.0, 0.2) == 1.0);
    CHECK(speak(0, 0.8, 0.2, 0.0, 0.2) == 0.0);
    CHECK_FALSE(listen.symmetric());
    CHECK(listen.weight_bound() == 1.0);
    CHECK_FALSE(listen.lipschitz().has_value());
}

TEST_CASE("declared traits") {
    const auto g = Kernel::gaussian_decay(PiecewiseConstant({0.5}, {0.5, 2.0}));
    CHECK(g.weight_bound() == 1.0);
    REQUIRE(g.lipschitz().has_value());
    CHECK(*g.lipschitz() == doctest::Approx(2.0));  // 1 / sigma_min
    CHECK_FALSE(g.symmetric());
    CHECK(Kernel::gaussian_decay(PiecewiseConstant(1.0)).symmetric());
    CHECK(Kernel::constant(0.5).lipschitz() == 0.0);
    CHECK(Kernel::zero().weight_bound() == 0.0);
    CHECK_FALSE(Kernel::hegselmann_krause(0.2).lipschitz().has_value());
    CHECK_THROWS_AS(Kernel::hegselmann_krause(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::ring_sensing(0.3, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(Kernel::custom([](double, double, double, double, double) { return 0.0; },
                                   KernelTraits{-1.0, std::nullopt, false, false}),
                    std::invalid_argument);
}

TEST_CASE("probe: Gamma membership, symmetry and Lipschitz estimate") {
    const auto hk = probe_kernel(Kernel::hegselmann_krause(0.2), 4000, 7, {0.2, 1.0});
    CHECK(hk.gamma_holds);
    CHECK(hk.bound_respected);

    const auto hk_wider = probe_kernel(Kernel::hegselmann_krause(0.3), 4000, 8, {0.2, 1.0});
    CHECK(hk_wider.gamma_holds);

    const auto narrow = probe_kernel(Kernel::hegselmann_krause(0.1), 4000, 9, {0.2, 1.0});
    CHECK_FALSE(narrow.gamma_holds);

    const auto g = probe_kernel(Kernel::gaussian_decay(PiecewiseConstant(1.0)), 10000, 3);
    CHECK(g.max_symmetry_violation == 0.0);
    CHECK(g.lipschitz_estimate <= 1.0);

    const auto g2 = probe_kernel(Kernel::gaussian_decay(PiecewiseConstant({0.5}, {0.3, 1.0})), 10000, 3);
    CHECK(g2.max_symmetry_violation > 0.0);

    const auto c = probe_kernel(Kernel::constant(0.5), 2000, 1);
    CHECK(c.lipschitz_estimate == 0.0);
    CHECK(c.max_weight_seen == 0.5);
}

TEST_CASE("probe flags a custom rule that exceeds its declared bound") {
    const auto k = Kernel::custom([](double, double, double, double xa, double) { return 2.0 * xa; },
                                  KernelTraits{1.0, 2.0, false, false});
    CHECK_FALSE(probe_kernel(k, 2000, 1).bound_respected);
}

TEST_CASE("finite consensus embedding") {
    SUBCASE("symmetric schedule gives a symmetric kernel") {
        WeightSchedule s;
        s.blocks = 2;
        s.segments.push_back({0.0, {0, 0.7, 0.7, 0}});
        const auto k = finite_consensus_embed(s);
        CHECK(k.symmetric());
        CHECK(k.weight_bound() == doctest::Approx(1.4));
        CHECK(probe_kernel(k, 5000, 2).max_symmetry_violation == 0.0);
    }
    SUBCASE("zero schedule freezes every opinion") {
        WeightSchedule s;
        s.blocks = 3;
        s.segments.push_back({0.0, std::vector<double>(9, 0.0)});
        const auto k = finite_consensus_embed(s);
        const auto x0 = uniform_ensemble(30, OpinionProfile::identity());
        IntegratorConfig cfg;
        cfg.t_end = 2.0;
        const auto traj = integrate(x0, k, cfg);
        CHECK(fixtures::to_vector(traj.final().opinion()) == fixtures::to_vector(x0.opinion()));
    }
    SUBCASE("negative entries are rejected") {
        WeightSchedule s;
        s.blocks = 2;
        s.segments.push_back({0.0, {0, -1, 0, 0}});
        CHECK_THROWS_AS(finite_consensus_embed(s), std::invalid_argument);
    }
    SUBCASE("alternating preset switches at integer times") {
        const auto k = finite_consensus_embed(alternating_three_block_schedule());
        CHECK_FALSE(k.symmetric());
        CHECK(k.time_breakpoints(0.0, 3.5) == std::vector<double>{1.0, 2.0, 3.0});
        // block 2 listens to block 1, then to block 3
        CHECK(k(0.5, 0.5, 0.1, 0, 0) == 3.0);
        CHECK(k(0.5, 0.5, 0.9, 0, 0) == 0.0);
        CHECK(k(1.5, 0.5, 0.9, 0, 0) == 3.0);
        CHECK(k(2.5, 0.5, 0.1, 0, 0) == 3.0);
    }
}

TEST_CASE("block-constant data follows the finite system") {
    const auto schedule = alternating_three_block_schedule();
    const auto kernel = finite_consensus_embed(schedule);
    const double z0[3] = {0.1, 0.45, 0.9};
    const auto x0 = uniform_ensemble(
        30, OpinionProfile::piecewise(PiecewiseConstant({1.0 / 3.0, 2.0 / 3.0}, {z0[0], z0[1], z0[2]})));
    IntegratorConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 4.0;
    const auto traj = integrate(x0, kernel, cfg);

    const auto direct = oracle::rk4({z0[0], z0[1], z0[2]}, 0.01, 400, [&](double t, const std::vector<double>& z) {
        const bool first_half = std::fmod(t, 2.0) < 1.0;
        std::vector<double> dz(3, 0.0);
        dz[1] = first_half ? z[0] - z[1] : z[2] - z[1];
        return dz;
    });
    const auto x = traj.final().opinion();
    for (std::size_t i = 0; i < 30; ++i) CHECK(x[i] == doctest::Approx(direct[i / 10]).epsilon(1e-9));
}
