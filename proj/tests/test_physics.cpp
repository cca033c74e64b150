#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rotohom/physics.hpp"

using namespace rotohom;

namespace {
const OpticalConfig paper_optics{};  // 355 nm pump, 1.19e13 rad/s width
const SagnacArm paper_arm{};         // 41 m loop, r = 0.454 m, 1 m birefringent segment
}  // namespace

TEST_CASE("sagnac delay formula and symmetries") {
    CHECK(sagnac_delay(1.0, 0.0) == 0.0);
    // 4 / c^2 with c = 299 792 458 m/s
    CHECK_THAT(sagnac_delay(1.0, 1.0),
               Catch::Matchers::WithinRel(4.450600224214474e-17, 1e-14));
    CHECK(sagnac_delay(2.5, -3.0) == -sagnac_delay(2.5, 3.0));

    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double a = std::abs(u(gen)), w = u(gen), k = u(gen);
        CHECK_THAT(sagnac_delay(k * a, w), Catch::Matchers::WithinRel(k * sagnac_delay(a, w), 1e-12));
        CHECK_THAT(sagnac_delay(a, k * w), Catch::Matchers::WithinRel(k * sagnac_delay(a, w), 1e-12));
    }
}

TEST_CASE("propagation times reproduce the loop delays") {
    SECTION("birefringent imbalance at rest") {
        const ArmDelays d = propagation_times(paper_arm, RotationState{});
        CHECK_THAT(d.delta_t(), Catch::Matchers::WithinRel(1.8816350610127757e-12, 1e-12));
    }
    SECTION("no birefringent segment, no rotation") {
        SagnacArm arm = paper_arm;
        arm.birefringent_length = 0.0;
        CHECK(propagation_times(arm, RotationState{}).delta_t() == 0.0);
    }
    SECTION("rotational imbalance matches the flip condition") {
        SagnacArm arm = paper_arm;
        arm.birefringent_length = 0.0;
        const ArmDelays d = propagation_times(arm, RotationState::from_hz(0.455));
        CHECK_THAT(d.delta_t(), Catch::Matchers::WithinRel(1.1841850239986303e-15, 1e-12));
        // 0.455 Hz is the quoted flip frequency; pi/mu is the exact phase step
        CHECK_THAT(d.delta_t(),
                   Catch::Matchers::WithinRel(std::numbers::pi / paper_optics.mu(), 1e-4));
    }
    SECTION("odd in rotation about the zero-rotation baseline") {
        std::mt19937_64 gen(2);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        const double baseline = 2.0 * paper_arm.birefringent_length * paper_arm.delta_n() /
                                speed_of_light;
        for (int i = 0; i < 100; ++i) {
            const RotationState rot{u(gen), {}};
            const RotationState neg{-rot.omega, {}};
            const double sum = propagation_times(paper_arm, rot).delta_t() +
                               propagation_times(paper_arm, neg).delta_t();
            CHECK_THAT(sum, Catch::Matchers::WithinRel(baseline, 1e-12));
        }
    }
    SECTION("rotational part equals the enclosed-area Sagnac delay") {
        SagnacArm arm = paper_arm;
        arm.birefringent_length = 0.0;
        const double area = 0.5 * arm.fiber_length * arm.loop_radius;
        const RotationState rot = RotationState::from_hz(0.3);
        CHECK_THAT(propagation_times(arm, rot).delta_t(),
                   Catch::Matchers::WithinRel(sagnac_delay(area, rot.omega), 1e-12));
    }
}

TEST_CASE("flip half period") {
    CHECK_THAT(flip_half_period(paper_arm, paper_optics),
               Catch::Matchers::WithinAbs(0.455, 1e-3));
    CHECK_THAT(flip_half_period(paper_arm, paper_optics),
               Catch::Matchers::WithinRel(0.4549875178707195, 1e-12));

    SagnacArm doubled = paper_arm;
    doubled.fiber_length = 82.0;
    CHECK_THAT(flip_half_period(doubled, paper_optics),
               Catch::Matchers::WithinRel(0.5 * flip_half_period(paper_arm, paper_optics), 1e-12));

    OpticalConfig red = paper_optics;
    red.lambda_p = 710e-9;
    CHECK_THAT(flip_half_period(paper_arm, red),
               Catch::Matchers::WithinRel(0.9099750357414390, 1e-12));

    // algebraic identity: flip * 4 pi L_f r / c = lambda_p
    const double lhs = flip_half_period(paper_arm, paper_optics) * 4.0 * std::numbers::pi *
                       paper_arm.fiber_length * paper_arm.loop_radius / speed_of_light;
    CHECK_THAT(lhs, Catch::Matchers::WithinRel(paper_optics.lambda_p, 1e-14));
}

TEST_CASE("stage mapping") {
    const StageMapping map{speed_of_light, 0.002};
    CHECK(stage_to_delay(map.origin, map) == 0.0);
    CHECK_THAT(stage_to_delay(map.origin + speed_of_light * 1e-12, map),
               Catch::Matchers::WithinRel(1e-12, 1e-12));
    const double x = 0.01337;
    CHECK_THAT(delay_to_stage(stage_to_delay(x, map), map),
               Catch::Matchers::WithinRel(x, 1e-14));

    SECTION("strictly monotone") {
        double prev = stage_to_delay(-0.01, map);
        for (int i = 1; i <= 100; ++i) {
            const double cur = stage_to_delay(-0.01 + i * 1e-4, map);
            CHECK(cur > prev);
            prev = cur;
        }
    }
}

TEST_CASE("derived optical quantities") {
    CHECK_THAT(paper_optics.omega_p(),
               Catch::Matchers::WithinRel(two_pi * speed_of_light / 355e-9, 1e-15));
    CHECK(paper_optics.mu() == 0.5 * paper_optics.omega_p());
}

TEST_CASE("birefringent phase snapping") {
    const double mu = paper_optics.mu();
    for (const auto& [target, want] :
         {std::pair{PhaseTarget::peak, 1.0}, {PhaseTarget::dip, -1.0},
          {PhaseTarget::quarter, 0.0}}) {
        const SagnacArm snapped = snap_birefringent_phase(paper_arm, paper_optics, target);
        const double dt = propagation_times(snapped, RotationState{}).delta_t();
        CHECK_THAT(std::cos(std::remainder(mu * dt, two_pi)),
                   Catch::Matchers::WithinAbs(want, 1e-9));
        // minimal nudge: well under one phase period
        CHECK(std::abs(snapped.n_cw - paper_arm.n_cw) < two_pi * speed_of_light /
                                                            (mu * paper_arm.birefringent_length));
    }
}

TEST_CASE("invariant validation rejects bad parameters") {
    OpticalConfig bad_optics = paper_optics;
    bad_optics.lambda_p = 0.0;
    CHECK_THROWS_AS(bad_optics.validate(), std::invalid_argument);
    bad_optics = paper_optics;
    bad_optics.sigma_p = -1.0;
    CHECK_THROWS_AS(bad_optics.validate(), std::invalid_argument);

    SagnacArm bad_arm = paper_arm;
    bad_arm.birefringent_length = 100.0;  // longer than the fibre
    CHECK_THROWS_AS(bad_arm.validate(), std::invalid_argument);
    bad_arm = paper_arm;
    bad_arm.n_ac = 0.5;
    CHECK_THROWS_AS(bad_arm.validate(), std::invalid_argument);

    StageMapping bad_map;
    bad_map.meters_per_second_of_delay = 0.0;
    CHECK_THROWS_AS(bad_map.validate(), std::invalid_argument);
}

TEST_CASE("rotation state sign conventions") {
    CHECK(RotationState::from_hz(0.5).omega == Catch::Approx(two_pi * 0.5));
    CHECK(RotationState::from_hz(0.5).direction() == Direction::cw);
    CHECK(RotationState::from_hz(-0.5).direction() == Direction::acw);
    CHECK(direction_from_string("cw") == Direction::cw);
    CHECK(direction_from_string("acw") == Direction::acw);
    CHECK_THROWS_AS(direction_from_string("sideways"), std::invalid_argument);
}
