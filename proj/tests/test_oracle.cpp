#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "rotohom/models.hpp"
#include "rotohom/oracle.hpp"
#include "rotohom/physics.hpp"

using namespace rotohom;

namespace {

const OpticalConfig paper_optics{};
const SagnacArm paper_arm{};

AsymmetricModelInput symmetric_input(double delay, const ArmDelays& d,
                                     const OpticalConfig& optics) {
    return {delay, d.t_cw, d.t_ac, d.t_cw, d.t_ac, optics};
}

double model_scale(const OpticalConfig& optics) {
    return std::sqrt(std::numbers::pi) / (8.0 * optics.delta_omega);
}

}  // namespace

TEST_CASE("gauss-hermite nodes integrate gaussian moments") {
    std::vector<double> x, w;
    detail::gauss_hermite_nodes(64, x, w);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        m0 += w[i];
        m2 += w[i] * x[i] * x[i];
    }
    CHECK_THAT(m0, Catch::Matchers::WithinRel(std::sqrt(std::numbers::pi), 1e-12));
    CHECK_THAT(m2, Catch::Matchers::WithinRel(0.5 * std::sqrt(std::numbers::pi), 1e-12));
}

TEST_CASE("spectral quadrature of the coincidence level") {
    const ArmDelays d = propagation_times(paper_arm, RotationState{});

    SECTION("zero imbalance integrates to zero") {
        const double v = nc_quadrature(symmetric_input(0.7e-12, ArmDelays{0.0, 0.0}, paper_optics),
                                       QuadratureSpec{});
        CHECK(std::abs(v) < 1e-12);
    }
    SECTION("agrees with the closed form at the central dip") {
        const double quad = nc_quadrature(symmetric_input(0.0, d, paper_optics), QuadratureSpec{});
        const ModelOutput closed = nc_symmetric({0.0, d, paper_optics});
        CHECK(std::abs(quad - closed.n_c) <= 1e-6 * closed.background);
    }
    SECTION("agrees with the asymmetric closed form on a lopsided draw") {
        const AsymmetricModelInput in{0.0, 2.1e-12, 0.2e-12, 1.9e-12, 0.1e-12, paper_optics};
        const ModelOutput closed = nc_asymmetric(in);
        const double quad = nc_quadrature(in, QuadratureSpec{});
        CHECK(std::abs(quad - closed.n_c) <=
              1e-6 * std::max(std::abs(closed.n_c), closed.background));
    }
    SECTION("imaginary residual stays below 1e-10 of scale on random draws") {
        std::mt19937_64 gen(4);
        std::uniform_real_distribution<double> ut(-2.5e-12, 2.5e-12);
        std::uniform_real_distribution<double> ud(-3e-12, 3e-12);
        QuadratureSpec quad{1024, 10.0};
        for (int i = 0; i < 100; ++i) {
            CHECK_NOTHROW(nc_quadrature(
                {ud(gen), ut(gen), ut(gen), ut(gen), ut(gen), paper_optics}, quad));
        }
    }
    SECTION("node doubling changes the default-spec result below 1e-8") {
        const QuadratureResult r =
            nc_quadrature_checked(symmetric_input(0.4 * d.delta_t(), d, paper_optics),
                                  QuadratureSpec{});
        CHECK(r.converged);
        CHECK(r.relative_change < 1e-8);
    }
    SECTION("invariant under a common offset of all transit times") {
        const AsymmetricModelInput in{0.3e-12, 2.1e-12, 0.2e-12, 1.9e-12, 0.1e-12, paper_optics};
        AsymmetricModelInput shifted = in;
        const double off = 5e-9;  // a metre-scale fibre worth of common delay
        shifted.t_icw += off;
        shifted.t_iac += off;
        shifted.t_scw += off;
        shifted.t_sac += off;
        const double a = nc_quadrature(in, QuadratureSpec{});
        const double b = nc_quadrature(shifted, QuadratureSpec{});
        CHECK_THAT(a, Catch::Matchers::WithinRel(b, 1e-9));
    }
    SECTION("gauss-hermite scheme matches in its smooth regime") {
        // Short imbalance keeps the integrand phases resolvable by polynomials.
        const ArmDelays short_d{1.0e-13, 0.0};
        const QuadratureSpec gh{256, 12.0, QuadScheme::gauss_hermite};
        const double quad = nc_quadrature(symmetric_input(4e-14, short_d, paper_optics), gh);
        const ModelOutput closed = nc_symmetric({4e-14, short_d, paper_optics});
        CHECK_THAT(quad, Catch::Matchers::WithinRel(closed.n_c, 1e-8));
    }
    SECTION("result is identical under a single-thread cap") {
        const AsymmetricModelInput in = symmetric_input(0.4 * d.delta_t(), d, paper_optics);
        const double multi = nc_quadrature(in, QuadratureSpec{});
        setenv("ROTOHOM_THREADS", "1", 1);
        const double single = nc_quadrature(in, QuadratureSpec{});
        unsetenv("ROTOHOM_THREADS");
        CHECK(multi == single);
    }
}

TEST_CASE("pair-spectrum normalization") {
    const QuadratureSpec quad{2048, 12.0};
    SECTION("normalized at the experimental pair spread") {
        CHECK_THAT(spectrum_normalization(paper_optics, quad),
                   Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    SECTION("normalized when the pair spread matches the photon spread") {
        OpticalConfig o = paper_optics;
        o.sigma_p = o.delta_omega;
        CHECK_THAT(spectrum_normalization(o, quad), Catch::Matchers::WithinAbs(1.0, 1e-6));
    }
    SECTION("doubling the amplitude quadruples the norm") {
        const double scaled = detail::pair_grid_sum(paper_optics, quad, [&](double w1, double w2) {
            return 4.0 * pair_spectrum_density(w1, w2, paper_optics);
        });
        CHECK_THAT(scaled, Catch::Matchers::WithinAbs(4.0, 1e-5));
    }
    SECTION("node doubling consistency") {
        const QuadratureResult r =
            spectrum_normalization_checked(paper_optics, QuadratureSpec{1024, 12.0});
        CHECK(r.converged);
    }
}

TEST_CASE("exchange-overlap coincidence probability") {
    const ArmDelays d = propagation_times(paper_arm, RotationState{});
    OpticalConfig probe = paper_optics;
    probe.sigma_p = 0.1 * probe.delta_omega;
    const QuadratureSpec quad{2048, 10.0};

    SECTION("matches the closed form across a delay grid") {
        for (int i = 0; i < 20; ++i) {
            const double delay = (-1.2 + 2.4 * i / 19.0) * d.delta_t();
            const double closed = finite_sigma_coincidence_probability(delay, d, probe);
            const double quad_v = pc_overlap_quadrature(delay, d, probe, quad);
            CHECK(std::abs(closed - quad_v) <= 1e-5 * std::max({closed, quad_v, 0.01}));
        }
    }
    SECTION("tends to 1/2 at large delay") {
        const double far = 3.0 * d.delta_t() + 40.0 / probe.delta_omega;
        CHECK_THAT(pc_overlap_quadrature(far, d, probe, quad),
                   Catch::Matchers::WithinAbs(0.5, 1e-6));
    }
    SECTION("perfect exchange overlap suppresses coincidences") {
        // Scan for the overlap maximum; it sits at zero scanned delay where
        // the exchanged and unexchanged amplitudes coincide.
        double min_pc = 1.0;
        for (int i = -10; i <= 10; ++i)
            min_pc = std::min(
                min_pc, pc_overlap_quadrature(i * 0.05 * d.delta_t(), d, probe, quad));
        CHECK(min_pc <= 1e-3);
    }
    SECTION("node doubling consistency") {
        const QuadratureResult r =
            pc_overlap_quadrature_checked(0.4 * d.delta_t(), d, probe, QuadratureSpec{1024, 10.0});
        CHECK(r.converged);
    }
}

TEST_CASE("state-probability quadrature ties to the analytic normalization") {
    const ArmDelays d = propagation_times(paper_arm, RotationState{});
    const QuadratureSpec quad{2048, 10.0};
    for (const double frac : {0.01, 0.1, 0.5}) {
        OpticalConfig o = paper_optics;
        o.sigma_p = frac * o.delta_omega;
        const double pf_quad = pf_quadrature(d, o, quad);
        const double pf_closed = finite_sigma_state_probability(d, o);
        CHECK_THAT(pf_quad, Catch::Matchers::WithinRel(pf_closed, 1e-6));

        // Analytic final-state normalization, rescaled by exp(-dw^2 dt^2),
        // equals (pi dw^2 sigma_p / sqrt(2 dw^2 + sigma_p^2)) * 8 * P_f.
        const double dw2 = o.delta_omega * o.delta_omega;
        const double sp2 = o.sigma_p * o.sigma_p;
        const double dt = d.delta_t();
        const double mu_dt = o.mu() * dt;
        const double denom = 2.0 * dw2 + sp2;
        const double bracket =
            guarded_exp(-dw2 * dt * dt) -
            4.0 * std::cos(wrap_phase(mu_dt)) *
                guarded_exp(-dw2 * (dw2 + sp2) * dt * dt / (2.0 * denom)) +
            std::cos(wrap_phase(2.0 * mu_dt)) * guarded_exp(-dw2 * sp2 * dt * dt / denom) +
            2.0;
        const double nf_rescaled =
            std::numbers::pi * dw2 * o.sigma_p / std::sqrt(denom) * bracket;
        CHECK_THAT(nf_rescaled,
                   Catch::Matchers::WithinRel(std::numbers::pi * dw2 * o.sigma_p /
                                                  std::sqrt(denom) * 8.0 * pf_quad,
                                              1e-6));
    }
}

TEST_CASE("quadrature spec validation") {
    CHECK_THROWS_AS(QuadratureSpec{32}.validate(), std::invalid_argument);
    CHECK_THROWS_AS((QuadratureSpec{128, 4.0}).validate(), std::invalid_argument);
    CHECK_NOTHROW((QuadratureSpec{128, 4.0, QuadScheme::gauss_hermite}).validate());
}
