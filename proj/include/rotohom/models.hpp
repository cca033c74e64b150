#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "rotohom/physics.hpp"
#include "rotohom/util.hpp"

namespace rotohom {

// One HOM delay evaluation against a shared pair of loop transit times.
struct SymmetricModelInput {
    double delta_t_hom = 0.0;  // scanned delay between the two arms (s)
    ArmDelays arm_delays;      // loop transit times, common to both arms
    OpticalConfig optics;
};

// Fully general evaluation with independent transit times per arm and
// circulation direction.
struct AsymmetricModelInput {
    double delta_t_hom = 0.0;
    double t_icw = 0.0, t_iac = 0.0;  // idler-arm loop times (s)
    double t_scw = 0.0, t_sac = 0.0;  // signal-arm loop times (s)
    OpticalConfig optics;
};

// Coincidence level in closed-form units: the sqrt(pi)/(8 delta_omega)
// prefactor is retained, an overall count-rate scale is applied downstream.
struct ModelOutput {
    double n_c = 0.0;        // coincidence level at the requested delay
    double background = 0.0; // level in the large-delay limit
};

namespace detail {
inline double closed_form_prefactor(const OpticalConfig& optics) {
    return std::sqrt(std::numbers::pi) / (8.0 * optics.delta_omega);
}
}  // namespace detail

// Delay-independent part of the coincidence level (without the prefactor).
// Even in delta_t; zero at delta_t = 0 where the loop output port is dark.
inline double background_cb(const ArmDelays& arm_delays, const OpticalConfig& optics) {
    const double dt = arm_delays.delta_t();
    const double dw2 = optics.delta_omega * optics.delta_omega;
    const double mu = optics.mu();
    return 4.0 - 8.0 * guarded_exp(-0.25 * dw2 * dt * dt) * std::cos(wrap_phase(mu * dt)) +
           2.0 * std::cos(wrap_phase(2.0 * mu * dt)) + 2.0 * guarded_exp(-dw2 * dt * dt);
}

// Coincidence level for symmetric arms as a function of the HOM delay.
// Five interference features: fixed dips at 0 and +-delta_t, oscillating
// dips/peaks at +-delta_t/2 whose sign follows cos(mu * delta_t).
inline ModelOutput nc_symmetric(const SymmetricModelInput& in) {
    in.optics.validate();
    const double dw = in.optics.delta_omega;
    const double dw2 = dw * dw;
    const double mu = in.optics.mu();
    const double dt = in.arm_delays.delta_t();
    const double d = in.delta_t_hom;

    const double cos_half = std::cos(wrap_phase(mu * dt));
    const double cos_full = std::cos(wrap_phase(2.0 * mu * dt));

    const double cb = background_cb(in.arm_delays, in.optics);
    double bracket = cb;
    bracket -= guarded_exp(-dw2 * (d + dt) * (d + dt));
    bracket -= guarded_exp(-dw2 * (d - dt) * (d - dt));
    bracket += 4.0 * cos_half * (guarded_exp(-dw2 * (d + 0.5 * dt) * (d + 0.5 * dt)) +
                                 guarded_exp(-dw2 * (d - 0.5 * dt) * (d - 0.5 * dt)));
    bracket -= (4.0 + 2.0 * cos_full) * guarded_exp(-dw2 * d * d);

    const double pref = detail::closed_form_prefactor(in.optics);
    return ModelOutput{pref * bracket, pref * cb};
}

// Coincidence level allowing the two arms (and the two circulation
// directions within each arm) to have independent transit times.
inline ModelOutput nc_asymmetric(const AsymmetricModelInput& in) {
    in.optics.validate();
    const double dw = in.optics.delta_omega;
    const double dw2 = dw * dw;
    const double mu = in.optics.mu();
    const double d = in.delta_t_hom;

    const double di = in.t_icw - in.t_iac;  // idler loop imbalance
    const double ds = in.t_scw - in.t_sac;  // signal loop imbalance
    const double cos_i = std::cos(wrap_phase(mu * di));
    const double cos_s = std::cos(wrap_phase(mu * ds));

    double bg = 4.0;
    bg -= 4.0 * guarded_exp(-0.25 * dw2 * di * di) * cos_i;
    bg -= 4.0 * guarded_exp(-0.25 * dw2 * ds * ds) * cos_s;
    bg += 2.0 * guarded_exp(-0.25 * dw2 * (di - ds) * (di - ds)) * std::cos(wrap_phase(mu * (di + ds)));
    bg += 2.0 * guarded_exp(-0.25 * dw2 * (di + ds) * (di + ds)) * std::cos(wrap_phase(mu * (di - ds)));

    // Cross-arm differences are formed before any delay is added: the
    // absolute transit times are ~ns while their differences are ~ps, so
    // summing first would shed significant digits.
    const double cw_cw = in.t_icw - in.t_scw;
    const double cw_ac = in.t_icw - in.t_sac;
    const double ac_cw = in.t_iac - in.t_scw;
    const double ac_ac = in.t_iac - in.t_sac;

    double osc = 0.0;
    osc -= guarded_exp(-dw2 * std::pow(d + cw_cw, 2));
    osc -= guarded_exp(-dw2 * std::pow(d + cw_ac, 2));
    osc -= guarded_exp(-dw2 * std::pow(d + ac_cw, 2));
    osc -= guarded_exp(-dw2 * std::pow(d + ac_ac, 2));
    osc += 2.0 * cos_s * (guarded_exp(-0.25 * dw2 * std::pow(2.0 * d + cw_cw + cw_ac, 2)) +
                          guarded_exp(-0.25 * dw2 * std::pow(2.0 * d + ac_cw + ac_ac, 2)));
    osc += 2.0 * cos_i * (guarded_exp(-0.25 * dw2 * std::pow(2.0 * d + cw_cw + ac_cw, 2)) +
                          guarded_exp(-0.25 * dw2 * std::pow(2.0 * d + cw_ac + ac_ac, 2)));
    osc -= 4.0 * cos_s * cos_i * guarded_exp(-0.25 * dw2 * std::pow(2.0 * d + cw_cw + ac_ac, 2));

    const double pref = detail::closed_form_prefactor(in.optics);
    return ModelOutput{pref * (bg + osc), pref * bg};
}

namespace detail {

// Net exponents of the finite-pair-spread expressions. Each is the analytic
// combination of a positive and a larger negative exponential argument; the
// combined form stays representable where the separate factors overflow.
struct FiniteSigmaExponents {
    double e_half;  // exponent of the cos(mu dt) state term
    double e_full;  // exponent of the cos(2 mu dt) state term
    double e_gauss; // exponent of the plain Gaussian state term
};

inline FiniteSigmaExponents finite_sigma_exponents(double dt, const OpticalConfig& optics) {
    const double dw2 = optics.delta_omega * optics.delta_omega;
    const double sp2 = optics.sigma_p * optics.sigma_p;
    const double denom = 2.0 * dw2 + sp2;
    return FiniteSigmaExponents{
        -dw2 * (dw2 + sp2) * dt * dt / (2.0 * denom),
        -dw2 * sp2 * dt * dt / denom,
        -dw2 * dt * dt,
    };
}

}  // namespace detail

// Probability that a photon pair survives both loop output ports and reaches
// the final beamsplitter, for finite pair-sum frequency spread sigma_p.
inline double finite_sigma_state_probability(const ArmDelays& arm_delays,
                                             const OpticalConfig& optics) {
    optics.validate();
    if (optics.sigma_p == 0.0)
        throw std::domain_error("state probability needs sigma_p > 0; use the closed-form model");
    const double dt = arm_delays.delta_t();
    const double mu = optics.mu();
    const auto e = detail::finite_sigma_exponents(dt, optics);
    return 0.125 * (2.0 - 4.0 * std::cos(wrap_phase(mu * dt)) * guarded_exp(e.e_half) +
                    std::cos(wrap_phase(2.0 * mu * dt)) * guarded_exp(e.e_full) +
                    guarded_exp(e.e_gauss));
}

// Probability of a coincidence (rather than bunching) at the final
// beamsplitter, for finite sigma_p. The interference-to-normalization ratio
// is evaluated with the common factor exp(-delta_omega^2 dt^2) applied to
// both numerator and denominator.
inline double finite_sigma_coincidence_probability(double delta_t_hom,
                                                   const ArmDelays& arm_delays,
                                                   const OpticalConfig& optics) {
    optics.validate();
    if (optics.sigma_p == 0.0)
        throw std::domain_error("coincidence probability needs sigma_p > 0");
    const double dt = arm_delays.delta_t();
    const double d = delta_t_hom;
    const double dw2 = optics.delta_omega * optics.delta_omega;
    const double sp2 = optics.sigma_p * optics.sigma_p;
    const double denom = 2.0 * dw2 + sp2;
    const double mu = optics.mu();
    const double cos_half = std::cos(wrap_phase(mu * dt));
    const double cos_full = std::cos(wrap_phase(2.0 * mu * dt));
    const auto e = detail::finite_sigma_exponents(dt, optics);

    const double i1 = 4.0 * guarded_exp(-dw2 * d * d) +
                      guarded_exp(-dw2 * (d + dt) * (d + dt)) +
                      guarded_exp(-dw2 * (d - dt) * (d - dt));
    const double e2 = -(sp2 * (2.0 * d * d + 2.0 * d * dt + dt * dt) +
                        dw2 * (2.0 * d + dt) * (2.0 * d + dt)) *
                      dw2 / (2.0 * denom);
    const double e3 = -(sp2 * (2.0 * d * d - 2.0 * d * dt + dt * dt) +
                        dw2 * (2.0 * d - dt) * (2.0 * d - dt)) *
                      dw2 / (2.0 * denom);
    const double i2 = -4.0 * cos_half * guarded_exp(e2);
    const double i3 = -4.0 * cos_half * guarded_exp(e3);
    const double i4 = 2.0 * cos_full * guarded_exp(e.e_full - dw2 * d * d);

    const double s = 2.0 * guarded_exp(e.e_gauss) - 8.0 * cos_half * guarded_exp(e.e_half) +
                     2.0 * cos_full * guarded_exp(e.e_full) + 4.0;
    if (!(std::abs(s) > 1e-13))
        throw std::domain_error(
            "degenerate normalization: the prepared state has zero amplitude (dark loop output)");
    return 0.5 * (1.0 - (i1 + i2 + i3 + i4) / s);
}

// Coincidence counts at unit incoming pair rate: state-survival probability
// times coincidence probability. States with survival probability below
// 1e-14 (fourteen orders under the working scale) count as exactly zero,
// which covers the dark-port case delta_t = 0 where the coincidence
// probability itself is undefined.
inline double finite_sigma_counts(double delta_t_hom, const ArmDelays& arm_delays,
                                  const OpticalConfig& optics) {
    const double pf = finite_sigma_state_probability(arm_delays, optics);
    if (pf < 1e-14) return 0.0;
    return pf * finite_sigma_coincidence_probability(delta_t_hom, arm_delays, optics);
}

// Scale factor connecting finite-sigma counts to the closed-form units in
// the sigma_p -> 0 limit.
inline double finite_sigma_to_closed_form(const OpticalConfig& optics) {
    return 4.0 * std::sqrt(std::numbers::pi) / optics.delta_omega;
}

}  // namespace rotohom
