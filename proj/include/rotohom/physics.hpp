#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace rotohom {

// Speed of light, exact by SI definition (m/s).
inline constexpr double speed_of_light = 299792458.0;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Source and filter parameters of the down-converted photon pair.
struct OpticalConfig {
    double lambda_p = 355e-9;          // pump wavelength (m)
    double delta_omega = 1.19e13;      // single-photon spectral width (rad/s)
    double sigma_p = two_pi * 2e10;    // pair-sum frequency spread (rad/s)

    double omega_p() const { return two_pi * speed_of_light / lambda_p; }
    double mu() const { return 0.5 * omega_p(); }  // mean photon frequency (rad/s)

    void validate() const {
        if (!(lambda_p > 0.0)) throw std::invalid_argument("optics.lambda_p must be > 0");
        if (!(delta_omega > 0.0)) throw std::invalid_argument("optics.delta_omega must be > 0");
        if (!(sigma_p >= 0.0)) throw std::invalid_argument("optics.sigma_p must be >= 0");
    }
};

// Fibre Sagnac loop geometry. The loop is wound with radius loop_radius on
// the rotating platform; a short segment of length birefringent_length sees
// index n_cw in one circulation direction and n_ac in the other.
struct SagnacArm {
    double fiber_length = 41.0;          // total loop fibre length L_f (m)
    double loop_radius = 0.454;          // winding radius r (m)
    double birefringent_length = 1.0;    // axis-flipped segment L_b (m)
    double n_cw = 1.4555641;             // index seen clockwise
    double n_ac = 1.4550000;             // index seen anticlockwise

    double delta_n() const { return n_cw - n_ac; }

    void validate() const {
        if (!(fiber_length > 0.0)) throw std::invalid_argument("arm.fiber_length must be > 0");
        if (!(loop_radius > 0.0)) throw std::invalid_argument("arm.loop_radius must be > 0");
        if (!(birefringent_length >= 0.0) || birefringent_length > fiber_length)
            throw std::invalid_argument("arm.birefringent_length must be in [0, fiber_length]");
        if (!(n_cw >= 1.0) || !(n_ac >= 1.0))
            throw std::invalid_argument("arm refractive indices must be >= 1");
    }
};

enum class Direction { cw, acw };

inline const char* to_string(Direction d) { return d == Direction::cw ? "cw" : "acw"; }

inline Direction direction_from_string(const std::string& s) {
    if (s == "cw") return Direction::cw;
    if (s == "acw") return Direction::acw;
    throw std::invalid_argument("direction must be 'cw' or 'acw', got '" + s + "'");
}

// Signed platform rotation; positive omega is clockwise.
struct RotationState {
    double omega = 0.0;                        // angular velocity (rad/s)
    std::optional<double> set_frequency = {};  // motor setting before calibration (Hz)

    static RotationState from_hz(double hz) { return RotationState{two_pi * hz, {}}; }
    double hz() const { return omega / two_pi; }
    Direction direction() const { return omega >= 0.0 ? Direction::cw : Direction::acw; }
};

// Per-direction propagation times through one Sagnac loop.
struct ArmDelays {
    double t_cw = 0.0;  // clockwise transit time (s)
    double t_ac = 0.0;  // anticlockwise transit time (s)

    double delta_t() const { return t_cw - t_ac; }
};

// Linear translation-stage calibration: delay = (position - origin) / factor.
struct StageMapping {
    double meters_per_second_of_delay = speed_of_light;  // stage travel per second of delay
    double origin = 0.0;                                 // stage position of zero delay (m)

    void validate() const {
        if (!(meters_per_second_of_delay > 0.0))
            throw std::invalid_argument("mapping.meters_per_second_of_delay must be > 0");
        if (!std::isfinite(origin)) throw std::invalid_argument("mapping.origin must be finite");
    }
};

// Rotation-induced transit-time difference between counter-propagating paths
// enclosing area `area`, for platform angular velocity `omega`.
inline double sagnac_delay(double area, double omega) {
    return 4.0 * area * omega / (speed_of_light * speed_of_light);
}

// Transit times for both circulation directions of one arm. The fibre wound
// at radius r encloses area L_f * r / 2, so the rotational term is
// L_f * r * Omega / c^2 per direction with opposite signs.
inline ArmDelays propagation_times(const SagnacArm& arm, const RotationState& rot) {
    const double rotational =
        arm.fiber_length * arm.loop_radius * rot.omega / (speed_of_light * speed_of_light);
    return ArmDelays{
        arm.birefringent_length * arm.n_cw / speed_of_light + rotational,
        arm.birefringent_length * arm.n_ac / speed_of_light - rotational,
    };
}

// Rotation-frequency change (Hz) that advances the loop phase mu * delta_t by
// pi, i.e. turns an oscillating interference dip into a peak.
inline double flip_half_period(const SagnacArm& arm, const OpticalConfig& optics) {
    return speed_of_light * optics.lambda_p /
           (4.0 * std::numbers::pi * arm.fiber_length * arm.loop_radius);
}

inline double stage_to_delay(double position, const StageMapping& map) {
    return (position - map.origin) / map.meters_per_second_of_delay;
}

inline double delay_to_stage(double delay, const StageMapping& map) {
    return map.origin + delay * map.meters_per_second_of_delay;
}

// Loop-phase targets used to pin the oscillating features to an exact dip,
// peak, or the quarter point between them.
enum class PhaseTarget { peak, dip, quarter };

// Returns a copy of `arm` with n_cw nudged by the smallest amount that makes
// cos(mu * delta_t) at zero rotation hit the requested target exactly
// (+1 for peak, -1 for dip, 0 for quarter).
inline SagnacArm snap_birefringent_phase(const SagnacArm& arm, const OpticalConfig& optics,
                                         PhaseTarget target) {
    if (arm.birefringent_length <= 0.0)
        throw std::invalid_argument("snap_birefringent_phase needs birefringent_length > 0");
    const double mu = optics.mu();
    const double phase = mu * arm.birefringent_length * arm.delta_n() / speed_of_light;
    const double pi = std::numbers::pi;
    double snapped = 0.0;
    switch (target) {
        case PhaseTarget::peak: snapped = two_pi * std::round(phase / two_pi); break;
        case PhaseTarget::dip: snapped = two_pi * std::round((phase - pi) / two_pi) + pi; break;
        case PhaseTarget::quarter:
            snapped = pi * std::round((phase - 0.5 * pi) / pi) + 0.5 * pi;
            break;
    }
    SagnacArm out = arm;
    out.n_cw += (snapped - phase) * speed_of_light / (mu * arm.birefringent_length);
    return out;
}

}  // namespace rotohom
