#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rotohom/models.hpp"
#include "rotohom/physics.hpp"
#include "rotohom/rng.hpp"

namespace rotohom {

// Safe envelope of the turntable motor.
inline constexpr double max_set_frequency_hz = 0.735;

// Friction correction between the motor setting and the achieved rotation:
// actual = coefficient * set^exponent.
struct MotorCalibration {
    double coefficient = 1.0;
    double exponent = 1.0;

    void validate() const {
        if (!(coefficient > 0.0)) throw std::invalid_argument("calibration.coefficient must be > 0");
        if (!(exponent > 0.0)) throw std::invalid_argument("calibration.exponent must be > 0");
    }
};

inline double apply_motor_calibration(double set_hz, const MotorCalibration& cal) {
    if (set_hz < 0.0) throw std::invalid_argument("set frequency must be >= 0");
    if (set_hz == 0.0) return 0.0;
    return cal.coefficient * std::pow(set_hz, cal.exponent);
}

// Counting-noise and disturbance parameters of a synthetic run.
struct NoiseModel {
    double rate_scale = 1e15;        // counts/s per unit of closed-form model output
    double accidental_rate = 100.0;  // window accidentals (counts/s)
    double acquisition_time = 1.5;   // per-point integration (s)
    double drift_sigma = 1e-18;      // thermal random-walk step of the loop imbalance (s/point)
    std::uint64_t rng_seed = 12345;
    double singles_rate = 20000.0;   // per-detector singles level (counts/s), metadata only
    // Loop-imbalance bias proportional to |rotation| regardless of sense
    // (s of delay per Hz); adds to the rotation phase in one direction and
    // subtracts in the other. Zero disables it.
    double direction_bias_delay_per_hz = 0.0;

    void validate() const {
        if (!(rate_scale >= 0.0)) throw std::invalid_argument("noise.rate_scale must be >= 0");
        if (!(accidental_rate >= 0.0))
            throw std::invalid_argument("noise.accidental_rate must be >= 0");
        if (!(acquisition_time > 0.0))
            throw std::invalid_argument("noise.acquisition_time must be > 0");
        if (!(drift_sigma >= 0.0)) throw std::invalid_argument("noise.drift_sigma must be >= 0");
        if (!(singles_rate >= 0.0)) throw std::invalid_argument("noise.singles_rate must be >= 0");
        if (!std::isfinite(direction_bias_delay_per_hz))
            throw std::invalid_argument("noise.direction_bias_delay_per_hz must be finite");
    }
};

// Stage positions visited by one delay scan.
struct ScanSpec {
    std::vector<double> stage_positions;  // metres, strictly increasing
    StageMapping mapping;

    void validate() const {
        mapping.validate();
        if (stage_positions.empty()) throw std::invalid_argument("scan has no stage positions");
        for (std::size_t i = 1; i < stage_positions.size(); ++i)
            if (!(stage_positions[i] > stage_positions[i - 1]))
                throw std::invalid_argument("scan stage positions must be strictly increasing");
    }
};

// Scan window over one oscillating feature (the second feature from the
// left, centred at delay -delta_t/2 at zero rotation) plus background
// shoulders on both sides.
inline ScanSpec make_feature_scan(const OpticalConfig& optics, const SagnacArm& arm,
                                  const StageMapping& mapping, double step_m = 10e-6,
                                  double half_width_scale = 8.0) {
    const double dt0 = propagation_times(arm, RotationState{}).delta_t();
    const double center_delay = -0.5 * dt0;
    const double half_width_delay = half_width_scale / optics.delta_omega;
    const double center = delay_to_stage(center_delay, mapping);
    const double half_width = half_width_delay * mapping.meters_per_second_of_delay;
    const auto half_steps = static_cast<int>(std::floor(half_width / step_m));
    ScanSpec spec;
    spec.mapping = mapping;
    spec.stage_positions.reserve(2 * half_steps + 1);
    for (int k = -half_steps; k <= half_steps; ++k)
        spec.stage_positions.push_back(center + k * step_m);
    return spec;
}

// One up or down ramp of set rotation frequencies, all in one sense.
struct SequenceSpec {
    std::vector<double> rotation_steps;  // motor settings (Hz)
    Direction direction = Direction::cw;
    MotorCalibration calibration;

    void validate() const {
        calibration.validate();
        if (rotation_steps.empty()) throw std::invalid_argument("sequence has no rotation steps");
        for (double s : rotation_steps)
            if (!(s >= 0.0) || s > max_set_frequency_hz)
                throw std::invalid_argument("sequence steps must lie in [0, 0.735] Hz");
    }
};

struct TracePoint {
    double stage_position = 0.0;  // m
    double delay = 0.0;           // s
    std::int64_t coincidences = 0;
    std::int64_t singles_a = 0;
    std::int64_t singles_b = 0;
};

// One recorded delay scan at a fixed rotation speed.
struct CoincidenceTrace {
    std::vector<TracePoint> points;
    double rotation_hz = 0.0;       // calibrated rotation, signed (+ = clockwise)
    double set_frequency_hz = 0.0;  // motor setting (unsigned)
    Direction direction = Direction::cw;
    std::uint64_t seed = 0;
    int sequence_id = 0;
    int step_index = 0;
    double acquisition_time = 1.5;  // s
};

namespace detail {

inline CoincidenceTrace simulate_scan_step(const OpticalConfig& optics, const SagnacArm& arm,
                                           const RotationState& rot, Direction direction,
                                           const ScanSpec& scan, const NoiseModel& noise,
                                           int sequence_id, int step_index,
                                           double& drift_state) {
    scan.validate();
    noise.validate();
    arm.validate();

    const ArmDelays base = propagation_times(arm, rot);
    const double bias =
        noise.direction_bias_delay_per_hz * std::abs(rot.omega) / two_pi;

    CoincidenceTrace trace;
    trace.rotation_hz = rot.hz();
    trace.set_frequency_hz = rot.set_frequency.value_or(std::abs(rot.hz()));
    trace.direction = direction;
    trace.seed = noise.rng_seed;
    trace.sequence_id = sequence_id;
    trace.step_index = step_index;
    trace.acquisition_time = noise.acquisition_time;
    trace.points.reserve(scan.stage_positions.size());

    for (std::size_t i = 0; i < scan.stage_positions.size(); ++i) {
        Rng rng(mix_seed(noise.rng_seed,
                         {static_cast<std::uint64_t>(sequence_id),
                          static_cast<std::uint64_t>(step_index), static_cast<std::uint64_t>(i)}));
        if (noise.drift_sigma > 0.0) drift_state += noise.drift_sigma * rng.normal();

        TracePoint pt;
        pt.stage_position = scan.stage_positions[i];
        pt.delay = stage_to_delay(pt.stage_position, scan.mapping);

        const ArmDelays effective{base.t_cw + drift_state + bias, base.t_ac};
        const double model = nc_symmetric({pt.delay, effective, optics}).n_c;
        const double mean_rate = noise.rate_scale * model + noise.accidental_rate;
        pt.coincidences = rng.poisson(mean_rate * noise.acquisition_time);
        pt.singles_a = rng.poisson(noise.singles_rate * noise.acquisition_time);
        pt.singles_b = rng.poisson(noise.singles_rate * noise.acquisition_time);
        trace.points.push_back(pt);
    }
    return trace;
}

}  // namespace detail

// Synthesizes one delay scan: Poisson counting noise on the closed-form
// coincidence level plus a constant accidental floor, with the loop
// imbalance following a thermal random walk across scan points.
inline CoincidenceTrace simulate_scan(const OpticalConfig& optics, const SagnacArm& arm,
                                      const RotationState& rot, const ScanSpec& scan,
                                      const NoiseModel& noise) {
    double drift_state = 0.0;
    return detail::simulate_scan_step(optics, arm, rot, rot.direction(), scan, noise, 0, 0,
                                      drift_state);
}

// Synthesizes a stepped-rotation sequence, one trace per step. The thermal
// drift state carries across steps; rotation sign follows the sequence
// direction.
inline std::vector<CoincidenceTrace> simulate_sequence(const OpticalConfig& optics,
                                                       const SagnacArm& arm,
                                                       const SequenceSpec& seq,
                                                       const ScanSpec& scan,
                                                       const NoiseModel& noise,
                                                       int sequence_id = 0) {
    seq.validate();
    const double sign = seq.direction == Direction::cw ? 1.0 : -1.0;
    std::vector<CoincidenceTrace> traces;
    traces.reserve(seq.rotation_steps.size());
    double drift_state = 0.0;
    for (std::size_t k = 0; k < seq.rotation_steps.size(); ++k) {
        const double set_hz = seq.rotation_steps[k];
        const double actual_hz = apply_motor_calibration(set_hz, seq.calibration);
        RotationState rot = RotationState::from_hz(sign * actual_hz);
        rot.set_frequency = set_hz;
        traces.push_back(detail::simulate_scan_step(optics, arm, rot, seq.direction, scan, noise,
                                                    sequence_id, static_cast<int>(k),
                                                    drift_state));
    }
    return traces;
}

}  // namespace rotohom
