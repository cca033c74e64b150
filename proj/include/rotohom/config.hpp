#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rotohom/physics.hpp"
#include "rotohom/simulate.hpp"

namespace rotohom {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scan-window settings; explicit positions override the generated window.
struct ScanConfig {
    std::optional<std::vector<double>> positions_m;
    double step_m = 10e-6;
    double half_width_scale = 8.0;  // window half width in units of 1/delta_omega
    std::optional<double> center_delay_s;  // default: the second feature from the left
};

struct SequenceConfig {
    std::vector<double> steps_hz;  // default built in RunConfig
    Direction direction = Direction::cw;
    MotorCalibration calibration;
};

// Full run description: SI units, angular frequencies in rad/s internally,
// rotations in Hz at this boundary.
struct RunConfig {
    OpticalConfig optics;
    SagnacArm arm;
    StageMapping mapping{speed_of_light, 0.001};
    NoiseModel noise;
    ScanConfig scan;
    SequenceConfig sequence;

    ScanSpec make_scan() const {
        ScanSpec spec;
        spec.mapping = mapping;
        if (scan.positions_m) {
            spec.stage_positions = *scan.positions_m;
        } else if (scan.center_delay_s) {
            const double center = delay_to_stage(*scan.center_delay_s, mapping);
            const double half_width =
                scan.half_width_scale / optics.delta_omega * mapping.meters_per_second_of_delay;
            const auto half_steps = static_cast<int>(std::floor(half_width / scan.step_m));
            for (int k = -half_steps; k <= half_steps; ++k)
                spec.stage_positions.push_back(center + k * scan.step_m);
        } else {
            spec = make_feature_scan(optics, arm, mapping, scan.step_m, scan.half_width_scale);
        }
        spec.validate();
        return spec;
    }

    SequenceSpec make_sequence() const {
        SequenceSpec spec;
        spec.direction = sequence.direction;
        spec.calibration = sequence.calibration;
        spec.rotation_steps = sequence.steps_hz;
        if (spec.rotation_steps.empty()) {
            constexpr int n_steps = 9;
            for (int k = 0; k < n_steps; ++k)
                spec.rotation_steps.push_back(max_set_frequency_hz * k / (n_steps - 1.0));
        }
        spec.validate();
        return spec;
    }

    void validate() const {
        optics.validate();
        arm.validate();
        mapping.validate();
        noise.validate();
        sequence.calibration.validate();
        if (!(scan.step_m > 0.0)) throw ConfigError("scan.step_m must be > 0");
        if (!(scan.half_width_scale > 0.0)) throw ConfigError("scan.half_width_scale must be > 0");
        for (double s : sequence.steps_hz)
            if (!(s >= 0.0) || s > max_set_frequency_hz)
                throw ConfigError("sequence.steps_hz entries must lie in [0, 0.735]");
        if (scan.positions_m) {
            const auto& p = *scan.positions_m;
            if (p.empty()) throw ConfigError("scan.positions_m must not be empty");
            for (std::size_t i = 1; i < p.size(); ++i)
                if (!(p[i] > p[i - 1]))
                    throw ConfigError("scan.positions_m must be strictly increasing");
        }
    }
};

namespace config_detail {

using nlohmann::json;

inline void expect_keys(const json& obj, const std::string& path,
                        std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("unknown key '" + path + "." + key + "'");
    }
}

inline double get_number(const json& obj, const std::string& path, const char* key,
                         double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError("'" + path + "." + key + "' must be a number");
    return v.get<double>();
}

inline std::uint64_t get_u64(const json& obj, const std::string& path, const char* key,
                             std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError("'" + path + "." + key + "' must be an integer");
    return v.get<std::uint64_t>();
}

inline std::vector<double> get_number_array(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError("'" + path + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("'" + path + "' must contain only numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

}  // namespace config_detail

inline RunConfig parse_run_config(const nlohmann::json& root) {
    using config_detail::expect_keys;
    using config_detail::get_number;
    using config_detail::get_number_array;
    using config_detail::get_u64;

    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    expect_keys(root, "config", {"optics", "arm", "mapping", "noise", "scan", "sequence"});

    RunConfig cfg;
    if (root.contains("optics")) {
        const auto& o = root.at("optics");
        expect_keys(o, "optics", {"lambda_p", "delta_omega", "sigma_p"});
        cfg.optics.lambda_p = get_number(o, "optics", "lambda_p", cfg.optics.lambda_p);
        cfg.optics.delta_omega = get_number(o, "optics", "delta_omega", cfg.optics.delta_omega);
        cfg.optics.sigma_p = get_number(o, "optics", "sigma_p", cfg.optics.sigma_p);
    }
    if (root.contains("arm")) {
        const auto& a = root.at("arm");
        expect_keys(a, "arm",
                    {"fiber_length", "loop_radius", "birefringent_length", "n_cw", "n_ac"});
        cfg.arm.fiber_length = get_number(a, "arm", "fiber_length", cfg.arm.fiber_length);
        cfg.arm.loop_radius = get_number(a, "arm", "loop_radius", cfg.arm.loop_radius);
        cfg.arm.birefringent_length =
            get_number(a, "arm", "birefringent_length", cfg.arm.birefringent_length);
        cfg.arm.n_cw = get_number(a, "arm", "n_cw", cfg.arm.n_cw);
        cfg.arm.n_ac = get_number(a, "arm", "n_ac", cfg.arm.n_ac);
    }
    if (root.contains("mapping")) {
        const auto& m = root.at("mapping");
        expect_keys(m, "mapping", {"meters_per_second_of_delay", "origin"});
        cfg.mapping.meters_per_second_of_delay = get_number(
            m, "mapping", "meters_per_second_of_delay", cfg.mapping.meters_per_second_of_delay);
        cfg.mapping.origin = get_number(m, "mapping", "origin", cfg.mapping.origin);
    }
    if (root.contains("noise")) {
        const auto& n = root.at("noise");
        expect_keys(n, "noise",
                    {"rate_scale", "accidental_rate", "acquisition_time", "drift_sigma",
                     "rng_seed", "singles_rate", "direction_bias_delay_per_hz"});
        cfg.noise.rate_scale = get_number(n, "noise", "rate_scale", cfg.noise.rate_scale);
        cfg.noise.accidental_rate =
            get_number(n, "noise", "accidental_rate", cfg.noise.accidental_rate);
        cfg.noise.acquisition_time =
            get_number(n, "noise", "acquisition_time", cfg.noise.acquisition_time);
        cfg.noise.drift_sigma = get_number(n, "noise", "drift_sigma", cfg.noise.drift_sigma);
        cfg.noise.rng_seed = get_u64(n, "noise", "rng_seed", cfg.noise.rng_seed);
        cfg.noise.singles_rate = get_number(n, "noise", "singles_rate", cfg.noise.singles_rate);
        cfg.noise.direction_bias_delay_per_hz = get_number(
            n, "noise", "direction_bias_delay_per_hz", cfg.noise.direction_bias_delay_per_hz);
    }
    if (root.contains("scan")) {
        const auto& s = root.at("scan");
        expect_keys(s, "scan", {"positions_m", "step_m", "half_width_scale", "center_delay_s"});
        if (s.contains("positions_m"))
            cfg.scan.positions_m = get_number_array(s.at("positions_m"), "scan.positions_m");
        cfg.scan.step_m = get_number(s, "scan", "step_m", cfg.scan.step_m);
        cfg.scan.half_width_scale =
            get_number(s, "scan", "half_width_scale", cfg.scan.half_width_scale);
        if (s.contains("center_delay_s"))
            cfg.scan.center_delay_s = get_number(s, "scan", "center_delay_s", 0.0);
    }
    if (root.contains("sequence")) {
        const auto& q = root.at("sequence");
        expect_keys(q, "sequence", {"steps_hz", "direction", "calibration"});
        if (q.contains("steps_hz"))
            cfg.sequence.steps_hz = get_number_array(q.at("steps_hz"), "sequence.steps_hz");
        if (q.contains("direction")) {
            if (!q.at("direction").is_string())
                throw ConfigError("'sequence.direction' must be a string");
            try {
                cfg.sequence.direction = direction_from_string(q.at("direction").get<std::string>());
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("'sequence.direction': ") + e.what());
            }
        }
        if (q.contains("calibration")) {
            const auto& c = q.at("calibration");
            expect_keys(c, "sequence.calibration", {"coefficient", "exponent"});
            cfg.sequence.calibration.coefficient = get_number(
                c, "sequence.calibration", "coefficient", cfg.sequence.calibration.coefficient);
            cfg.sequence.calibration.exponent = get_number(c, "sequence.calibration", "exponent",
                                                           cfg.sequence.calibration.exponent);
        }
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json root;
    try {
        in >> root;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_run_config(root);
}

}  // namespace rotohom
