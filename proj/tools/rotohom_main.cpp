// Command-line front end: landscape/scan/sequence simulation, trace
// analysis, motor calibration and the oracle validation suite.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rotohom/rotohom.hpp"

namespace fs = std::filesystem;
using namespace rotohom;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_validation_failure = 1;
constexpr int exit_config_error = 2;
constexpr int exit_io_error = 3;
constexpr int exit_no_input = 4;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::string format = "both";
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_seed = true) {
    cmd->add_option("--config", opts.config_path, "JSON run configuration");
    cmd->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", opts.format, "csv|svg|both")
        ->check(CLI::IsMember({"csv", "svg", "both"}))
        ->capture_default_str();
    if (with_seed) cmd->add_option("--seed", opts.seed, "override noise.rng_seed");
}

RunConfig load_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = load_run_config(opts.config_path);
    if (opts.seed) cfg.noise.rng_seed = *opts.seed;
    cfg.validate();
    return cfg;
}

bool want_csv(const CommonOpts& o) { return o.format != "svg"; }
bool want_svg(const CommonOpts& o) { return o.format != "csv"; }

void ensure_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%FT%TZ", &tm);
    return buf;
}

int run_landscape(const CommonOpts& opts, double omega_min, double omega_max, int omega_count,
                  double delay_span, int delay_count) {
    const RunConfig cfg = load_config(opts);
    ensure_out_dir(opts.out_dir);
    if (omega_count < 2 || delay_count < 2) throw ConfigError("grid needs at least 2x2 points");

    const double dt0 = propagation_times(cfg.arm, RotationState{}).delta_t();
    std::vector<double> omegas(omega_count), delays(delay_count);
    for (int i = 0; i < omega_count; ++i)
        omegas[i] = omega_min + (omega_max - omega_min) * i / (omega_count - 1.0);
    for (int j = 0; j < delay_count; ++j)
        delays[j] = (-delay_span + 2.0 * delay_span * j / (delay_count - 1.0)) * std::abs(dt0);

    std::vector<std::vector<double>> nc(delay_count, std::vector<double>(omega_count));
    std::vector<std::vector<double>> bg(delay_count, std::vector<double>(omega_count));
    parallel_for(static_cast<std::size_t>(omega_count), [&](std::size_t i) {
        const ArmDelays d = propagation_times(cfg.arm, RotationState::from_hz(omegas[i]));
        for (int j = 0; j < delay_count; ++j) {
            const ModelOutput m = nc_symmetric({delays[j], d, cfg.optics});
            nc[j][i] = m.n_c;
            bg[j][i] = m.background;
        }
    });

    if (want_csv(opts)) {
        std::string csv = "rotation_hz,delay_s,nc,background\n";
        for (int i = 0; i < omega_count; ++i)
            for (int j = 0; j < delay_count; ++j)
                csv += io_detail::fmt(omegas[i]) + "," + io_detail::fmt(delays[j]) + "," +
                       io_detail::fmt(nc[j][i]) + "," + io_detail::fmt(bg[j][i]) + "\n";
        atomic_write(fs::path(opts.out_dir) / "landscape.csv", csv);
    }
    if (want_svg(opts)) {
        std::vector<double> delay_ps(delays.size());
        for (std::size_t j = 0; j < delays.size(); ++j) delay_ps[j] = delays[j] * 1e12;
        atomic_write(fs::path(opts.out_dir) / "landscape.svg",
                     svg::heatmap(nc, omegas, delay_ps, "Coincidence landscape",
                                  "rotation (Hz)", "HOM delay (ps)"));
    }
    std::printf("landscape: %d x %d grid written to %s\n", omega_count, delay_count,
                opts.out_dir.c_str());
    return exit_ok;
}

void write_trace_outputs(const CommonOpts& opts, const CoincidenceTrace& trace,
                         const std::string& stem) {
    if (want_csv(opts)) atomic_write(fs::path(opts.out_dir) / (stem + ".csv"), trace_to_csv(trace));
    if (want_svg(opts)) {
        svg::Series s;
        for (const auto& p : trace.points) {
            s.x.push_back(p.stage_position * 1e3);
            s.y.push_back(static_cast<double>(p.coincidences));
        }
        s.label = "coincidences";
        atomic_write(fs::path(opts.out_dir) / (stem + ".svg"),
                     svg::line_plot({s}, "Delay scan at " + std::to_string(trace.rotation_hz) +
                                             " Hz", "stage position (mm)", "counts"));
    }
}

int run_scan(const CommonOpts& opts, double set_hz, const std::string& direction) {
    const RunConfig cfg = load_config(opts);
    ensure_out_dir(opts.out_dir);
    const double actual = apply_motor_calibration(set_hz, cfg.sequence.calibration);
    const double sign = direction_from_string(direction) == Direction::cw ? 1.0 : -1.0;
    RotationState rot = RotationState::from_hz(sign * actual);
    rot.set_frequency = set_hz;
    const CoincidenceTrace trace =
        simulate_scan(cfg.optics, cfg.arm, rot, cfg.make_scan(), cfg.noise);
    write_trace_outputs(opts, trace, "scan");
    std::printf("scan: %zu points at %.4f Hz (%s) written to %s\n", trace.points.size(), actual,
                direction.c_str(), opts.out_dir.c_str());
    return exit_ok;
}

int run_sequence(const CommonOpts& opts, int repeat, bool alternate) {
    const RunConfig cfg = load_config(opts);
    ensure_out_dir(opts.out_dir);
    const ScanSpec scan = cfg.make_scan();

    nlohmann::json manifest;
    manifest["command"] = "sequence";
    manifest["seed"] = cfg.noise.rng_seed;
    manifest["generated_at"] = timestamp_utc();
    manifest["sequences"] = nlohmann::json::array();

    for (int s = 0; s < repeat; ++s) {
        SequenceSpec seq = cfg.make_sequence();
        if (alternate && s % 2 == 1)
            seq.direction = seq.direction == Direction::cw ? Direction::acw : Direction::cw;
        const auto traces = simulate_sequence(cfg.optics, cfg.arm, seq, scan, cfg.noise, s);
        nlohmann::json entry;
        entry["sequence"] = s;
        entry["direction"] = to_string(seq.direction);
        entry["steps"] = nlohmann::json::array();
        for (const auto& trace : traces) {
            char stem[64];
            std::snprintf(stem, sizeof stem, "seq%03d_step%02d", s, trace.step_index);
            write_trace_outputs(opts, trace, stem);
            nlohmann::json step;
            step["file"] = std::string(stem) + ".csv";
            step["set_hz"] = trace.set_frequency_hz;
            step["rotation_hz"] = trace.rotation_hz;
            entry["steps"].push_back(step);
        }
        manifest["sequences"].push_back(entry);
    }
    atomic_write(fs::path(opts.out_dir) / "manifest.json", manifest.dump(2) + "\n");
    std::printf("sequence: %d sequence(s) written to %s\n", repeat, opts.out_dir.c_str());
    return exit_ok;
}

int run_analyze(const CommonOpts& opts, const std::vector<std::string>& inputs,
                double bin_width) {
    ensure_out_dir(opts.out_dir);

    std::vector<fs::path> files;
    for (const auto& input : inputs) {
        const fs::path p(input);
        if (fs::is_directory(p)) {
            for (const auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".csv")
                    files.push_back(e.path());
        } else if (fs::exists(p)) {
            files.push_back(p);
        } else {
            std::fprintf(stderr, "warning: no such input: %s\n", input.c_str());
        }
    }
    std::sort(files.begin(), files.end());

    std::map<int, std::vector<CoincidenceTrace>> sequences;
    int warnings = 0;
    for (const auto& f : files) {
        try {
            CoincidenceTrace t = read_trace(f);
            sequences[t.sequence_id].push_back(std::move(t));
        } catch (const CsvError& e) {
            std::fprintf(stderr, "warning: skipping %s: %s\n", f.string().c_str(), e.what());
            ++warnings;
        }
    }
    if (sequences.empty()) {
        std::fprintf(stderr, "error: no usable trace files\n");
        return exit_no_input;
    }

    std::vector<SequenceRecord> records;
    std::vector<std::pair<Direction, double>> half_periods;
    int rejected = 0;
    for (auto& [id, traces] : sequences) {
        std::sort(traces.begin(), traces.end(), [](const auto& a, const auto& b) {
            return a.step_index < b.step_index;
        });
        SequenceRecord rec;
        rec.sequence_id = id;
        rec.direction = traces.front().direction;
        std::vector<FeatureAmplitude> pts;
        for (const auto& t : traces) {
            try {
                pts.push_back(extract_feature_amplitude(t));
            } catch (const std::invalid_argument& e) {
                std::fprintf(stderr, "warning: sequence %d step %d: %s\n", id, t.step_index,
                             e.what());
                ++warnings;
            }
        }
        rec.n_points = pts.size();
        try {
            rec.fit = fit_sinusoid(pts);
        } catch (const std::invalid_argument& e) {
            std::fprintf(stderr, "warning: sequence %d not fittable: %s\n", id, e.what());
            rec.fit.converged = false;
        }
        if (rec.fit.converged)
            half_periods.emplace_back(rec.direction, rec.fit.half_period());
        else
            ++rejected;
        records.push_back(std::move(rec));
    }

    if (want_csv(opts)) atomic_write(fs::path(opts.out_dir) / "fits.csv", fits_to_csv(records));
    if (!half_periods.empty()) {
        const HistogramStats stats = aggregate_histogram(half_periods);
        const HistogramBins bins = bin_half_periods(half_periods, bin_width);
        if (want_csv(opts))
            atomic_write(fs::path(opts.out_dir) / "histogram.csv",
                         histogram_to_csv(stats, bins));
        if (want_svg(opts))
            atomic_write(fs::path(opts.out_dir) / "histogram.svg",
                         svg::histogram(bins, stats, "Dip-to-peak half periods"));
        std::printf("analyze: %zu sequences (%d rejected), total mean %.4f Hz, median %.4f Hz\n",
                    records.size(), rejected, stats.total.mean_hz, stats.total.median_hz);
        if (!stats.cw) std::fprintf(stderr, "warning: no converged clockwise sequences\n");
        if (!stats.acw) std::fprintf(stderr, "warning: no converged anticlockwise sequences\n");
    } else {
        std::fprintf(stderr, "warning: no converged fits; histogram not written\n");
        ++warnings;
    }
    std::printf("analyze: %d warning(s)\n", warnings);
    return exit_ok;
}

int run_calibrate(const CommonOpts& opts, const std::string& data_path) {
    ensure_out_dir(opts.out_dir);
    std::vector<double> set_hz, actual_hz;
    read_calibration_csv(data_path, set_hz, actual_hz);
    const MotorCalibration cal = fit_power_law(set_hz, actual_hz);
    nlohmann::json out;
    out["coefficient"] = cal.coefficient;
    out["exponent"] = cal.exponent;
    atomic_write(fs::path(opts.out_dir) / "calibration.json", out.dump(2) + "\n");
    std::printf("calibrate: actual = %.6g * set^%.6g (n=%zu)\n", cal.coefficient, cal.exponent,
                set_hz.size());
    return exit_ok;
}

int run_validate(const CommonOpts& opts) {
    const RunConfig cfg = load_config(opts);
    const ValidationReport report = run_validation(cfg);
    for (const auto& c : report.checks)
        std::printf("%s  %-58s max err %.3e (tol %.0e)\n", c.passed ? "PASS" : "FAIL",
                    c.name.c_str(), c.max_error, c.tolerance);
    for (const auto& n : report.notes) std::printf("%s\n", n.c_str());
    if (!report.all_passed()) {
        std::printf("validation FAILED\n");
        return exit_validation_failure;
    }
    std::printf("validation passed (%zu checks)\n", report.checks.size());
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rotating Hong-Ou-Mandel interferometer simulator and analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts landscape_opts, scan_opts, seq_opts, analyze_opts, cal_opts, val_opts;

    auto* landscape = app.add_subcommand("landscape", "coincidence level over rotation x delay");
    add_common(landscape, landscape_opts, false);
    double omega_min = 0.0, omega_max = 1.0, delay_span = 1.3;
    int omega_count = 41, delay_count = 201;
    landscape->add_option("--omega-min", omega_min, "lowest rotation (Hz)")->capture_default_str();
    landscape->add_option("--omega-max", omega_max, "highest rotation (Hz)")->capture_default_str();
    landscape->add_option("--omega-count", omega_count, "rotation grid points")
        ->capture_default_str();
    landscape->add_option("--delay-span", delay_span, "delay half span in units of delta_t")
        ->capture_default_str();
    landscape->add_option("--delay-count", delay_count, "delay grid points")->capture_default_str();

    auto* scan = app.add_subcommand("scan", "simulate one delay scan");
    add_common(scan, scan_opts);
    double set_hz = 0.0;
    std::string scan_direction = "cw";
    scan->add_option("--set-hz", set_hz, "motor set frequency (Hz)")->capture_default_str();
    scan->add_option("--direction", scan_direction, "cw|acw")
        ->check(CLI::IsMember({"cw", "acw"}))
        ->capture_default_str();

    auto* sequence = app.add_subcommand("sequence", "simulate stepped-rotation sequences");
    add_common(sequence, seq_opts);
    int repeat = 1;
    bool alternate = false;
    sequence->add_option("--repeat", repeat, "number of sequences")->capture_default_str();
    sequence->add_flag("--alternate", alternate, "alternate rotation sense between sequences");

    auto* analyze = app.add_subcommand("analyze", "fit traces and histogram half-periods");
    add_common(analyze, analyze_opts, false);
    std::vector<std::string> inputs;
    double bin_width = 0.05;
    analyze->add_option("inputs", inputs, "trace CSV files or directories")->required();
    analyze->add_option("--bin-width", bin_width, "histogram bin width (Hz)")
        ->capture_default_str();

    auto* calibrate = app.add_subcommand("calibrate", "fit the motor power-law calibration");
    add_common(calibrate, cal_opts, false);
    std::string cal_data;
    calibrate->add_option("--data", cal_data, "CSV with set_hz,actual_hz")->required();

    auto* validate = app.add_subcommand("validate", "run the oracle validation suite");
    add_common(validate, val_opts, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (landscape->parsed())
            return run_landscape(landscape_opts, omega_min, omega_max, omega_count, delay_span,
                                 delay_count);
        if (scan->parsed()) return run_scan(scan_opts, set_hz, scan_direction);
        if (sequence->parsed()) return run_sequence(seq_opts, repeat, alternate);
        if (analyze->parsed()) return run_analyze(analyze_opts, inputs, bin_width);
        if (calibrate->parsed()) return run_calibrate(cal_opts, cal_data);
        if (validate->parsed()) return run_validate(val_opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config_error;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config_error;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return exit_io_error;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_io_error;
    }
    return exit_ok;
}
