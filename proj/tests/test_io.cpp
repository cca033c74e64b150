#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rotohom/config.hpp"
#include "rotohom/csv.hpp"
#include "rotohom/simulate.hpp"
#include "rotohom/svg.hpp"

using namespace rotohom;
namespace fs = std::filesystem;

namespace {

CoincidenceTrace sample_trace() {
    const OpticalConfig optics;
    const SagnacArm arm;
    const StageMapping map{speed_of_light, 0.001};
    NoiseModel noise;
    RotationState rot = RotationState::from_hz(-0.37);
    rot.set_frequency = 0.4;
    CoincidenceTrace t =
        simulate_scan(optics, arm, rot, make_feature_scan(optics, arm, map), noise);
    t.sequence_id = 7;
    t.step_index = 3;
    return t;
}

}  // namespace

TEST_CASE("trace csv round-trip") {
    const CoincidenceTrace t = sample_trace();
    const std::string csv = trace_to_csv(t);

    std::istringstream in(csv);
    const CoincidenceTrace back = trace_from_csv(in, "mem");
    CHECK(back.sequence_id == t.sequence_id);
    CHECK(back.step_index == t.step_index);
    CHECK(back.direction == t.direction);
    CHECK(back.rotation_hz == t.rotation_hz);
    CHECK(back.set_frequency_hz == t.set_frequency_hz);
    CHECK(back.seed == t.seed);
    CHECK(back.acquisition_time == t.acquisition_time);
    REQUIRE(back.points.size() == t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i) {
        CHECK(back.points[i].stage_position == t.points[i].stage_position);
        CHECK(back.points[i].delay == t.points[i].delay);
        CHECK(back.points[i].coincidences == t.points[i].coincidences);
    }
    // write -> read -> write is byte-identical
    CHECK(trace_to_csv(back) == csv);
}

TEST_CASE("trace csv rejects malformed input") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return trace_from_csv(in, "mem");
    };
    CHECK_THROWS_AS(parse("not a trace\n"), CsvError);
    CHECK_THROWS_AS(parse("# rotohom-trace,1\n# bogus_key,1\n"), CsvError);
    CHECK_THROWS_AS(parse("# rotohom-trace,1\nwrong,header\n1,2,3,4,5\n"), CsvError);
    const std::string good_header =
        std::string("# rotohom-trace,1\n") + trace_csv_header + "\n";
    CHECK_THROWS_AS(parse(good_header + "1,2,3\n"), CsvError);
    CHECK_THROWS_AS(parse(good_header + "1,2,x,4,5\n"), CsvError);
    CHECK_THROWS_AS(parse(good_header), CsvError);  // no rows
}

TEST_CASE("atomic write") {
    const fs::path dir = fs::temp_directory_path() / "rotohom_test_io";
    fs::create_directories(dir);
    const fs::path target = dir / "out.txt";
    atomic_write(target, "payload\n");
    std::ifstream in(target);
    std::string line;
    std::getline(in, line);
    CHECK(line == "payload");
    CHECK_FALSE(fs::exists(target.string() + ".tmp"));
    fs::remove_all(dir);
}

TEST_CASE("config parsing") {
    SECTION("defaults for an empty document") {
        const RunConfig cfg = parse_run_config(nlohmann::json::object());
        CHECK(cfg.optics.lambda_p == 355e-9);
        CHECK(cfg.arm.fiber_length == 41.0);
        CHECK(cfg.noise.accidental_rate == 100.0);
        CHECK(cfg.noise.acquisition_time == 1.5);
    }
    SECTION("nested values applied") {
        const auto cfg = parse_run_config(nlohmann::json::parse(R"({
            "optics": {"lambda_p": 710e-9, "sigma_p": 1e11},
            "arm": {"fiber_length": 82.0},
            "noise": {"rng_seed": 99, "rate_scale": 2e15},
            "sequence": {"direction": "acw", "steps_hz": [0.0, 0.3, 0.6],
                          "calibration": {"coefficient": 0.95, "exponent": 1.05}}
        })"));
        CHECK(cfg.optics.lambda_p == 710e-9);
        CHECK(cfg.arm.fiber_length == 82.0);
        CHECK(cfg.noise.rng_seed == 99);
        CHECK(cfg.sequence.direction == Direction::acw);
        CHECK(cfg.sequence.steps_hz.size() == 3);
        CHECK(cfg.sequence.calibration.coefficient == 0.95);
    }
    SECTION("unknown keys rejected with a field path") {
        try {
            parse_run_config(nlohmann::json::parse(R"({"optics": {"lambda": 1e-6}})"));
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("optics.lambda") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_run_config(nlohmann::json::parse(R"({"bogus": {}})")), ConfigError);
    }
    SECTION("invariant violations rejected") {
        CHECK_THROWS_AS(
            parse_run_config(nlohmann::json::parse(R"({"optics": {"lambda_p": -1.0}})")),
            ConfigError);
        CHECK_THROWS_AS(
            parse_run_config(nlohmann::json::parse(R"({"sequence": {"steps_hz": [0.9]}})")),
            ConfigError);
    }
    SECTION("invalid json file") {
        const fs::path dir = fs::temp_directory_path() / "rotohom_test_cfg";
        fs::create_directories(dir);
        const fs::path bad = dir / "bad.json";
        atomic_write(bad, "{ not json");
        CHECK_THROWS_AS(load_run_config(bad), ConfigError);
        CHECK_THROWS_AS(load_run_config(dir / "missing.json"), ConfigError);
        fs::remove_all(dir);
    }
}

TEST_CASE("scan window generation") {
    const RunConfig cfg = parse_run_config(nlohmann::json::object());
    const ScanSpec scan = cfg.make_scan();
    REQUIRE(scan.stage_positions.size() >= 15);

    // centred on the second feature from the left
    const double dt0 = propagation_times(cfg.arm, RotationState{}).delta_t();
    const double mid_delay =
        stage_to_delay(scan.stage_positions[scan.stage_positions.size() / 2], scan.mapping);
    CHECK_THAT(mid_delay, Catch::Matchers::WithinAbs(-0.5 * dt0, 1e-17));
    for (std::size_t i = 1; i < scan.stage_positions.size(); ++i)
        CHECK_THAT(scan.stage_positions[i] - scan.stage_positions[i - 1],
                   Catch::Matchers::WithinRel(10e-6, 1e-9));

    SECTION("explicit positions override the window") {
        RunConfig explicit_cfg = cfg;
        explicit_cfg.scan.positions_m = std::vector<double>{0.0, 1e-5, 2e-5};
        CHECK(explicit_cfg.make_scan().stage_positions.size() == 3);
    }
    SECTION("default sequence covers 0 to 0.735 in nine settings") {
        const SequenceSpec seq = cfg.make_sequence();
        REQUIRE(seq.rotation_steps.size() == 9);
        CHECK(seq.rotation_steps.front() == 0.0);
        CHECK_THAT(seq.rotation_steps.back(), Catch::Matchers::WithinRel(0.735, 1e-12));
    }
}

TEST_CASE("fits and histogram csv") {
    SequenceRecord rec;
    rec.sequence_id = 2;
    rec.direction = Direction::acw;
    rec.n_points = 9;
    rec.fit.amplitude = 0.6;
    rec.fit.period = 0.91;
    rec.fit.converged = true;
    rec.fit.dof = 5;
    const std::string fits = fits_to_csv({rec});
    CHECK(fits.find(fits_csv_header) == 0);
    CHECK(fits.find("2,acw,9,1,") != std::string::npos);

    const std::vector<std::pair<Direction, double>> data{
        {Direction::cw, 0.41}, {Direction::acw, 0.53}, {Direction::cw, 0.45}};
    const std::string hist = histogram_to_csv(aggregate_histogram(data),
                                              bin_half_periods(data, 0.05));
    CHECK(hist.find("# rotohom-histogram,1") == 0);
    CHECK(hist.find("# total,3,") != std::string::npos);
    CHECK(hist.find("bin_lo_hz,bin_hi_hz,count_cw,count_acw,count_total") != std::string::npos);
}

TEST_CASE("svg emission") {
    const std::vector<std::vector<double>> grid{{0.0, 1.0}, {2.0, 3.0}};
    const std::string heat = svg::heatmap(grid, {0.0, 1.0}, {0.0, 1.0}, "t", "x", "y");
    CHECK(heat.rfind("<svg", 0) == 0);
    CHECK(heat.find("</svg>") != std::string::npos);
    CHECK(heat == svg::heatmap(grid, {0.0, 1.0}, {0.0, 1.0}, "t", "x", "y"));

    svg::Series s;
    s.x = {0.0, 1.0, 2.0};
    s.y = {1.0, -1.0, 0.5};
    s.label = "counts";
    const std::string line = svg::line_plot({s}, "t", "x", "y");
    CHECK(line.find("polyline") != std::string::npos);

    const std::vector<std::pair<Direction, double>> data{
        {Direction::cw, 0.41}, {Direction::acw, 0.53}, {Direction::cw, 0.45}};
    const std::string hist = svg::histogram(bin_half_periods(data, 0.05),
                                            aggregate_histogram(data), "halves");
    CHECK(hist.find("mean") != std::string::npos);
    CHECK(hist.find("median") != std::string::npos);
}

TEST_CASE("calibration csv") {
    const fs::path dir = fs::temp_directory_path() / "rotohom_test_cal";
    fs::create_directories(dir);
    const fs::path file = dir / "cal.csv";
    atomic_write(file, "set_hz,actual_hz\n0.1,0.095\n0.2,0.19\n0.4,0.39\n");
    std::vector<double> s, a;
    read_calibration_csv(file, s, a);
    REQUIRE(s.size() == 3);
    CHECK(a[2] == 0.39);
    fs::remove_all(dir);
}
