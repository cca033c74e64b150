#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotohom/analysis.hpp"
#include "rotohom/simulate.hpp"

namespace rotohom {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace io_detail {

// 17 significant digits: parses back to the identical double, so
// write -> read -> write round-trips byte for byte.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

inline std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CsvError("bad numeric field for " + what + ": '" + s + "'");
    }
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw CsvError("bad integer field for " + what + ": '" + s + "'");
    return v;
}

}  // namespace io_detail

// Writes content to path via a temporary file in the same directory followed
// by an atomic rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed for " + path.string() + ": " + ec.message());
}

inline constexpr const char* trace_csv_marker = "# rotohom-trace,1";
inline constexpr const char* trace_csv_header =
    "stage_position_m,delay_s,coincidences,singles_a,singles_b";

inline std::string trace_to_csv(const CoincidenceTrace& trace) {
    std::ostringstream out;
    out << trace_csv_marker << '\n';
    out << "# sequence," << trace.sequence_id << '\n';
    out << "# step," << trace.step_index << '\n';
    out << "# direction," << to_string(trace.direction) << '\n';
    out << "# set_frequency_hz," << io_detail::fmt_short(trace.set_frequency_hz) << '\n';
    out << "# rotation_hz," << io_detail::fmt_short(trace.rotation_hz) << '\n';
    out << "# seed," << trace.seed << '\n';
    out << "# acquisition_s," << io_detail::fmt_short(trace.acquisition_time) << '\n';
    out << trace_csv_header << '\n';
    for (const auto& p : trace.points) {
        out << io_detail::fmt(p.stage_position) << ',' << io_detail::fmt(p.delay) << ','
            << p.coincidences << ',' << p.singles_a << ',' << p.singles_b << '\n';
    }
    return out.str();
}

inline CoincidenceTrace trace_from_csv(std::istream& in, const std::string& origin) {
    CoincidenceTrace trace;
    std::string line;
    if (!std::getline(in, line) || line != trace_csv_marker)
        throw CsvError(origin + ": missing trace marker line");
    bool saw_header = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# ", 0) == 0) {
            const auto fields = io_detail::split(std::string_view(line).substr(2));
            if (fields.size() != 2) throw CsvError(origin + ": malformed metadata line: " + line);
            const std::string& key = fields[0];
            const std::string& val = fields[1];
            if (key == "sequence")
                trace.sequence_id = static_cast<int>(io_detail::parse_int(val, key));
            else if (key == "step")
                trace.step_index = static_cast<int>(io_detail::parse_int(val, key));
            else if (key == "direction")
                trace.direction = direction_from_string(val);
            else if (key == "set_frequency_hz")
                trace.set_frequency_hz = io_detail::parse_double(val, key);
            else if (key == "rotation_hz")
                trace.rotation_hz = io_detail::parse_double(val, key);
            else if (key == "seed")
                trace.seed = static_cast<std::uint64_t>(io_detail::parse_int(val, key));
            else if (key == "acquisition_s")
                trace.acquisition_time = io_detail::parse_double(val, key);
            else
                throw CsvError(origin + ": unknown metadata key: " + key);
            continue;
        }
        if (!saw_header) {
            if (line != trace_csv_header)
                throw CsvError(origin + ": unexpected column header: " + line);
            saw_header = true;
            continue;
        }
        const auto fields = io_detail::split(line);
        if (fields.size() != 5) throw CsvError(origin + ": expected 5 fields, got " + line);
        TracePoint p;
        p.stage_position = io_detail::parse_double(fields[0], "stage_position_m");
        p.delay = io_detail::parse_double(fields[1], "delay_s");
        p.coincidences = io_detail::parse_int(fields[2], "coincidences");
        p.singles_a = io_detail::parse_int(fields[3], "singles_a");
        p.singles_b = io_detail::parse_int(fields[4], "singles_b");
        trace.points.push_back(p);
    }
    if (!saw_header) throw CsvError(origin + ": no data header found");
    if (trace.points.empty()) throw CsvError(origin + ": no data rows");
    return trace;
}

inline CoincidenceTrace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return trace_from_csv(in, path.filename().string());
}

// One fits-CSV row per analyzed sequence.
struct SequenceRecord {
    int sequence_id = 0;
    Direction direction = Direction::cw;
    std::size_t n_points = 0;
    SequenceFit fit;
};

inline constexpr const char* fits_csv_header =
    "sequence,direction,n_points,converged,amplitude,period_hz,half_period_hz,phase_rad,offset,"
    "amplitude_err,period_err,phase_err,offset_err,chi2,dof";

inline std::string fits_to_csv(const std::vector<SequenceRecord>& records) {
    std::ostringstream out;
    out << fits_csv_header << '\n';
    for (const auto& r : records) {
        const auto& c = r.fit.covariance;
        out << r.sequence_id << ',' << to_string(r.direction) << ',' << r.n_points << ','
            << (r.fit.converged ? 1 : 0) << ',' << io_detail::fmt(r.fit.amplitude) << ','
            << io_detail::fmt(r.fit.period) << ',' << io_detail::fmt(r.fit.half_period()) << ','
            << io_detail::fmt(r.fit.phase) << ',' << io_detail::fmt(r.fit.offset) << ','
            << io_detail::fmt(std::sqrt(std::max(c[0], 0.0))) << ','
            << io_detail::fmt(std::sqrt(std::max(c[5], 0.0))) << ','
            << io_detail::fmt(std::sqrt(std::max(c[10], 0.0))) << ','
            << io_detail::fmt(std::sqrt(std::max(c[15], 0.0))) << ','
            << io_detail::fmt(r.fit.chi2) << ',' << r.fit.dof << '\n';
    }
    return out.str();
}

inline std::string histogram_to_csv(const HistogramStats& stats, const HistogramBins& bins) {
    std::ostringstream out;
    out << "# rotohom-histogram,1\n";
    out << "# group,count,mean_hz,median_hz\n";
    const auto emit_group = [&](const char* name, const GroupStats& g) {
        out << "# " << name << ',' << g.count << ',' << io_detail::fmt_short(g.mean_hz) << ','
            << io_detail::fmt_short(g.median_hz) << '\n';
    };
    if (stats.cw) emit_group("cw", *stats.cw);
    if (stats.acw) emit_group("acw", *stats.acw);
    emit_group("total", stats.total);
    out << "bin_lo_hz,bin_hi_hz,count_cw,count_acw,count_total\n";
    for (std::size_t i = 0; i < bins.total.size(); ++i) {
        out << io_detail::fmt_short(bins.bin_lo(i)) << ','
            << io_detail::fmt_short(bins.bin_lo(i + 1)) << ',' << bins.cw[i] << ',' << bins.acw[i]
            << ',' << bins.total[i] << '\n';
    }
    return out.str();
}

// Two-column calibration data: set_hz,actual_hz.
inline void read_calibration_csv(const std::filesystem::path& path, std::vector<double>& set_hz,
                                 std::vector<double>& actual_hz) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (first && line.find("set_hz") != std::string::npos) {
            first = false;
            continue;
        }
        first = false;
        const auto fields = io_detail::split(line);
        if (fields.size() != 2)
            throw CsvError(path.filename().string() + ": expected 2 fields, got " + line);
        set_hz.push_back(io_detail::parse_double(fields[0], "set_hz"));
        actual_hz.push_back(io_detail::parse_double(fields[1], "actual_hz"));
    }
}

}  // namespace rotohom
