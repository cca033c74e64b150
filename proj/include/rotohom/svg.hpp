#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotohom/analysis.hpp"

namespace rotohom {
namespace svg {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

// Perceptually uniform dark-to-bright color ramp, t in [0, 1].
inline std::string colormap(double t) {
    static constexpr double stops[9][3] = {
        {0.267, 0.005, 0.329}, {0.275, 0.194, 0.496}, {0.212, 0.359, 0.552},
        {0.153, 0.497, 0.558}, {0.122, 0.633, 0.530}, {0.288, 0.758, 0.428},
        {0.626, 0.854, 0.224}, {0.889, 0.893, 0.152}, {0.993, 0.906, 0.144}};
    t = std::clamp(t, 0.0, 1.0) * 8.0;
    const int i = std::min(7, static_cast<int>(t));
    const double f = t - i;
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                  static_cast<int>(255.0 * (stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                  static_cast<int>(255.0 * (stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                  static_cast<int>(255.0 * (stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
    return buf;
}

struct Frame {
    double width = 820, height = 560;
    double left = 80, right = 120, top = 46, bottom = 58;
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
    double px(double x) const { return left + (x - x_min) / (x_max - x_min) * plot_w(); }
    double py(double y) const { return top + (y_max - y) / (y_max - y_min) * plot_h(); }
};

inline void open_canvas(std::ostringstream& out, const Frame& fr, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\""
        << fr.height << "\" viewBox=\"0 0 " << fr.width << ' ' << fr.height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fr.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

inline void axes(std::ostringstream& out, const Frame& fr, const std::string& x_label,
                 const std::string& y_label) {
    out << "<rect x=\"" << fr.left << "\" y=\"" << fr.top << "\" width=\"" << fr.plot_w()
        << "\" height=\"" << fr.plot_h()
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = fr.x_min + k * (fr.x_max - fr.x_min) / 4.0;
        const double yv = fr.y_min + k * (fr.y_max - fr.y_min) / 4.0;
        out << "<line x1=\"" << fr.px(xv) << "\" y1=\"" << fr.top + fr.plot_h() << "\" x2=\""
            << fr.px(xv) << "\" y2=\"" << fr.top + fr.plot_h() + 5
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fr.px(xv) << "\" y=\"" << fr.top + fr.plot_h() + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(xv) << "</text>\n";
        out << "<line x1=\"" << fr.left - 5 << "\" y1=\"" << fr.py(yv) << "\" x2=\"" << fr.left
            << "\" y2=\"" << fr.py(yv) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fr.left - 8 << "\" y=\"" << fr.py(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << fr.left + fr.plot_w() / 2 << "\" y=\"" << fr.height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << x_label
        << "</text>\n";
    out << "<text x=\"18\" y=\"" << fr.top + fr.plot_h() / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << fr.top + fr.plot_h() / 2 << ")\">" << y_label
        << "</text>\n";
}

}  // namespace detail

// Heat map over a rectangular grid: values[iy][ix] rendered with the lowest
// y row at the bottom. Axis vectors hold the grid coordinates.
inline std::string heatmap(const std::vector<std::vector<double>>& values,
                           const std::vector<double>& x_axis, const std::vector<double>& y_axis,
                           const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
    detail::Frame fr;
    fr.x_min = x_axis.front();
    fr.x_max = x_axis.back();
    fr.y_min = y_axis.front();
    fr.y_max = y_axis.back();

    double v_min = values[0][0], v_max = v_min;
    for (const auto& row : values)
        for (double v : row) {
            v_min = std::min(v_min, v);
            v_max = std::max(v_max, v);
        }
    if (v_max == v_min) v_max = v_min + 1.0;

    std::ostringstream out;
    detail::open_canvas(out, fr, title);
    const double cw = fr.plot_w() / static_cast<double>(x_axis.size());
    const double ch = fr.plot_h() / static_cast<double>(y_axis.size());
    for (std::size_t iy = 0; iy < y_axis.size(); ++iy) {
        for (std::size_t ix = 0; ix < x_axis.size(); ++ix) {
            const double t = (values[iy][ix] - v_min) / (v_max - v_min);
            out << "<rect x=\"" << detail::num(fr.left + ix * cw) << "\" y=\""
                << detail::num(fr.top + fr.plot_h() - (iy + 1) * ch) << "\" width=\""
                << detail::num(cw + 0.5) << "\" height=\"" << detail::num(ch + 0.5)
                << "\" fill=\"" << detail::colormap(t) << "\"/>\n";
        }
    }
    detail::axes(out, fr, x_label, y_label);

    // Color bar.
    const double bar_x = fr.width - fr.right + 24;
    for (int k = 0; k < 64; ++k) {
        out << "<rect x=\"" << bar_x << "\" y=\"" << fr.top + fr.plot_h() * (63 - k) / 64.0
            << "\" width=\"16\" height=\"" << detail::num(fr.plot_h() / 64.0 + 0.5)
            << "\" fill=\"" << detail::colormap(k / 63.0) << "\"/>\n";
    }
    out << "<text x=\"" << bar_x + 20 << "\" y=\"" << fr.top + 10
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::tick_label(v_max)
        << "</text>\n";
    out << "<text x=\"" << bar_x + 20 << "\" y=\"" << fr.top + fr.plot_h()
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << detail::tick_label(v_min)
        << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

// Scatter-plus-line plot of one or more series sharing an x axis.
struct Series {
    std::vector<double> x, y;
    std::string color = "#1f77b4";
    std::string label;
};

inline std::string line_plot(const std::vector<Series>& series, const std::string& title,
                             const std::string& x_label, const std::string& y_label) {
    detail::Frame fr;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                fr.x_min = fr.x_max = s.x[i];
                fr.y_min = fr.y_max = s.y[i];
                first = false;
            }
            fr.x_min = std::min(fr.x_min, s.x[i]);
            fr.x_max = std::max(fr.x_max, s.x[i]);
            fr.y_min = std::min(fr.y_min, s.y[i]);
            fr.y_max = std::max(fr.y_max, s.y[i]);
        }
    if (fr.x_max == fr.x_min) fr.x_max = fr.x_min + 1.0;
    if (fr.y_max == fr.y_min) fr.y_max = fr.y_min + 1.0;
    const double pad = 0.05 * (fr.y_max - fr.y_min);
    fr.y_min -= pad;
    fr.y_max += pad;

    std::ostringstream out;
    detail::open_canvas(out, fr, title);
    detail::axes(out, fr, x_label, y_label);
    double legend_y = fr.top + 14;
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << detail::num(fr.px(s.x[i])) << ',' << detail::num(fr.py(s.y[i])) << ' ';
        out << "\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << "<circle cx=\"" << detail::num(fr.px(s.x[i])) << "\" cy=\""
                << detail::num(fr.py(s.y[i])) << "\" r=\"2\" fill=\"" << s.color << "\"/>\n";
        if (!s.label.empty()) {
            out << "<rect x=\"" << fr.left + fr.plot_w() - 150 << "\" y=\"" << legend_y - 9
                << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/>\n";
            out << "<text x=\"" << fr.left + fr.plot_w() - 136 << "\" y=\"" << legend_y
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
            legend_y += 16;
        }
    }
    out << "</svg>\n";
    return out.str();
}

// Histogram of half-periods with per-direction overlays and mean/median
// markers, one bar pair per bin.
inline std::string histogram(const HistogramBins& bins, const HistogramStats& stats,
                             const std::string& title) {
    detail::Frame fr;
    fr.x_min = bins.bin_lo(0);
    fr.x_max = bins.bin_lo(bins.total.size());
    fr.y_min = 0.0;
    std::size_t max_count = 1;
    for (std::size_t c : bins.total) max_count = std::max(max_count, c);
    fr.y_max = static_cast<double>(max_count) * 1.15;

    std::ostringstream out;
    detail::open_canvas(out, fr, title);
    for (std::size_t i = 0; i < bins.total.size(); ++i) {
        const double x0 = fr.px(bins.bin_lo(i));
        const double w = fr.px(bins.bin_lo(i + 1)) - x0;
        const auto bar = [&](double count, double off, double frac, const char* fill) {
            if (count <= 0.0) return;
            out << "<rect x=\"" << detail::num(x0 + off * w) << "\" y=\""
                << detail::num(fr.py(count)) << "\" width=\"" << detail::num(frac * w - 1.0)
                << "\" height=\"" << detail::num(fr.py(0.0) - fr.py(count)) << "\" fill=\"" << fill
                << "\" fill-opacity=\"0.85\"/>\n";
        };
        bar(static_cast<double>(bins.cw[i]), 0.0, 0.5, "#1f77b4");
        bar(static_cast<double>(bins.acw[i]), 0.5, 0.5, "#ff7f0e");
        out << "<rect x=\"" << detail::num(x0) << "\" y=\""
            << detail::num(fr.py(static_cast<double>(bins.total[i]))) << "\" width=\""
            << detail::num(w - 1.0) << "\" height=\""
            << detail::num(fr.py(0.0) - fr.py(static_cast<double>(bins.total[i])))
            << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    }
    const auto marker = [&](double x, const char* color, const std::string& label, double ty) {
        out << "<line x1=\"" << fr.px(x) << "\" y1=\"" << fr.top << "\" x2=\"" << fr.px(x)
            << "\" y2=\"" << fr.top + fr.plot_h()
            << "\" stroke=\"" << color << "\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
        out << "<text x=\"" << fr.px(x) + 4 << "\" y=\"" << ty
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color << "\">" << label
            << "</text>\n";
    };
    marker(stats.total.mean_hz, "#d62728", "mean " + detail::tick_label(stats.total.mean_hz),
           fr.top + 14);
    marker(stats.total.median_hz, "#2ca02c",
           "median " + detail::tick_label(stats.total.median_hz), fr.top + 30);
    detail::axes(out, fr, "half period (Hz)", "sequences");
    out << "<rect x=\"" << fr.width - fr.right + 10 << "\" y=\"" << fr.top
        << "\" width=\"10\" height=\"10\" fill=\"#1f77b4\"/><text x=\""
        << fr.width - fr.right + 24 << "\" y=\"" << fr.top + 9
        << "\" font-family=\"sans-serif\" font-size=\"11\">cw</text>\n";
    out << "<rect x=\"" << fr.width - fr.right + 10 << "\" y=\"" << fr.top + 16
        << "\" width=\"10\" height=\"10\" fill=\"#ff7f0e\"/><text x=\""
        << fr.width - fr.right + 24 << "\" y=\"" << fr.top + 25
        << "\" font-family=\"sans-serif\" font-size=\"11\">acw</text>\n";
    out << "</svg>\n";
    return out.str();
}

}  // namespace svg
}  // namespace rotohom
