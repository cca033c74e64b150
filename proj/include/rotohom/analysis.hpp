#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rotohom/physics.hpp"
#include "rotohom/simulate.hpp"
#include "rotohom/util.hpp"

namespace rotohom {

// Signed height of one oscillating interference feature relative to the
// coincidence background: positive for a peak, negative for a dip.
struct FeatureAmplitude {
    double rotation_hz = 0.0;   // signed rotation of the scan
    double amplitude = 0.0;     // (centre - background) / background
    double uncertainty = 0.0;   // 1-sigma from counting statistics
};

namespace detail {

// Weighted least squares of ln d = q0 + q1 x + q2 x^2 around a feature.
// Returns false when the points do not determine a concave parabola.
inline bool log_parabola(std::span<const double> x, std::span<const double> d,
                         std::span<const double> w, double& center, double& width) {
    if (x.size() < 3) return false;
    double s[5] = {0, 0, 0, 0, 0};
    double t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ld = std::log(d[i]);
        double xp = 1.0;
        for (int p = 0; p < 5; ++p) {
            s[p] += w[i] * xp;
            if (p < 3) t[p] += w[i] * ld * xp;
            xp *= x[i];
        }
    }
    std::vector<double> a{s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]};
    std::vector<double> b{t[0], t[1], t[2]};
    if (!solve_linear(a, b, 3)) return false;
    const double q1 = b[1], q2 = b[2];
    if (!(q2 < 0.0)) return false;
    center = -0.5 * q1 / q2;
    width = std::sqrt(-1.0 / q2);
    return std::isfinite(center) && std::isfinite(width);
}

}  // namespace detail

// Reduces one scan over an oscillating feature to a signed relative
// amplitude. The background is a trimmed mean of the outer 20% of points on
// each side; the feature centre and width come from a log-parabola fit to
// the smoothed excursion; the centre level is the Gaussian-weighted
// matched-filter estimate against that profile.
inline FeatureAmplitude extract_feature_amplitude(const CoincidenceTrace& trace) {
    const std::size_t n = trace.points.size();
    if (n < 15)
        throw std::invalid_argument("trace too short for feature extraction (needs >= 15 points)");

    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = trace.points[i].delay;
        y[i] = static_cast<double>(trace.points[i].coincidences);
    }

    // Background from the shoulder regions.
    const std::size_t side = std::max<std::size_t>(2, n / 5);
    std::vector<double> shoulders;
    shoulders.insert(shoulders.end(), y.begin(), y.begin() + side);
    shoulders.insert(shoulders.end(), y.end() - side, y.end());
    const double bg = trimmed_mean(shoulders, 0.1);
    if (!(bg > 0.0)) throw std::invalid_argument("background estimate is not positive");
    const double bg_var = bg / static_cast<double>(shoulders.size());

    // Locate the extremum of the smoothed excursion, interior points only.
    std::vector<double> smooth(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min(n - 1, i + 2);
        double s = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) s += y[k];
        smooth[i] = s / static_cast<double>(hi - lo + 1);
    }
    std::size_t c = side;
    for (std::size_t i = side; i < n - side; ++i)
        if (std::abs(smooth[i] - bg) > std::abs(smooth[c] - bg)) c = i;
    const double sign = smooth[c] >= bg ? 1.0 : -1.0;

    // Feature centre and width from the log-parabola of d = sign*(y - bg),
    // restricted to the well-excursed points. Falls back to the located
    // extremum and a window-based width when the excursion is noise-like.
    const double peak_d = std::max(sign * (smooth[c] - bg), 0.0);
    std::vector<double> fx, fd, fw;
    for (std::size_t i = side / 2; i + side / 2 < n; ++i) {
        const double d = sign * (y[i] - bg);
        if (d > 0.25 * peak_d && d > 0.0) {
            fx.push_back(x[i]);
            fd.push_back(d);
            fw.push_back(d * d);  // log-fit weights restoring linear-space least squares
        }
    }
    double center = x[c];
    double width = (x.back() - x.front()) / 8.0;
    if (peak_d > 0.0) detail::log_parabola(fx, fd, fw, center, width);
    center = std::clamp(center, x.front(), x.back());
    const double min_width = (x.back() - x.front()) / static_cast<double>(4 * n);
    width = std::clamp(width, min_width, x.back() - x.front());

    // Matched filter against the Gaussian profile, Poisson weights.
    double num = 0.0, den = 0.0, gsum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double g = guarded_exp(-std::pow((x[i] - center) / width, 2));
        const double inv_var = 1.0 / std::max(y[i], 1.0);
        num += inv_var * g * (y[i] - bg);
        den += inv_var * g * g;
        gsum += inv_var * g;
    }
    if (!(den > 0.0)) throw std::invalid_argument("degenerate feature weights");
    const double a = num / den;
    const double var_a = 1.0 / den + (gsum / den) * (gsum / den) * bg_var;

    FeatureAmplitude out;
    out.rotation_hz = trace.rotation_hz;
    out.amplitude = a / bg;
    out.uncertainty = std::sqrt(var_a / (bg * bg) + (a * a / std::pow(bg, 4)) * bg_var);
    return out;
}

// Four-parameter sinusoid fit of feature amplitude against rotation
// frequency: model A*cos(2*pi*f/T + phi) + C.
struct SequenceFit {
    double amplitude = 0.0;  // A
    double period = 0.0;     // T, in Hz of rotation frequency
    double phase = 0.0;      // phi (rad)
    double offset = 0.0;     // C
    std::array<double, 16> covariance{};  // row-major over (A, T, phi, C)
    bool converged = false;
    double chi2 = 0.0;
    int dof = 0;

    double half_period() const { return 0.5 * period; }
    double period_uncertainty() const { return std::sqrt(std::max(covariance[5], 0.0)); }
    // Slope of the model at zero rotation; its sign tells which way the
    // feature starts moving as the platform spins up.
    double initial_slope() const {
        return -amplitude * (two_pi / period) * std::sin(phase);
    }
};

namespace detail {

struct SinusoidData {
    std::vector<double> f, y, w;  // |rotation|, amplitude, least-squares weight
};

inline double sinusoid_chi2(const SinusoidData& d, double A, double T, double phi, double C) {
    double chi2 = 0.0;
    for (std::size_t i = 0; i < d.f.size(); ++i) {
        const double r = d.y[i] - (A * std::cos(two_pi * d.f[i] / T + phi) + C);
        chi2 += d.w[i] * r * r;
    }
    return chi2;
}

// For a fixed trial period the model is linear in (a, b, C) with
// a*cos + b*sin + C; solving that system seeds the nonlinear refinement.
inline bool sinusoid_linear_init(const SinusoidData& d, double T, double& A, double& phi,
                                 double& C, double& chi2) {
    double m[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    double r[3] = {0, 0, 0};
    for (std::size_t i = 0; i < d.f.size(); ++i) {
        const double th = two_pi * d.f[i] / T;
        const double basis[3] = {std::cos(th), std::sin(th), 1.0};
        for (int p = 0; p < 3; ++p) {
            r[p] += d.w[i] * d.y[i] * basis[p];
            for (int q = 0; q < 3; ++q) m[p * 3 + q] += d.w[i] * basis[p] * basis[q];
        }
    }
    std::vector<double> a(m, m + 9);
    std::vector<double> b(r, r + 3);
    if (!solve_linear(a, b, 3)) return false;
    A = std::hypot(b[0], b[1]);
    phi = std::atan2(-b[1], b[0]);
    C = b[2];
    chi2 = sinusoid_chi2(d, A, T, phi, C);
    return std::isfinite(chi2);
}

}  // namespace detail

// Weighted nonlinear least squares with multi-start initialization over a
// grid of trial periods; Levenberg-Marquardt refinement of all four
// parameters. converged stays false when the fit diverges or the period
// runs into its bounds.
inline SequenceFit fit_sinusoid(const std::vector<FeatureAmplitude>& points) {
    if (points.size() < 5) throw std::invalid_argument("sinusoid fit needs at least 5 points");

    detail::SinusoidData d;
    for (const auto& p : points) {
        d.f.push_back(std::abs(p.rotation_hz));
        d.y.push_back(p.amplitude);
        d.w.push_back(p.uncertainty > 0.0 ? 1.0 / (p.uncertainty * p.uncertainty) : 1.0);
    }
    const auto [fmin, fmax] = std::minmax_element(d.f.begin(), d.f.end());
    const double span = *fmax - *fmin;
    if (!(span > 0.0)) throw std::invalid_argument("sinusoid fit needs a nonzero rotation span");

    // Multi-start over 16 trial periods covering [0.4, 4] spans.
    double best_chi2 = std::numeric_limits<double>::infinity();
    double A = 0.0, T = span, phi = 0.0, C = 0.0;
    constexpr int n_starts = 16;
    for (int k = 0; k < n_starts; ++k) {
        const double trial_T =
            0.4 * span * std::pow(10.0, k / (n_starts - 1.0));  // log grid up to 4 spans
        double tA, tphi, tC, tchi2;
        if (!detail::sinusoid_linear_init(d, trial_T, tA, tphi, tC, tchi2)) continue;
        if (tchi2 < best_chi2) {
            best_chi2 = tchi2;
            A = tA;
            T = trial_T;
            phi = tphi;
            C = tC;
        }
    }

    SequenceFit fit;
    fit.dof = static_cast<int>(points.size()) - 4;
    if (!std::isfinite(best_chi2)) return fit;

    const double t_lo = 0.2 * span, t_hi = 5.0 * span;
    double lambda = 1e-3;
    double chi2 = best_chi2;
    bool converged = false;
    for (int iter = 0; iter < 200; ++iter) {
        double jtj[16] = {0};
        double jtr[4] = {0};
        for (std::size_t i = 0; i < d.f.size(); ++i) {
            const double th = two_pi * d.f[i] / T + phi;
            const double s = std::sin(th), c = std::cos(th);
            const double jac[4] = {c, A * s * two_pi * d.f[i] / (T * T), -A * s, 1.0};
            const double r = d.y[i] - (A * c + C);
            for (int p = 0; p < 4; ++p) {
                jtr[p] += d.w[i] * jac[p] * r;
                for (int q = 0; q < 4; ++q) jtj[p * 4 + q] += d.w[i] * jac[p] * jac[q];
            }
        }
        std::vector<double> m(jtj, jtj + 16);
        std::vector<double> rhs(jtr, jtr + 4);
        for (int p = 0; p < 4; ++p) m[p * 4 + p] *= 1.0 + lambda;
        if (!solve_linear(m, rhs, 4)) break;

        const double nA = A + rhs[0], nT = T + rhs[1], nphi = phi + rhs[2], nC = C + rhs[3];
        if (!(nT > 0.0) || !std::isfinite(nA + nT + nphi + nC)) {
            lambda *= 10.0;
            if (lambda > 1e12) break;
            continue;
        }
        const double new_chi2 = detail::sinusoid_chi2(d, nA, nT, nphi, nC);
        if (new_chi2 <= chi2) {
            double max_rel = 0.0;
            const double cur[4] = {A, T, phi, C};
            for (int p = 0; p < 4; ++p)
                max_rel = std::max(max_rel, std::abs(rhs[p]) / std::max(std::abs(cur[p]), 1e-12));
            A = nA;
            T = nT;
            phi = nphi;
            C = nC;
            chi2 = new_chi2;
            lambda = std::max(lambda * 0.1, 1e-14);
            if (max_rel < 1e-8) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }

    // Canonical parameters: non-negative amplitude, phase in (-pi, pi].
    if (A < 0.0) {
        A = -A;
        phi += std::numbers::pi;
    }
    phi = wrap_phase(phi);

    fit.amplitude = A;
    fit.period = T;
    fit.phase = phi;
    fit.offset = C;
    fit.chi2 = chi2;
    fit.converged = converged && std::isfinite(chi2) && T > t_lo && T < t_hi;

    double jtj[16] = {0};
    for (std::size_t i = 0; i < d.f.size(); ++i) {
        const double th = two_pi * d.f[i] / T + phi;
        const double s = std::sin(th), c = std::cos(th);
        const double jac[4] = {c, A * s * two_pi * d.f[i] / (T * T), -A * s, 1.0};
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < 4; ++q) jtj[p * 4 + q] += d.w[i] * jac[p] * jac[q];
    }
    std::vector<double> cov;
    if (invert_matrix(std::vector<double>(jtj, jtj + 16), cov, 4)) {
        std::copy(cov.begin(), cov.end(), fit.covariance.begin());
    } else {
        fit.converged = false;
    }
    return fit;
}

// Per-direction summary of extracted half-periods.
struct GroupStats {
    std::size_t count = 0;
    double mean_hz = 0.0;
    double median_hz = 0.0;
};

struct HistogramStats {
    std::optional<GroupStats> cw;
    std::optional<GroupStats> acw;
    GroupStats total;
};

namespace detail {
inline GroupStats group_stats(std::vector<double> v) {
    // Sorting first makes the statistics exactly order-independent.
    std::sort(v.begin(), v.end());
    GroupStats g;
    g.count = v.size();
    g.mean_hz = mean(v);
    g.median_hz = median(v);
    return g;
}
}  // namespace detail

// Mean and median of half-periods per rotation sense and overall. Callers
// pass converged fits only; an absent direction simply yields no group.
inline HistogramStats aggregate_histogram(
    std::span<const std::pair<Direction, double>> half_periods) {
    if (half_periods.empty())
        throw std::invalid_argument("aggregate_histogram needs at least one half-period");
    std::vector<double> cw, acw, all;
    for (const auto& [dir, hp] : half_periods) {
        (dir == Direction::cw ? cw : acw).push_back(hp);
        all.push_back(hp);
    }
    HistogramStats stats;
    if (!cw.empty()) stats.cw = detail::group_stats(std::move(cw));
    if (!acw.empty()) stats.acw = detail::group_stats(std::move(acw));
    stats.total = detail::group_stats(std::move(all));
    return stats;
}

// Equal-width binning used by the histogram outputs.
struct HistogramBins {
    double bin_width = 0.0;
    double origin = 0.0;  // lower edge of bin 0
    std::vector<std::size_t> cw, acw, total;

    double bin_lo(std::size_t i) const { return origin + static_cast<double>(i) * bin_width; }
};

inline HistogramBins bin_half_periods(std::span<const std::pair<Direction, double>> half_periods,
                                      double bin_width) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("bin width must be > 0");
    if (half_periods.empty()) throw std::invalid_argument("no half-periods to bin");
    double lo = half_periods.front().second, hi = lo;
    for (const auto& [dir, hp] : half_periods) {
        lo = std::min(lo, hp);
        hi = std::max(hi, hp);
    }
    HistogramBins bins;
    bins.bin_width = bin_width;
    bins.origin = std::floor(lo / bin_width) * bin_width;
    const auto n = static_cast<std::size_t>(std::floor((hi - bins.origin) / bin_width)) + 1;
    bins.cw.assign(n, 0);
    bins.acw.assign(n, 0);
    bins.total.assign(n, 0);
    for (const auto& [dir, hp] : half_periods) {
        auto i = static_cast<std::size_t>(std::floor((hp - bins.origin) / bin_width));
        i = std::min(i, n - 1);
        (dir == Direction::cw ? bins.cw : bins.acw)[i] += 1;
        bins.total[i] += 1;
    }
    return bins;
}

// Power-law fit actual = a * set^b by least squares on the logarithms.
inline MotorCalibration fit_power_law(std::span<const double> set_hz,
                                      std::span<const double> actual_hz) {
    if (set_hz.size() != actual_hz.size())
        throw std::invalid_argument("power-law fit needs matching input lengths");
    if (set_hz.size() < 3) throw std::invalid_argument("power-law fit needs at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < set_hz.size(); ++i) {
        if (!(set_hz[i] > 0.0) || !(actual_hz[i] > 0.0))
            throw std::invalid_argument("power-law fit needs strictly positive values");
        const double lx = std::log(set_hz[i]);
        const double ly = std::log(actual_hz[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const auto n = static_cast<double>(set_hz.size());
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0))
        throw std::invalid_argument("power-law fit needs distinct set frequencies");
    const double b = (n * sxy - sx * sy) / denom;
    const double log_a = (sy - b * sx) / n;
    return MotorCalibration{std::exp(log_a), b};
}

}  // namespace rotohom
