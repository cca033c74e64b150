#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "rotohom/models.hpp"
#include "rotohom/physics.hpp"
#include "rotohom/util.hpp"

namespace rotohom {

enum class QuadScheme { trapezoid, gauss_hermite };

// Brute-force integration settings. num_points is the node count per axis;
// half_width_sigmas is the half extent of the trapezoid grid in units of the
// Gaussian width of the integrand.
struct QuadratureSpec {
    int num_points = 4096;
    double half_width_sigmas = 12.0;
    QuadScheme scheme = QuadScheme::trapezoid;

    void validate() const {
        if (num_points < 64) throw std::invalid_argument("quadrature.num_points must be >= 64");
        if (scheme == QuadScheme::trapezoid && half_width_sigmas < 8.0)
            throw std::invalid_argument("quadrature.half_width_sigmas must be >= 8 for trapezoid");
    }
};

// Result of a self-checked quadrature: relative_change compares the value
// against a re-run with doubled node count.
struct QuadratureResult {
    double value = 0.0;
    double relative_change = 0.0;
    bool converged = false;
};

namespace detail {

// Nodes and weights for integral( exp(-x^2) f(x) dx ) ~ sum w_i f(x_i),
// by the Golub-Welsch method: the nodes are the eigenvalues of the Jacobi
// matrix of the Hermite recurrence and the weights follow from the first
// eigenvector components. Implicit-shift QL on the symmetric tridiagonal
// matrix, accumulating only the first row of the rotations; robust for
// any node count (far-tail weights underflow to their correct zero).
inline void gauss_hermite_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> d(n, 0.0);       // Jacobi diagonal
    std::vector<double> e(n, 0.0);       // sub-diagonal, e[0..n-2]
    std::vector<double> q(n, 0.0);       // first row of the eigenvector matrix
    for (int j = 1; j < n; ++j) e[j - 1] = std::sqrt(0.5 * j);
    q[0] = 1.0;

    for (int l = 0; l < n; ++l) {
        for (int iter = 0;; ++iter) {
            int m = l;
            for (; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m == l) break;
            if (iter >= 60) throw std::runtime_error("gauss_hermite_nodes: QL did not converge");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            for (int i = m - 1; i >= l; --i) {
                double f = s * e[i];
                const double b = c * e[i];
                r = std::hypot(f, g);
                e[i + 1] = r;
                if (r == 0.0) {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                f = q[i + 1];
                q[i + 1] = s * q[i] + c * f;
                q[i] = c * q[i] - s * f;
            }
            if (r == 0.0 && m - 1 >= l) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double total = std::sqrt(std::numbers::pi);  // zeroth moment of exp(-x^2)
    for (int i = 0; i < n; ++i) {
        x[i] = d[order[i]];
        w[i] = total * q[order[i]] * q[order[i]];
    }
}

// Loop-exit amplitude factors of one arm, with a common time offset removed.
struct ArmPhases {
    double t_cw, t_ac;
    double imbalance;   // t_cw - t_ac
    double cos_half;    // cos(mu * imbalance)
};

inline std::complex<double> cis(double phase) {
    const double p = wrap_phase(phase);
    return {std::cos(p), std::sin(p)};
}

}  // namespace detail

// Spectral-integral evaluation of the coincidence level, the independent
// check of the closed forms. Integrates the single remaining frequency
// integral of the detection-probability derivation over the Gaussian
// spectrum and multiplies by 4*pi/16. The imaginary residual of the
// integral must vanish by symmetry; it is asserted below 1e-10 of scale.
inline double nc_quadrature(const AsymmetricModelInput& in, const QuadratureSpec& quad) {
    quad.validate();
    in.optics.validate();
    const double dw = in.optics.delta_omega;
    const double mu = in.optics.mu();

    // A common offset on all four transit times cancels exactly between the
    // idler and signal factors; removing it keeps the phases small.
    const double t0 = 0.25 * (in.t_icw + in.t_iac + in.t_scw + in.t_sac);
    const detail::ArmPhases idler{in.t_icw - t0, in.t_iac - t0, in.t_icw - in.t_iac,
                                  std::cos(wrap_phase(mu * (in.t_icw - in.t_iac)))};
    const detail::ArmPhases signal{in.t_scw - t0, in.t_sac - t0, in.t_scw - in.t_sac,
                                   std::cos(wrap_phase(mu * (in.t_scw - in.t_sac)))};
    const double d = in.delta_t_hom;

    // Integrand without the Gaussian spectral weight, as a function of the
    // frequency deviation from mu.
    const auto bracket = [&](double w) -> std::complex<double> {
        const double fixed = 4.0 * (1.0 - std::cos(wrap_phase((w + mu) * idler.imbalance))) *
                             (1.0 - std::cos(wrap_phase((mu - w) * signal.imbalance)));
        const std::complex<double> fi =
            detail::cis(-2.0 * w * idler.t_cw) + detail::cis(-2.0 * w * idler.t_ac) -
            2.0 * idler.cos_half * detail::cis(-w * (idler.t_cw + idler.t_ac));
        const std::complex<double> fs =
            detail::cis(2.0 * w * signal.t_cw) + detail::cis(2.0 * w * signal.t_ac) -
            2.0 * signal.cos_half * detail::cis(w * (signal.t_cw + signal.t_ac));
        return fixed - detail::cis(-2.0 * w * d) * fi * fs;
    };

    const int n = quad.num_points;
    std::vector<double> re(n), im(n);
    double integral_re = 0.0, integral_im = 0.0;

    if (quad.scheme == QuadScheme::trapezoid) {
        const double h = quad.half_width_sigmas * dw;
        const double step = 2.0 * h / (n - 1);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
            const double w = -h + static_cast<double>(k) * step;
            const double endpoint = (k == 0 || k + 1 == static_cast<std::size_t>(n)) ? 0.5 : 1.0;
            const std::complex<double> f =
                endpoint * guarded_exp(-w * w / (dw * dw)) * bracket(w);
            re[k] = f.real();
            im[k] = f.imag();
        });
        integral_re = step * pairwise_sum(re);
        integral_im = step * pairwise_sum(im);
    } else {
        std::vector<double> x, wt;
        detail::gauss_hermite_nodes(n, x, wt);
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
            const std::complex<double> f = wt[k] * bracket(dw * x[k]);
            re[k] = f.real();
            im[k] = f.imag();
        });
        integral_re = dw * pairwise_sum(re);
        integral_im = dw * pairwise_sum(im);
    }

    const double norm = 1.0 / (2.0 * std::numbers::pi * dw * dw);
    const double scale_factor = (4.0 * std::numbers::pi / 16.0) * norm;
    const double value = scale_factor * integral_re;
    const double residual = std::abs(scale_factor * integral_im);
    const double scale = std::max(std::abs(value), std::sqrt(std::numbers::pi) / (8.0 * dw));
    if (residual > 1e-10 * scale)
        throw std::runtime_error("nc_quadrature: imaginary residual exceeds 1e-10 of scale");
    return value;
}

inline QuadratureResult nc_quadrature_checked(const AsymmetricModelInput& in,
                                              const QuadratureSpec& quad) {
    const double coarse = nc_quadrature(in, quad);
    QuadratureSpec fine = quad;
    fine.num_points = 2 * quad.num_points;
    const double refined = nc_quadrature(in, fine);
    const double scale =
        std::max({std::abs(refined), std::sqrt(std::numbers::pi) / (8.0 * in.optics.delta_omega)});
    const double rel = std::abs(refined - coarse) / scale;
    return QuadratureResult{refined, rel, rel <= 1e-8};
}

namespace detail {

// Tensor grid rotated to the +-45 degree axes of the pair spectrum, where
// the joint Gaussian separates into a narrow pair-sum direction and a wide
// single-photon direction.
template <typename Integrand>
double pair_grid_sum(const OpticalConfig& optics, const QuadratureSpec& quad,
                     Integrand&& integrand) {
    const double dw = optics.delta_omega;
    const double sp = optics.sigma_p;
    const double mu = optics.mu();
    const double sigma_sum = dw * sp / std::sqrt(sp * sp + 2.0 * dw * dw);
    const double sigma_diff = dw;
    const int n = quad.num_points;
    const double hu = quad.half_width_sigmas * sigma_sum;
    const double hv = quad.half_width_sigmas * sigma_diff;
    const double du = 2.0 * hu / (n - 1);
    const double dv = 2.0 * hv / (n - 1);
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;

    std::vector<double> row_sums(n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t iu) {
        const double u = -hu + static_cast<double>(iu) * du;
        const double wu = (iu == 0 || iu + 1 == static_cast<std::size_t>(n)) ? 0.5 : 1.0;
        std::vector<double> row(n);
        for (int iv = 0; iv < n; ++iv) {
            const double v = -hv + iv * dv;
            const double wv = (iv == 0 || iv + 1 == n) ? 0.5 : 1.0;
            const double w1 = mu + (u + v) * inv_sqrt2;
            const double w2 = mu + (u - v) * inv_sqrt2;
            row[iv] = wu * wv * integrand(w1, w2);
        }
        row_sums[iu] = pairwise_sum(row);
    });
    return du * dv * pairwise_sum(row_sums);
}

}  // namespace detail

// Squared modulus of the normalized source pair spectrum.
inline double pair_spectrum_density(double w1, double w2, const OpticalConfig& optics) {
    const double dw2 = optics.delta_omega * optics.delta_omega;
    const double sp2 = optics.sigma_p * optics.sigma_p;
    const double mu = optics.mu();
    const double x1 = w1 - mu;
    const double x2 = w2 - mu;
    const double norm_sq =
        2.0 * std::numbers::pi * optics.delta_omega / std::sqrt(1.0 / dw2 + 2.0 / sp2);
    return guarded_exp(-0.5 * x1 * x1 / dw2 - 0.5 * x2 * x2 / dw2 -
                       0.5 * (x1 + x2) * (x1 + x2) / sp2) /
           norm_sq;
}

// Checks that the source pair spectrum integrates to one: brute-force 2-D
// quadrature of the squared normalized spectrum.
inline double spectrum_normalization(const OpticalConfig& optics, const QuadratureSpec& quad) {
    quad.validate();
    optics.validate();
    if (optics.sigma_p <= 0.0)
        throw std::domain_error("spectrum_normalization needs sigma_p > 0");
    return detail::pair_grid_sum(optics, quad, [&](double w1, double w2) {
        return pair_spectrum_density(w1, w2, optics);
    });
}

inline QuadratureResult spectrum_normalization_checked(const OpticalConfig& optics,
                                                       const QuadratureSpec& quad) {
    const double coarse = spectrum_normalization(optics, quad);
    QuadratureSpec fine = quad;
    fine.num_points = 2 * quad.num_points;
    const double refined = spectrum_normalization(optics, fine);
    const double rel = std::abs(refined - coarse) / std::max(std::abs(refined), 1e-30);
    return QuadratureResult{refined, rel, rel <= 1e-8};
}

// Coincidence probability by brute-force overlap of the post-loop pair
// amplitude with its photon-exchanged copy. Each photon carries the loop
// amplitude factor sin(omega * delta_t / 2); the scanned delay appears as a
// relative phase, so the exchange overlap acquires cos((w1 - w2) * delay).
// Both the overlap and the state normalization come from the same grid.
inline double pc_overlap_quadrature(double delta_t_hom, const ArmDelays& arm_delays,
                                    const OpticalConfig& optics, const QuadratureSpec& quad) {
    quad.validate();
    optics.validate();
    if (optics.sigma_p <= 0.0)
        throw std::domain_error("pc_overlap_quadrature needs sigma_p > 0");
    const double dt = arm_delays.delta_t();
    const auto weight = [&](double w1, double w2) {
        const double s1 = std::sin(wrap_phase(0.5 * w1 * dt));
        const double s2 = std::sin(wrap_phase(0.5 * w2 * dt));
        return pair_spectrum_density(w1, w2, optics) * s1 * s1 * s2 * s2;
    };
    const double denom = detail::pair_grid_sum(optics, quad, weight);
    if (!(denom > 0.0))
        throw std::domain_error("pc_overlap_quadrature: state amplitude vanishes (dark loop output)");
    const double numer = detail::pair_grid_sum(optics, quad, [&](double w1, double w2) {
        return weight(w1, w2) * std::cos(wrap_phase((w1 - w2) * delta_t_hom));
    });
    return 0.5 * (1.0 - numer / denom);
}

inline QuadratureResult pc_overlap_quadrature_checked(double delta_t_hom,
                                                      const ArmDelays& arm_delays,
                                                      const OpticalConfig& optics,
                                                      const QuadratureSpec& quad) {
    const double coarse = pc_overlap_quadrature(delta_t_hom, arm_delays, optics, quad);
    QuadratureSpec fine = quad;
    fine.num_points = 2 * quad.num_points;
    const double refined = pc_overlap_quadrature(delta_t_hom, arm_delays, optics, fine);
    const double rel = std::abs(refined - coarse) / std::max(std::abs(refined), 1e-30);
    return QuadratureResult{refined, rel, rel <= 1e-8};
}

// Survival probability of the pair through both loop output ports, by the
// same brute-force grid; cross-checks the closed form and ties the overlap
// denominator to the analytic state normalization.
inline double pf_quadrature(const ArmDelays& arm_delays, const OpticalConfig& optics,
                            const QuadratureSpec& quad) {
    quad.validate();
    optics.validate();
    if (optics.sigma_p <= 0.0) throw std::domain_error("pf_quadrature needs sigma_p > 0");
    const double dt = arm_delays.delta_t();
    return detail::pair_grid_sum(optics, quad, [&](double w1, double w2) {
        const double s1 = std::sin(wrap_phase(0.5 * w1 * dt));
        const double s2 = std::sin(wrap_phase(0.5 * w2 * dt));
        return pair_spectrum_density(w1, w2, optics) * s1 * s1 * s2 * s2;
    });
}

}  // namespace rotohom
