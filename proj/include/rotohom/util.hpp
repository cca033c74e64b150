#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rotohom {

// Guarded exponential: results below 1e-300 are clamped to exactly zero so
// that downstream products with large cofactors cannot produce NaN.
inline double guarded_exp(double x) {
    if (x < -690.0) return 0.0;
    return std::exp(x);
}

// Phase reduction into (-pi, pi] before trig calls on large arguments.
inline double wrap_phase(double x) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::remainder(x, two_pi);
}

// Pairwise (cascade) summation: result depends only on element order, not on
// how work was partitioned across threads, and error grows like log(n).
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty range");
    return pairwise_sum(v) / static_cast<double>(v.size());
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty range");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Mean after discarding a fraction of the lowest and highest values.
inline double trimmed_mean(std::vector<double> v, double trim_fraction = 0.1) {
    if (v.empty()) throw std::invalid_argument("trimmed_mean of empty range");
    std::sort(v.begin(), v.end());
    auto k = static_cast<std::size_t>(trim_fraction * static_cast<double>(v.size()));
    if (2 * k >= v.size()) k = (v.size() - 1) / 2;
    return mean(std::span<const double>(v).subspan(k, v.size() - 2 * k));
}

// Worker cap for parallel loops; ROTOHOM_THREADS overrides the hardware count.
inline unsigned thread_budget() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("ROTOHOM_THREADS")) {
        const long req = std::strtol(env, nullptr, 10);
        if (req >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(req));
    }
    return n;
}

// Chunked parallel index loop. fn(i) must only touch state owned by index i;
// output ordering (and therefore every serialized result) is independent of
// the partition.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(thread_budget(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// A is row-major n x n. Returns false if the matrix is numerically singular.
inline bool solve_linear(std::vector<double>& a, std::vector<double>& b, std::size_t n) {
    if (a.size() != n * n || b.size() != n) throw std::invalid_argument("solve_linear: bad shapes");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (a[pivot * n + col] == 0.0 || !std::isfinite(a[pivot * n + col])) return false;
        if (pivot != col) {
            for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(b[col], b[pivot]);
        }
        const double inv = 1.0 / a[col * n + col];
        for (std::size_t row = col + 1; row < n; ++row) {
            const double f = a[row * n + col] * inv;
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
            b[row] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * b[k];
        b[i] = s / a[i * n + i];
        if (!std::isfinite(b[i])) return false;
    }
    return true;
}

// Inverts a small row-major matrix by solving against identity columns.
inline bool invert_matrix(const std::vector<double>& a, std::vector<double>& inv, std::size_t n) {
    inv.assign(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> m = a;
        std::vector<double> e(n, 0.0);
        e[col] = 1.0;
        if (!solve_linear(m, e, n)) return false;
        for (std::size_t row = 0; row < n; ++row) inv[row * n + col] = e[row];
    }
    return true;
}

}  // namespace rotohom
