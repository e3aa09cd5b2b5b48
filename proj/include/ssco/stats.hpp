#pragma once
// Statistics used by the evaluation harness: Welch's t-test, tie-aware rank
// correlations, and percentile bootstrap confidence intervals.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "ssco/rng.hpp"
#include "ssco/vec.hpp"

namespace ssco {

namespace detail {

// Continued-fraction helper for the regularized incomplete beta function.
inline double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cf(a, b, x) / a;
    }
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-sided tail probability for Student's t with `df` degrees of freedom.
inline double student_t_two_sided_p(double t, double df) {
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return detail::incomplete_beta(0.5 * df, 0.5, x);
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of freedom.
inline WelchResult welch_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("welch_test: need >= 2 samples");
    const double ma = mean(a), mb = mean(b);
    const double va = sample_variance(a), vb = sample_variance(b);
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double se2 = va / na + vb / nb;
    WelchResult r;
    if (se2 <= 0.0) {
        r.t = (ma == mb) ? 0.0 : std::numeric_limits<double>::infinity();
        r.df = na + nb - 2.0;
        r.p = (ma == mb) ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(se2);
    const double num = se2 * se2;
    const double den = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
    r.df = num / den;
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

namespace detail {

// Counts inversions of `v` in-place via mergesort.
inline std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& tmp,
                                 std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t count = merge_count(v, tmp, lo, mid) + merge_count(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            tmp[k++] = v[j++];
            count += mid - i;
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<long>(lo), tmp.begin() + static_cast<long>(hi),
              v.begin() + static_cast<long>(lo));
    return count;
}

inline std::uint64_t tie_pair_count(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::uint64_t pairs = 0;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        const std::uint64_t run = j - i;
        pairs += run * (run - 1) / 2;
        i = j;
    }
    return pairs;
}

}  // namespace detail

// Tie-aware Kendall rank correlation (tau-b), computed with Knight's
// O(n log n) algorithm. Returns 0 when either ranking is all ties.
inline double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw std::invalid_argument("kendall_tau_b: size mismatch");
    if (n < 2) return 0.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });

    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;

    std::uint64_t ties_x = 0, ties_xy = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j < n && x[order[j]] == x[order[i]]) ++j;
            const std::uint64_t run = j - i;
            ties_x += run * (run - 1) / 2;
            std::size_t k = i;
            while (k < j) {
                std::size_t l = k;
                while (l < j && y[order[l]] == y[order[k]]) ++l;
                const std::uint64_t both = l - k;
                ties_xy += both * (both - 1) / 2;
                k = l;
            }
            i = j;
        }
    }

    std::vector<double> y_sorted(n);
    for (std::size_t i = 0; i < n; ++i) y_sorted[i] = y[order[i]];
    const std::uint64_t ties_y = detail::tie_pair_count(y_sorted);

    std::vector<double> tmp(n);
    const std::uint64_t swaps = detail::merge_count(y_sorted, tmp, 0, n);

    // concordant - discordant = n0 - n1 - n2 + n3 - 2*swaps
    const double pq_diff = static_cast<double>(n0) - static_cast<double>(ties_x) -
                           static_cast<double>(ties_y) + static_cast<double>(ties_xy) -
                           2.0 * static_cast<double>(swaps);
    const double denom_x = static_cast<double>(n0 - ties_x);
    const double denom_y = static_cast<double>(n0 - ties_y);
    if (denom_x <= 0.0 || denom_y <= 0.0) return 0.0;
    return pq_diff / std::sqrt(denom_x * denom_y);
}

// Average ranks with ties shared (1-based midranks).
inline std::vector<double> midranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && x[order[j]] == x[order[i]]) ++j;
        const double shared = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
        i = j;
    }
    return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const auto rx = midranks(x);
    const auto ry = midranks(y);
    return pearson(rx, ry);
}

struct BootstrapCi {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap over paired samples for a rank statistic.
inline BootstrapCi bootstrap_ci_pairs(
    std::span<const double> x, std::span<const double> y,
    const std::function<double(std::span<const double>, std::span<const double>)>& statistic,
    int resamples, Rng& rng, double coverage = 0.95) {
    if (x.size() != y.size() || x.empty()) throw std::invalid_argument("bootstrap: bad input");
    BootstrapCi ci;
    ci.point = statistic(x, y);
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    Vec bx(x.size()), by(y.size());
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const std::size_t j = rng.uniform_int(x.size());
            bx[i] = x[j];
            by[i] = y[j];
        }
        stats[static_cast<std::size_t>(r)] = statistic(bx, by);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 0.5 * (1.0 - coverage);
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(stats.size() - 1);
        const auto lo_idx = static_cast<std::size_t>(std::floor(pos));
        const auto hi_idx = std::min(lo_idx + 1, stats.size() - 1);
        const double frac = pos - std::floor(pos);
        return stats[lo_idx] * (1.0 - frac) + stats[hi_idx] * frac;
    };
    ci.lo = quantile(alpha);
    ci.hi = quantile(1.0 - alpha);
    // Percentile intervals can exclude degenerate point estimates only through
    // floating error; clamp so the reported interval always contains the point.
    ci.lo = std::min(ci.lo, ci.point);
    ci.hi = std::max(ci.hi, ci.point);
    return ci;
}

}  // namespace ssco
