#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace niwalk::stats {

inline double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean: empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample standard deviation.
inline double stddev(std::span<const double> v) {
    if (v.size() < 2) throw std::invalid_argument("stddev: need at least 2 samples");
    double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
    bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z = 1.96) {
    if (n == 0) throw std::invalid_argument("wilson_interval: n must be positive");
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {center - half, center + half};
}

inline double binomial_sigma(double p, double n) {
    return std::sqrt(p * (1.0 - p) / n);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace detail {

/// Regularized incomplete beta I_x(a,b), Lentz continued fraction.
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
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
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

inline double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

inline double student_t_cdf(double t, double df) {
    double x = df / (df + t * t);
    double p = 0.5 * detail::ibeta(df / 2.0, 0.5, x);
    return t > 0 ? 1.0 - p : p;
}

/// Two-sided quantile helpers via bisection on the cdf.
inline double student_t_quantile(double p, double df) {
    if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("t quantile: p in (0,1)");
    double lo = -1e3, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double se_slope = 0.0;
    double r2 = 0.0;
    /// One-sided p-value for slope < 0.
    double p_neg_slope = 1.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 3)
        throw std::invalid_argument("linear_fit: need >= 3 paired points");
    double mx = mean(x), my = mean(y);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("linear_fit: degenerate x");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        sse += r * r;
    }
    double df = static_cast<double>(n - 2);
    f.se_slope = std::sqrt(sse / df / sxx);
    f.r2 = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    if (f.se_slope == 0.0) {
        f.p_neg_slope = f.slope < 0.0 ? 0.0 : 1.0;
    } else {
        f.p_neg_slope = student_t_cdf(f.slope / f.se_slope, df);
    }
    return f;
}

/// Two-sample Kolmogorov-Smirnov statistic; inputs need not be sorted.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// Asymptotic two-sample KS critical value at level alpha.
inline double ks_critical(std::size_t n1, std::size_t n2, double alpha) {
    double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    double n = static_cast<double>(n1) * static_cast<double>(n2) /
               static_cast<double>(n1 + n2);
    return c / std::sqrt(n);
}

namespace detail {

inline std::vector<double> midranks(std::span<const double> v) {
    std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = rank;
        i = j + 1;
    }
    return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
    double mx = mean(x), my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

struct Spearman {
    double rho = 0.0;
    /// One-sided p-value for negative association (exact permutation null for
    /// n <= 8, t approximation above).
    double p_neg = 1.0;
};

inline Spearman spearman_negative(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    if (n != y.size() || n < 3) throw std::invalid_argument("spearman: need >= 3 pairs");
    auto rx = detail::midranks(x);
    auto ry = detail::midranks(y);
    Spearman s;
    s.rho = detail::pearson(rx, ry);
    if (n <= 8) {
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::size_t total = 0, at_most = 0;
        std::vector<double> ry_p(n);
        do {
            for (std::size_t i = 0; i < n; ++i) ry_p[i] = ry[perm[i]];
            if (detail::pearson(rx, ry_p) <= s.rho + 1e-12) ++at_most;
            ++total;
        } while (std::next_permutation(perm.begin(), perm.end()));
        s.p_neg = static_cast<double>(at_most) / static_cast<double>(total);
    } else {
        double df = static_cast<double>(n - 2);
        double denom = 1.0 - s.rho * s.rho;
        if (denom <= 0.0) {
            s.p_neg = s.rho < 0 ? 0.0 : 1.0;
        } else {
            double t = s.rho * std::sqrt(df / denom);
            s.p_neg = student_t_cdf(t, df);
        }
    }
    return s;
}

/// Two-sample z statistic for a difference of proportions.
inline double two_proportion_z(std::uint64_t k1, std::uint64_t n1,
                               std::uint64_t k2, std::uint64_t n2) {
    double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
    double se = std::sqrt(pooled * (1.0 - pooled) *
                          (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2)));
    if (se == 0.0) return 0.0;
    return (p1 - p2) / se;
}

}  // namespace niwalk::stats
