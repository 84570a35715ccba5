#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "rmrce/errors.hpp"

namespace rmrce {

// Mid-ranks (ties get the average of the ranks they span), 1-based.
inline std::vector<double> mid_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[static_cast<std::size_t>(order[k])] = r;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

// Regularized incomplete beta I_x(a, b) by the standard Lentz continued
// fraction with the symmetry switch at x > (a+1)/(a+b+2).
inline double incomplete_beta_cf(double a, double b, double x) {
    const double tiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
}

inline double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                  a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * incomplete_beta_cf(a, b, x) / a;
    return 1.0 - front * incomplete_beta_cf(b, a, 1.0 - x) / b;
}

} // namespace detail

// P(T_nu >= t) for Student's t.
inline double student_t_upper_tail(double t, double nu) {
    require(nu > 0.0, "degrees of freedom must be positive");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = nu / (nu + t * t);
    const double half = 0.5 * detail::incomplete_beta(0.5 * nu, 0.5, x);
    return t >= 0.0 ? half : 1.0 - half;
}

// Spearman rho with mid-rank ties; NaN when either side is constant.
inline double spearman_rho(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, "need two equal-length samples");
    return detail::pearson(mid_ranks(a), mid_ranks(b));
}

// One-sided p for H1: rho > 0 via the t approximation
// t = rho * sqrt((n-2) / (1 - rho^2)).
inline double spearman_p_approx(double rho, std::size_t n) {
    require(n >= 3, "t approximation needs n >= 3");
    if (rho >= 1.0) return 0.0;
    if (rho <= -1.0) return 1.0;
    const double t = rho * std::sqrt((static_cast<double>(n) - 2.0) / (1.0 - rho * rho));
    return student_t_upper_tail(t, static_cast<double>(n) - 2.0);
}

// Exact one-sided p by enumerating every distinct arrangement of the b-ranks
// (uniform over the n! labelled permutations; tied arrangements carry equal
// multiplicity). Feasible for n <= 9.
inline double spearman_p_exact(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    require(n >= 2 && n <= 9, "exact permutation p is for n <= 9");
    const double observed = spearman_rho(a, b);
    require(!std::isnan(observed), "rho undefined (constant input)");

    const std::vector<double> ra = mid_ranks(a);
    std::vector<double> rb = mid_ranks(b);
    std::sort(rb.begin(), rb.end());

    // Only the cross moment varies across arrangements.
    double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    for (std::size_t i = 0; i < n; ++i) {
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    const double denom = std::sqrt(saa * sbb);

    std::uint64_t total = 0, at_least = 0;
    do {
        ++total;
        double sab = 0.0;
        for (std::size_t i = 0; i < n; ++i) sab += (ra[i] - ma) * (rb[i] - mb);
        if (sab / denom >= observed - 1e-12) ++at_least;
    } while (std::next_permutation(rb.begin(), rb.end()));
    return static_cast<double>(at_least) / static_cast<double>(total);
}

} // namespace rmrce
