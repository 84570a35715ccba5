#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "rmrce/dataset.hpp"

namespace rmrce {

namespace detail {

// Strict inversions (left > right across the split) counted by merge sort.
inline std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf,
                                     std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
    std::size_t a = lo, b = mid, out = lo;
    while (a < mid && b < hi) {
        if (v[b] < v[a]) {
            inv += static_cast<std::int64_t>(mid - a);
            buf[out++] = v[b++];
        } else {
            buf[out++] = v[a++];
        }
    }
    while (a < mid) buf[out++] = v[a++];
    while (b < hi) buf[out++] = v[b++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
              buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return inv;
}

template <typename Key>
inline std::int64_t tied_pairs(std::vector<Key> v) {
    std::sort(v.begin(), v.end());
    std::int64_t total = 0;
    std::size_t run = 1;
    for (std::size_t i = 1; i <= v.size(); ++i) {
        if (i < v.size() && v[i] == v[i - 1]) {
            ++run;
        } else {
            total += static_cast<std::int64_t>(run) * (run - 1) / 2;
            run = 1;
        }
    }
    return total;
}

} // namespace detail

// Integer Kendall numerator sum_{i<i'} sign(a_i - a_i') * sign(b_i - b_i')
// in O(n log n): sort by (a, b), count strict inversions Q in the b sequence,
// and correct for ties. Exactly equal to the O(n^2) pair sum.
inline std::int64_t kendall_numerator(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        if (a[i] != a[j]) return a[i] < a[j];
        return b[i] < b[j];
    });

    const std::int64_t n0 = static_cast<std::int64_t>(n) * (n - 1) / 2;
    const std::int64_t ties_a = detail::tied_pairs(a);
    const std::int64_t ties_b = detail::tied_pairs(b);

    std::vector<std::pair<double, double>> joint(n);
    std::vector<double> b_sorted(n);
    for (std::size_t i = 0; i < n; ++i) {
        joint[i] = {a[order[i]], b[order[i]]};
        b_sorted[i] = b[order[i]];
    }
    const std::int64_t ties_ab = detail::tied_pairs(joint);

    std::vector<double> buf(n);
    const std::int64_t discordant = detail::count_inversions(b_sorted, buf, 0, n);

    return n0 - ties_a - ties_b + ties_ab - 2 * discordant;
}

// Marginal Kendall statistic L_j = numerator / C(n,2) between y and column j.
inline double marginal_kendall(const Dataset& data, Eigen::Index j) {
    const std::size_t n = static_cast<std::size_t>(data.n());
    std::vector<double> ys(n), xs(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = data.y[static_cast<Eigen::Index>(i)];
        xs[i] = data.x(static_cast<Eigen::Index>(i), j);
    }
    return static_cast<double>(kendall_numerator(ys, xs)) /
           static_cast<double>(pair_count(data.n()));
}

} // namespace rmrce
