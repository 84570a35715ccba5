#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "rmrce/dataset.hpp"
#include "rmrce/loss.hpp"
#include "rmrce/optim.hpp"
#include "rmrce/parallel.hpp"
#include "rmrce/rng.hpp"

namespace rmrce {

struct CvGrid {
    std::vector<double> lambdas;
    std::vector<double> alphas{1.0, 3.0, 5.0, 7.0, 9.0};
    int folds = 5;
    std::uint64_t seed = 0;
};

// Default lambda ladder: 20 log-spaced points on [1e-3, 1].
inline std::vector<double> default_lambda_grid() {
    std::vector<double> grid(20);
    for (int i = 0; i < 20; ++i) grid[i] = std::pow(10.0, -3.0 + 3.0 * i / 19.0);
    return grid;
}

inline void validate_cv_grid(const CvGrid& grid, Eigen::Index n) {
    require(!grid.lambdas.empty() && !grid.alphas.empty(), "grid lists must be nonempty");
    for (std::size_t i = 0; i < grid.lambdas.size(); ++i) {
        require(grid.lambdas[i] > 0.0, "lambdas must be positive");
        if (i > 0) require(grid.lambdas[i] >= grid.lambdas[i - 1], "lambdas must be sorted");
    }
    for (double a : grid.alphas) require(a > 0.0, "alphas must be positive");
    require(grid.folds >= 2, "folds must be >= 2");
    require(grid.folds <= n, "folds must not exceed n");
}

struct CvCell {
    double lambda = 0.0;
    double alpha = 0.0;
    double score = std::numeric_limits<double>::quiet_NaN(); // NaN: fit failed in some fold
};

struct CvResult {
    std::vector<CvCell> score_table;
    double best_lambda = 0.0;
    double best_alpha = 0.0;
    std::vector<int> fold_assignments;
};

// Random equal-size fold split; sizes differ by at most one and the remainder
// goes to the earliest folds.
inline std::vector<int> fold_split(Eigen::Index n, int folds, std::uint64_t seed) {
    Philox4x32 rng(seed);
    const std::vector<int> perm = rng.permutation(static_cast<int>(n));
    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    const int base = static_cast<int>(n) / folds;
    const int rem = static_cast<int>(n) % folds;
    int pos = 0;
    for (int k = 0; k < folds; ++k) {
        const int size = base + (k < rem ? 1 : 0);
        for (int t = 0; t < size; ++t) assignment[static_cast<std::size_t>(perm[pos++])] = k;
    }
    return assignment;
}

// Rows of one fold / of its complement, in ascending original order.
inline Dataset subset_rows(const Dataset& data, const std::vector<int>& assignment, int fold,
                           bool complement) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        const bool in_fold = assignment[static_cast<std::size_t>(i)] == fold;
        if (in_fold != complement) keep.push_back(i);
    }
    Dataset out;
    out.y.resize(static_cast<Eigen::Index>(keep.size()));
    out.x.resize(static_cast<Eigen::Index>(keep.size()), data.d());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.y[static_cast<Eigen::Index>(r)] = data.y[keep[r]];
        out.x.row(static_cast<Eigen::Index>(r)) = data.x.row(keep[r]);
    }
    out.feature_names = data.feature_names;
    return out;
}

namespace detail {

inline double cv_score_with_split(const Dataset& data, const FitConfig& cfg,
                                  const std::vector<int>& assignment, int folds) {
    double acc = 0.0;
    for (int k = 0; k < folds; ++k) {
        const Dataset train = subset_rows(data, assignment, k, true);
        const Dataset held = subset_rows(data, assignment, k, false);
        require(held.n() >= 2, "fold " + std::to_string(k) + " has fewer than 2 observations");
        const FitResult fit = fit_rmrce(train, cfg);
        acc += exact_mrc_objective_raw(held, fit.coef);
    }
    return acc / folds;
}

} // namespace detail

// Mean held-out rank-correlation score over folds: fit on each fold's
// complement and evaluate the exact concordance over pairs internal to the
// held-out fold. Scores lie in [-1, 1].
inline double cv_score(const Dataset& data, const FitConfig& cfg, int folds, std::uint64_t seed) {
    validate_dataset(data);
    require(folds >= 2, "folds must be >= 2");
    require(folds <= data.n(), "folds must not exceed n");
    const auto assignment = fold_split(data.n(), folds, seed);
    return detail::cv_score_with_split(data, cfg, assignment, folds);
}

// Evaluates cv_score over lambdas x alphas with one shared fold split. Cells
// whose fits fail are recorded as NaN and excluded from the arg-max; ties go
// to the smallest lambda, then the smallest alpha. Cells evaluate
// concurrently; the arg-max scan runs in fixed (lambda, alpha) order.
inline CvResult grid_search(const Dataset& data, const CvGrid& grid, const FitConfig& base,
                            int threads = 1) {
    validate_dataset(data);
    validate_cv_grid(grid, data.n());

    CvResult result;
    result.fold_assignments = fold_split(data.n(), grid.folds, grid.seed);

    const std::size_t n_alpha = grid.alphas.size();
    result.score_table.resize(grid.lambdas.size() * n_alpha);
    parallel_tasks(static_cast<int>(result.score_table.size()), threads, [&](int cell_idx) {
        const std::size_t li = static_cast<std::size_t>(cell_idx) / n_alpha;
        const std::size_t ai = static_cast<std::size_t>(cell_idx) % n_alpha;
        FitConfig cfg = base;
        cfg.lambda = grid.lambdas[li];
        cfg.alpha = grid.alphas[ai];
        CvCell cell{cfg.lambda, cfg.alpha, std::numeric_limits<double>::quiet_NaN()};
        try {
            cell.score =
                detail::cv_score_with_split(data, cfg, result.fold_assignments, grid.folds);
        } catch (const numeric_error&) {
            // leave NaN
        }
        result.score_table[static_cast<std::size_t>(cell_idx)] = cell;
    });

    double best = -std::numeric_limits<double>::infinity();
    bool any_ok = false;
    for (const CvCell& cell : result.score_table) {
        if (std::isnan(cell.score)) continue;
        const bool better =
            cell.score > best ||
            (cell.score == best && (cell.lambda < result.best_lambda ||
                                    (cell.lambda == result.best_lambda &&
                                     cell.alpha < result.best_alpha)));
        if (!any_ok || better) {
            best = cell.score;
            result.best_lambda = cell.lambda;
            result.best_alpha = cell.alpha;
            any_ok = true;
        }
    }
    require(any_ok, "every grid cell failed");
    return result;
}

// Theory-rate smoothing level (n / (s * ln d))^(1/3). Real-valued d so the
// boundary cases ln d = 1 are expressible.
inline double recommended_alpha(double n, double s, double d) {
    require(n >= 1.0 && s >= 1.0, "n and s must be >= 1");
    require(d >= 2.0, "d must be >= 2");
    return std::cbrt(n / (s * std::log(d)));
}

struct DimensionRule {
    bool ok = false;
    std::string message;
};

// Rule of thumb 10 * ln d <= n^(1/3); a warning, never an error.
inline DimensionRule dimension_rule_check(double n, double d) {
    require(n >= 1.0, "n must be >= 1");
    require(d >= 2.0, "d must be >= 2");
    DimensionRule rule;
    const double lhs = 10.0 * std::log(d);
    const double rhs = std::cbrt(n);
    rule.ok = lhs <= rhs;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  rule.ok ? "dimension rule holds: 10*ln(d)=%.3g <= n^(1/3)=%.3g"
                          : "dimension rule violated: 10*ln(d)=%.3g > n^(1/3)=%.3g; "
                            "estimates may be unreliable",
                  lhs, rhs);
    rule.message = buf;
    return rule;
}

} // namespace rmrce
