#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "rmrce/dataset.hpp"
#include "rmrce/loss.hpp"
#include "rmrce/optim.hpp"
#include "rmrce/parallel.hpp"
#include "rmrce/simulate.hpp"
#include "rmrce/spearman.hpp"
#include "rmrce/tuning.hpp"

namespace rmrce {

inline constexpr double kZeroTol = 1e-8;

struct SelectionMetrics {
    double tpr = 0.0;
    double fpr = 0.0;
    std::set<int> selected;
};

// Selected = free coordinates above zero_tol in magnitude. The anchor is
// constitutively nonzero and is excluded from the numerator and from the
// negatives count.
inline SelectionMetrics selection_metrics(const AnchoredCoefficients& coef,
                                          const std::set<int>& true_support,
                                          double zero_tol = kZeroTol) {
    require(!true_support.empty(), "true support must be nonempty");
    require(!true_support.count(coef.anchor_index), "anchor must not be in the scored set");
    const Eigen::Index d = coef.values.size();
    SelectionMetrics m;
    int true_positive = 0, false_positive = 0;
    for (Eigen::Index j = 0; j < d; ++j) {
        if (j == coef.anchor_index) continue;
        if (std::abs(coef.values[j]) > zero_tol) {
            m.selected.insert(static_cast<int>(j));
            if (true_support.count(static_cast<int>(j)))
                ++true_positive;
            else
                ++false_positive;
        }
    }
    const double negatives =
        static_cast<double>(d) - 1.0 - static_cast<double>(true_support.size());
    m.tpr = static_cast<double>(true_positive) / static_cast<double>(true_support.size());
    m.fpr = negatives > 0.0 ? static_cast<double>(false_positive) / negatives : 0.0;
    return m;
}

// ||estimate / estimate[anchor] - beta_star||_2. Anchored estimates pass
// through unchanged since their anchor entry is exactly 1.
inline double normalized_l2_error(const Vector& estimate, const Vector& beta_star, int anchor) {
    require(estimate.size() == beta_star.size(), "length mismatch");
    require(anchor >= 0 && anchor < estimate.size(), "anchor index out of range");
    require(estimate[anchor] != 0.0, "normalization undefined: estimate[anchor] is 0");
    return (estimate / estimate[anchor] - beta_star).norm();
}

struct RocPoint {
    double lambda = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
    int failures = 0;
};

// Per-lambda averaged selection rates over replications of the generating
// process; the ladder must be sorted descending. Failed fits are excluded
// from the averages with a count.
inline std::vector<RocPoint> roc_curve(const SimSpec& base, const std::vector<double>& ladder,
                                       const FitConfig& config, int reps, std::uint64_t seed,
                                       int threads = 1) {
    require(!ladder.empty(), "lambda ladder must be nonempty");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        require(ladder[i] <= ladder[i - 1], "lambda ladder must be sorted descending");
    require(reps >= 1, "reps must be >= 1");

    struct RepRates {
        std::vector<double> fpr, tpr;
        std::vector<bool> ok;
    };
    std::vector<RepRates> results(static_cast<std::size_t>(reps));
    parallel_tasks(reps, threads, [&](int rep) {
        SimSpec spec = base;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
        const SimulatedData sim = generate_dataset(spec);
        const std::set<int> support(sim.true_support.begin(), sim.true_support.end());
        RepRates& r = results[static_cast<std::size_t>(rep)];
        r.fpr.resize(ladder.size());
        r.tpr.resize(ladder.size());
        r.ok.resize(ladder.size(), false);
        for (std::size_t li = 0; li < ladder.size(); ++li) {
            FitConfig cfg = config;
            cfg.lambda = ladder[li];
            try {
                const FitResult fit = fit_rmrce(sim.data, cfg);
                const auto m = selection_metrics(fit.anchored(), support);
                r.fpr[li] = m.fpr;
                r.tpr[li] = m.tpr;
                r.ok[li] = true;
            } catch (const numeric_error&) {
                // excluded below
            }
        }
    });

    std::vector<RocPoint> out(ladder.size());
    for (std::size_t li = 0; li < ladder.size(); ++li) {
        out[li].lambda = ladder[li];
        int used = 0;
        for (int rep = 0; rep < reps; ++rep) {
            const RepRates& r = results[static_cast<std::size_t>(rep)];
            if (!r.ok[li]) {
                ++out[li].failures;
                continue;
            }
            out[li].fpr += r.fpr[li];
            out[li].tpr += r.tpr[li];
            ++used;
        }
        require(used > 0, "all replications failed at some lambda");
        out[li].fpr /= used;
        out[li].tpr /= used;
    }
    return out;
}

// Fraction of replications whose smoothed-loss Hessian at the anchored truth
// passes the PSD check. Note the regime dependence: pairs whose response
// order is flipped by noise enter with negative curvature weight, and the
// weight peaks exactly where flips are most likely (margins near 1/alpha).
// With few observations, many dimensions, and large alpha those terms make
// the sample Hessian indefinite in nearly every replication.
inline double hessian_pd_experiment(const SimSpec& base, int reps, double alpha,
                                    SmoothingKernel kernel, std::uint64_t seed,
                                    int threads = 1) {
    require(reps >= 1, "reps must be >= 1");
    std::vector<int> psd(static_cast<std::size_t>(reps), 0);
    parallel_tasks(reps, threads, [&](int rep) {
        SimSpec spec = base;
        spec.seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
        const SimulatedData sim = generate_dataset(spec);
        const Matrix h = smoothed_hessian_raw(sim.data, sim.beta_star, alpha, kernel);
        psd[static_cast<std::size_t>(rep)] = hessian_is_psd(h, default_psd_tol(h)) ? 1 : 0;
    });
    int count = 0;
    for (int v : psd) count += v;
    return static_cast<double>(count) / static_cast<double>(reps);
}

struct StackingRow {
    Eigen::Index n = 0;
    Eigen::Index d = 0;
    double rescaled_n = 0.0; // n / (s * ln d)
    double mean_error = 0.0;
    double stderr_error = 0.0;
    int failures = 0;
};

// Mean normalized estimation error per (n, d) grid point, reported against
// both the raw and the rescaled sample size for stacking-curve plots.
inline std::vector<StackingRow> stacking_curves(
    const SimSpec& base, const std::vector<std::pair<Eigen::Index, Eigen::Index>>& grid, int s,
    const FitConfig& config, int reps, std::uint64_t seed, int threads = 1) {
    require(!grid.empty(), "grid must be nonempty");
    require(s >= 1, "s must be >= 1");
    require(reps >= 1, "reps must be >= 1");

    std::vector<StackingRow> rows(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto [n, d] = grid[g];
        std::vector<double> errors(static_cast<std::size_t>(reps),
                                   std::numeric_limits<double>::quiet_NaN());
        parallel_tasks(reps, threads, [&, n = n, d = d](int rep) {
            SimSpec spec = base;
            spec.n = n;
            spec.d = d;
            spec.beta0 = Vector(); // re-derive default for this d
            spec.seed = derive_seed(seed, static_cast<std::uint64_t>(g) * 100003ULL +
                                              static_cast<std::uint64_t>(rep));
            const SimulatedData sim = generate_dataset(spec);
            try {
                const FitResult fit = fit_rmrce(sim.data, config);
                errors[static_cast<std::size_t>(rep)] =
                    normalized_l2_error(fit.coef, sim.beta_star, config.anchor_index);
            } catch (const numeric_error&) {
                // excluded below
            }
        });
        StackingRow& row = rows[g];
        row.n = n;
        row.d = d;
        row.rescaled_n = static_cast<double>(n) / (s * std::log(static_cast<double>(d)));
        double sum = 0.0, sum2 = 0.0;
        int used = 0;
        for (double e : errors) {
            if (std::isnan(e)) {
                ++row.failures;
                continue;
            }
            sum += e;
            sum2 += e * e;
            ++used;
        }
        require(used > 0, "all replications failed at a grid point");
        row.mean_error = sum / used;
        row.stderr_error =
            used > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / used) / (used - 1)) /
                                 static_cast<double>(used))
                     : 0.0;
    }
    return rows;
}

struct DiagnosticResult {
    double rho = std::numeric_limits<double>::quiet_NaN();
    double p_value = 1.0;
    double adjusted_p = 1.0;
    bool pass = false;
    std::string method; // "exact-permutation" or "t-approximation"
    std::string code;   // nonempty on degenerate input
};

// Split-half monotonicity check: fit on a random half, then one-sided
// Spearman test of positive association between the held-out response and
// the held-out index x^T beta_hat. Exact permutation p for held-out halves
// of size <= 9, t approximation beyond; Bonferroni-adjusted by m_tests.
inline DiagnosticResult spearman_monotonicity_test(const Dataset& data, const FitConfig& config,
                                                   std::uint64_t split_seed, int m_tests = 1) {
    validate_dataset(data);
    require(data.n() >= 8, "diagnostic needs n >= 8");
    require(m_tests >= 1, "m_tests must be >= 1");

    const Eigen::Index n = data.n();
    const Eigen::Index n_train = (n + 1) / 2;
    Philox4x32 rng(split_seed);
    const std::vector<int> perm = rng.permutation(static_cast<int>(n));

    std::vector<int> half(static_cast<std::size_t>(n), 1);
    for (Eigen::Index i = 0; i < n_train; ++i)
        half[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = 0;
    const Dataset train = subset_rows(data, half, 0, false);
    const Dataset held = subset_rows(data, half, 1, false);

    const FitResult fit = fit_rmrce(train, config);

    const std::size_t n2 = static_cast<std::size_t>(held.n());
    std::vector<double> y2(n2), index2(n2);
    for (std::size_t i = 0; i < n2; ++i) {
        y2[i] = held.y[static_cast<Eigen::Index>(i)];
        index2[i] = held.x.row(static_cast<Eigen::Index>(i)).dot(fit.coef);
    }

    DiagnosticResult result;
    const double rho = spearman_rho(y2, index2);
    if (std::isnan(rho)) {
        result.code = "constant-held-out-predictions";
        return result;
    }
    result.rho = rho;
    if (n2 <= 9) {
        result.method = "exact-permutation";
        result.p_value = spearman_p_exact(y2, index2);
    } else {
        result.method = "t-approximation";
        result.p_value = spearman_p_approx(rho, n2);
    }
    result.adjusted_p = std::min(1.0, static_cast<double>(m_tests) * result.p_value);
    result.pass = result.adjusted_p < 0.05;
    return result;
}

// Share of testable predictions confirmed by the validation sets:
// sum_i |A_i intersect M_i| / sum_i |A_i|.
inline double motif_validation_ratio(const std::vector<std::set<int>>& predicted,
                                     const std::vector<std::set<int>>& validated,
                                     bool* denominator_empty = nullptr) {
    require(predicted.size() == validated.size(), "list length mismatch");
    std::int64_t hits = 0, total = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        total += static_cast<std::int64_t>(predicted[i].size());
        for (int a : predicted[i]) hits += validated[i].count(a) ? 1 : 0;
    }
    if (denominator_empty) *denominator_empty = (total == 0);
    if (total == 0) return 0.0;
    return static_cast<double>(hits) / static_cast<double>(total);
}

} // namespace rmrce
